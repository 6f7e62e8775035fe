#pragma once

#include <cmath>
#include <string>

#include "abcreg/regression.hpp"
#include "abcreg/transforms.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

enum class AdjustmentMode { none, homoscedastic, heteroscedastic };

inline const char* to_string(AdjustmentMode m) {
  switch (m) {
    case AdjustmentMode::none: return "none";
    case AdjustmentMode::homoscedastic: return "homoscedastic";
    case AdjustmentMode::heteroscedastic: return "heteroscedastic";
  }
  return "?";
}

//! What to do after rejection: nothing, shift by the regression residual,
//! or shift and rescale by the conditional standard deviation.
struct AdjustmentConfig {
  AdjustmentMode mode = AdjustmentMode::none;
  RegressionKind mean_kind = RegressionKind::linear;
  double ridge_lambda = 1e-4;
  MlpConfig mlp;
  VarianceKind variance_kind = VarianceKind::linear;
  TransformSpec transforms;

  void validate(Index p) const {
    transforms.validate(p);
    if (mode != AdjustmentMode::none) mlp.validate();
    if (ridge_lambda < 0.0) throw ConfigError("ridge penalty must be >= 0");
  }
};

namespace detail {

inline void check_adjust_inputs(const WeightedSample& sample,
                                const RegressionModel& model,
                                const Eigen::Ref<const MatrixXd>& stats,
                                const Eigen::Ref<const VectorXd>& obs) {
  if (stats.rows() != sample.size())
    throw DataError("statistic rows do not match the accepted sample");
  if (stats.cols() != obs.size())
    throw DataError("observed vector length does not match statistics");
  if (model.input_dim() != stats.cols())
    throw DataError("mean model input dimension does not match statistics");
  if (model.output_dim() != sample.dim())
    throw DataError("mean model output dimension does not match parameters");
}

}  // namespace detail

//! Homoscedastic adjustment: each accepted value becomes
//! m(s_obs) + (theta_i - m(s_i)), computed in the transformed scale and
//! mapped back. Weights pass through unchanged.
inline WeightedSample adjust_homoscedastic(const WeightedSample& sample,
                                           const RegressionModel& mean_model,
                                           const Eigen::Ref<const MatrixXd>& stats,
                                           const Eigen::Ref<const VectorXd>& obs,
                                           const TransformSpec& transforms = {}) {
  detail::check_adjust_inputs(sample, mean_model, stats, obs);
  transforms.validate(sample.dim());
  const MatrixXd phi = transform_forward(sample.values(), transforms);
  const MatrixXd fitted = mean_model.predict(stats);
  const VectorXd fitted_obs = mean_model.predict_one(obs);
  const MatrixXd adjusted =
      (phi - fitted).rowwise() + fitted_obs.transpose();
  return WeightedSample::from_normalized(transform_back(adjusted, transforms),
                                         sample.weights(),
                                         SampleLabel::homoscedastic);
}

//! Heteroscedastic adjustment adds the sigma(s_obs)/sigma(s_i) rescaling
//! of the residual, per parameter. The ratio is evaluated in the log
//! domain; a ratio above 1e12 means sigma(s_i) fell below the relative
//! floor and is an error naming the row.
inline WeightedSample adjust_heteroscedastic(const WeightedSample& sample,
                                             const RegressionModel& mean_model,
                                             const VarianceModel& variance_model,
                                             const Eigen::Ref<const MatrixXd>& stats,
                                             const Eigen::Ref<const VectorXd>& obs,
                                             const TransformSpec& transforms = {}) {
  detail::check_adjust_inputs(sample, mean_model, stats, obs);
  transforms.validate(sample.dim());
  const MatrixXd phi = transform_forward(sample.values(), transforms);
  const MatrixXd fitted = mean_model.predict(stats);
  const VectorXd fitted_obs = mean_model.predict_one(obs);
  const MatrixXd log_var = variance_model.log_variance_at(stats);
  const VectorXd log_var_obs =
      variance_model.log_variance_at(obs.transpose()).row(0);

  static const double kMaxLogRatio = std::log(1e12);
  MatrixXd adjusted(sample.size(), sample.dim());
  for (Index i = 0; i < sample.size(); ++i) {
    for (Index j = 0; j < sample.dim(); ++j) {
      const double log_ratio = 0.5 * (log_var_obs[j] - log_var(i, j));
      if (log_ratio > kMaxLogRatio)
        throw NumericError("conditional sd at accepted row " +
                           std::to_string(i + 1) +
                           " is below the 1e-12 relative floor; "
                           "heteroscedastic ratio would blow up");
      const double ratio = std::exp(log_ratio);
      adjusted(i, j) = fitted_obs[j] + ratio * (phi(i, j) - fitted(i, j));
    }
  }
  return WeightedSample::from_normalized(transform_back(adjusted, transforms),
                                         sample.weights(),
                                         SampleLabel::heteroscedastic);
}

}  // namespace abcreg
