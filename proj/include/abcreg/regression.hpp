#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <string_view>
#include <utility>

#include "abcreg/rng.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

enum class RegressionKind { linear, ridge, mlp };

inline const char* to_string(RegressionKind k) {
  switch (k) {
    case RegressionKind::linear: return "linear";
    case RegressionKind::ridge: return "ridge";
    case RegressionKind::mlp: return "mlp";
  }
  return "?";
}

//! Single-hidden-layer network configuration: tanh hidden activation,
//! linear output, full-batch gradient descent with backtracking.
struct MlpConfig {
  Index hidden_units = 0;        // 0 = default max(4, ceil(q/2))
  Index epochs = 2000;
  double learning_rate = 0.1;    // initial step, adapted by backtracking
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_units < 0) throw ConfigError("hidden_units must be >= 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (l2_penalty < 0.0) throw ConfigError("L2 penalty must be >= 0");
  }

  Index resolved_hidden_units(Index q) const {
    if (hidden_units > 0) return hidden_units;
    return std::max<Index>(4, (q + 1) / 2);
  }
};

//! Weighted centering/scaling of the statistics, recorded in the model so
//! predict can be called with original-unit statistics.
struct StandardizationParams {
  VectorXd mean;   // q
  VectorXd scale;  // q, constant columns keep scale 1

  MatrixXd apply(const Eigen::Ref<const MatrixXd>& stats) const {
    return (stats.rowwise() - mean.transpose()).array().rowwise() /
           scale.array().transpose();
  }
};

//! Weighted mean/sd standardization (weights assumed normalized).
inline StandardizationParams weighted_standardization(
    const Eigen::Ref<const MatrixXd>& stats, const Eigen::Ref<const VectorXd>& w) {
  StandardizationParams out;
  out.mean = stats.transpose() * w;
  VectorXd var(stats.cols());
  for (Index j = 0; j < stats.cols(); ++j)
    var[j] = (stats.col(j).array() - out.mean[j]).square().matrix().dot(w);
  out.scale = var.array().sqrt();
  for (Index j = 0; j < out.scale.size(); ++j)
    if (!(out.scale[j] > 0.0)) out.scale[j] = 1.0;
  return out;
}

//! Fitted conditional-mean model m(s). For linear/ridge the coefficients
//! live in the standardized-statistic space; coefficients_raw() converts
//! them back to original units. MLP models share one hidden layer across
//! the p outputs.
struct RegressionModel {
  RegressionKind kind = RegressionKind::linear;
  StandardizationParams standardization;

  // linear / ridge
  VectorXd intercept;  // p
  MatrixXd coef;       // q x p, standardized space
  double ridge_lambda = 0.0;

  // mlp
  MatrixXd w1;  // H x q
  VectorXd b1;  // H
  MatrixXd w2;  // p x H
  VectorXd b2;  // p
  MlpConfig mlp_config;
  double final_loss = 0.0;
  Index epochs_run = 0;

  Index input_dim() const { return standardization.mean.size(); }
  Index output_dim() const {
    return kind == RegressionKind::mlp ? b2.size() : intercept.size();
  }

  //! Predicted theta for statistics given in original units.
  MatrixXd predict(const Eigen::Ref<const MatrixXd>& stats) const {
    if (stats.cols() != input_dim())
      throw DataError("prediction input has " + std::to_string(stats.cols()) +
                      " statistics, model expects " + std::to_string(input_dim()));
    const MatrixXd z = standardization.apply(stats);
    if (kind == RegressionKind::mlp) {
      const MatrixXd hidden =
          ((z * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
      return (hidden * w2.transpose()).rowwise() + b2.transpose();
    }
    return (z * coef).rowwise() + intercept.transpose();
  }

  VectorXd predict_one(const Eigen::Ref<const VectorXd>& s) const {
    return predict(s.transpose()).row(0);
  }

  //! (alpha, beta) in original statistic units; linear/ridge only.
  std::pair<VectorXd, MatrixXd> coefficients_raw() const {
    if (kind == RegressionKind::mlp)
      throw ConfigError("raw coefficients exist for linear and ridge models only");
    MatrixXd beta = coef.array().colwise() / standardization.scale.array();
    VectorXd alpha = intercept - beta.transpose() * standardization.mean;
    return {std::move(alpha), std::move(beta)};
  }
};

namespace detail {

inline void check_fit_inputs(const Eigen::Ref<const MatrixXd>& stats,
                             const Eigen::Ref<const MatrixXd>& theta,
                             const Eigen::Ref<const VectorXd>& weights) {
  if (stats.rows() != theta.rows() || stats.rows() != weights.size())
    throw DataError("row counts of statistics, parameters and weights differ");
  if (stats.rows() < 1) throw DataError("no rows to fit");
  for (Index i = 0; i < weights.size(); ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw DataError("fit weights must be finite and positive");
}

inline VectorXd normalized(const Eigen::Ref<const VectorXd>& w) {
  return w / w.sum();
}

}  // namespace detail

//! Exact minimizer of the weighted least squares criterion
//! sum_i w_i (theta_i - alpha - beta s_i)^2, one solve shared across the
//! p parameter dimensions. Requires at least q+2 rows.
inline RegressionModel fit_wls_linear(const Eigen::Ref<const MatrixXd>& stats,
                                      const Eigen::Ref<const MatrixXd>& theta,
                                      const Eigen::Ref<const VectorXd>& weights) {
  detail::check_fit_inputs(stats, theta, weights);
  const Index m = stats.rows();
  const Index q = stats.cols();
  if (m < q + 2)
    throw DataError("too few accepted simulations for linear regression (" +
                    std::to_string(m) + " rows, need at least " +
                    std::to_string(q + 2) + ")");
  const VectorXd w = detail::normalized(weights);

  RegressionModel model;
  model.kind = RegressionKind::linear;
  model.standardization = weighted_standardization(stats, w);
  const MatrixXd z = model.standardization.apply(stats);

  const VectorXd sqw = w.array().sqrt();
  MatrixXd design(m, q + 1);
  design.col(0) = sqw;
  design.rightCols(q) = z.array().colwise() * sqw.array();
  const MatrixXd response = theta.array().colwise() * sqw.array();

  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < q + 1)
    throw DataError(
        "weighted design is rank-deficient (collinear statistics); "
        "consider ridge regression");
  const MatrixXd solution = qr.solve(response);
  model.intercept = solution.row(0);
  model.coef = solution.bottomRows(q);
  return model;
}

//! Ridge regression: the weighted least squares criterion plus
//! lambda * |beta|^2 on the standardized coefficients, intercept
//! unpenalized. lambda = 0 reduces to fit_wls_linear.
inline RegressionModel fit_ridge(const Eigen::Ref<const MatrixXd>& stats,
                                 const Eigen::Ref<const MatrixXd>& theta,
                                 const Eigen::Ref<const VectorXd>& weights,
                                 double lambda) {
  if (lambda < 0.0) throw ConfigError("ridge penalty must be >= 0");
  if (lambda == 0.0) {
    RegressionModel model = fit_wls_linear(stats, theta, weights);
    model.kind = RegressionKind::ridge;
    return model;
  }
  detail::check_fit_inputs(stats, theta, weights);
  const Index q = stats.cols();
  const VectorXd w = detail::normalized(weights);

  RegressionModel model;
  model.kind = RegressionKind::ridge;
  model.ridge_lambda = lambda;
  model.standardization = weighted_standardization(stats, w);
  const MatrixXd z = model.standardization.apply(stats);

  // Centering removes the intercept from the penalized solve.
  const VectorXd z_mean = z.transpose() * w;
  const VectorXd t_mean = theta.transpose() * w;
  const MatrixXd zc = z.rowwise() - z_mean.transpose();
  const MatrixXd tc = theta.rowwise() - t_mean.transpose();

  const MatrixXd gram = zc.transpose() * (zc.array().colwise() * w.array()).matrix() +
                        lambda * MatrixXd::Identity(q, q);
  const MatrixXd rhs = zc.transpose() * (tc.array().colwise() * w.array()).matrix();
  model.coef = gram.ldlt().solve(rhs);
  model.intercept = t_mean - model.coef.transpose() * z_mean;
  return model;
}

// ---------------------------------------------------------------------------
// MLP internals. The loss/gradient pair is exposed so it can be checked
// against finite differences; parameters are flattened in the order
// [w1 col-major, b1, w2 col-major, b2].

struct MlpShape {
  Index inputs;   // q
  Index hidden;   // H
  Index outputs;  // p

  Index parameter_count() const {
    return hidden * inputs + hidden + outputs * hidden + outputs;
  }
};

inline VectorXd mlp_pack(const MatrixXd& w1, const VectorXd& b1,
                         const MatrixXd& w2, const VectorXd& b2) {
  VectorXd flat(w1.size() + b1.size() + w2.size() + b2.size());
  Index at = 0;
  flat.segment(at, w1.size()) = Eigen::Map<const VectorXd>(w1.data(), w1.size());
  at += w1.size();
  flat.segment(at, b1.size()) = b1;
  at += b1.size();
  flat.segment(at, w2.size()) = Eigen::Map<const VectorXd>(w2.data(), w2.size());
  at += w2.size();
  flat.segment(at, b2.size()) = b2;
  return flat;
}

inline void mlp_unpack(const Eigen::Ref<const VectorXd>& flat, const MlpShape& shape,
                       MatrixXd& w1, VectorXd& b1, MatrixXd& w2, VectorXd& b2) {
  Index at = 0;
  w1 = Eigen::Map<const MatrixXd>(flat.data() + at, shape.hidden, shape.inputs);
  at += shape.hidden * shape.inputs;
  b1 = flat.segment(at, shape.hidden);
  at += shape.hidden;
  w2 = Eigen::Map<const MatrixXd>(flat.data() + at, shape.outputs, shape.hidden);
  at += shape.outputs * shape.hidden;
  b2 = flat.segment(at, shape.outputs);
}

//! Weighted squared loss of the network plus the L2 penalty on both
//! weight matrices (biases unpenalized).
inline double mlp_loss(const Eigen::Ref<const VectorXd>& flat, const MlpShape& shape,
                       const Eigen::Ref<const MatrixXd>& z,
                       const Eigen::Ref<const MatrixXd>& targets,
                       const Eigen::Ref<const VectorXd>& w, double l2_penalty) {
  MatrixXd w1, w2;
  VectorXd b1, b2;
  mlp_unpack(flat, shape, w1, b1, w2, b2);
  const MatrixXd hidden =
      ((z * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  const MatrixXd pred = (hidden * w2.transpose()).rowwise() + b2.transpose();
  const double fit = ((pred - targets).array().square().rowwise().sum() *
                      w.array()).sum();
  return fit + l2_penalty * (w1.squaredNorm() + w2.squaredNorm());
}

//! Analytic gradient of mlp_loss in the same flattened layout.
inline VectorXd mlp_loss_gradient(const Eigen::Ref<const VectorXd>& flat,
                                  const MlpShape& shape,
                                  const Eigen::Ref<const MatrixXd>& z,
                                  const Eigen::Ref<const MatrixXd>& targets,
                                  const Eigen::Ref<const VectorXd>& w,
                                  double l2_penalty) {
  MatrixXd w1, w2;
  VectorXd b1, b2;
  mlp_unpack(flat, shape, w1, b1, w2, b2);
  const MatrixXd hidden =
      ((z * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  const MatrixXd pred = (hidden * w2.transpose()).rowwise() + b2.transpose();
  const MatrixXd dpred =
      2.0 * ((pred - targets).array().colwise() * w.array()).matrix();  // m x p
  const MatrixXd dw2 = dpred.transpose() * hidden + 2.0 * l2_penalty * w2;
  const VectorXd db2 = dpred.colwise().sum();
  const MatrixXd dhidden_pre =
      ((dpred * w2).array() * (1.0 - hidden.array().square())).matrix();  // m x H
  const MatrixXd dw1 = dhidden_pre.transpose() * z + 2.0 * l2_penalty * w1;
  const VectorXd db1 = dhidden_pre.colwise().sum();
  return mlp_pack(dw1, db1, dw2, db2);
}

//! Trains the network by full-batch gradient descent. Each epoch takes the
//! steepest-descent direction and backtracks the step until the loss does
//! not increase, so the training loss is nonincreasing. Deterministic
//! given config.seed.
inline RegressionModel fit_mlp(const Eigen::Ref<const MatrixXd>& stats,
                               const Eigen::Ref<const MatrixXd>& theta,
                               const Eigen::Ref<const VectorXd>& weights,
                               const MlpConfig& config) {
  config.validate();
  detail::check_fit_inputs(stats, theta, weights);
  const Index m = stats.rows();
  const Index q = stats.cols();
  const Index p = theta.cols();
  const Index hidden_units = config.resolved_hidden_units(q);
  if (m < 10 * hidden_units)
    std::cerr << "warning: only " << m << " rows for a network with "
              << hidden_units << " hidden units (recommend >= "
              << 10 * hidden_units << ")\n";
  const VectorXd w = detail::normalized(weights);

  RegressionModel model;
  model.kind = RegressionKind::mlp;
  model.mlp_config = config;
  model.mlp_config.hidden_units = hidden_units;
  model.standardization = weighted_standardization(stats, w);
  const MatrixXd z = model.standardization.apply(stats);

  const MlpShape shape{q, hidden_units, p};
  Rng rng(config.seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(q));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden_units));
  MatrixXd w1(hidden_units, q), w2(p, hidden_units);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < hidden_units; ++i)
      w1(i, j) = a1 * (2.0 * rng.uniform() - 1.0);
  for (Index j = 0; j < hidden_units; ++j)
    for (Index i = 0; i < p; ++i)
      w2(i, j) = a2 * (2.0 * rng.uniform() - 1.0);
  const VectorXd b1 = VectorXd::Zero(hidden_units);
  const VectorXd b2 = theta.transpose() * w;  // start at the weighted mean

  VectorXd params = mlp_pack(w1, b1, w2, b2);
  double loss = mlp_loss(params, shape, z, theta, w, config.l2_penalty);
  if (!std::isfinite(loss))
    throw NumericError("non-finite training loss at epoch 0");

  double step = config.learning_rate;
  Index epoch = 0;
  for (; epoch < config.epochs; ++epoch) {
    const VectorXd grad =
        mlp_loss_gradient(params, shape, z, theta, w, config.l2_penalty);
    if (!grad.allFinite())
      throw NumericError("non-finite training loss at epoch " +
                         std::to_string(epoch + 1));
    double trial = std::min(step * 2.0, config.learning_rate * 1e6);
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      const VectorXd candidate = params - trial * grad;
      const double candidate_loss =
          mlp_loss(candidate, shape, z, theta, w, config.l2_penalty);
      if (std::isfinite(candidate_loss) && candidate_loss <= loss) {
        params = candidate;
        loss = candidate_loss;
        step = trial;
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted) break;  // no descent step left at this scale
  }

  mlp_unpack(params, shape, model.w1, model.b1, model.w2, model.b2);
  model.final_loss = loss;
  model.epochs_run = epoch;
  return model;
}

// ---------------------------------------------------------------------------

enum class VarianceKind { linear, mlp };

inline const char* to_string(VarianceKind k) {
  return k == VarianceKind::linear ? "linear" : "mlp";
}

//! Fitted conditional log-variance model; sigma(s) = exp(predict(s)/2) is
//! positive by construction.
struct VarianceModel {
  RegressionModel log_variance;

  MatrixXd log_variance_at(const Eigen::Ref<const MatrixXd>& stats) const {
    return log_variance.predict(stats);
  }
  MatrixXd sigma(const Eigen::Ref<const MatrixXd>& stats) const {
    return (0.5 * log_variance.predict(stats)).array().exp();
  }
};

//! Fits log sigma^2(s) by weighted least squares on the log squared
//! residuals of a previously fitted mean model, per parameter. Residuals
//! below sqrt(1e-300) in magnitude are clamped so exact zeros stay finite.
inline VarianceModel fit_log_variance(const Eigen::Ref<const MatrixXd>& stats,
                                      const Eigen::Ref<const MatrixXd>& residuals,
                                      const Eigen::Ref<const VectorXd>& weights,
                                      VarianceKind kind,
                                      const MlpConfig& mlp_config = {}) {
  if (stats.rows() != residuals.rows())
    throw DataError("residual row count does not match statistics");
  if (residuals.array().abs().maxCoeff() == 0.0)
    throw NumericError("degenerate residuals; heteroscedastic adjustment unavailable");
  constexpr double floor = 1e-300;
  const MatrixXd log_sq =
      residuals.array().square().max(floor).log().matrix();
  VarianceModel out;
  out.log_variance = kind == VarianceKind::linear
                         ? fit_wls_linear(stats, log_sq, weights)
                         : fit_mlp(stats, log_sq, weights, mlp_config);
  return out;
}

}  // namespace abcreg
