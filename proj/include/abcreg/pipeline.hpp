#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "abcreg/adjustment.hpp"
#include "abcreg/rejection.hpp"
#include "abcreg/rng.hpp"

namespace abcreg {

//! Full inference configuration: the rejection step plus what to do with
//! the accepted sample. `name` tags report rows.
struct InferenceConfig {
  std::string name = "rejection";
  RejectionConfig rejection;
  AdjustmentConfig adjustment;

  void validate(Index p) const {
    rejection.validate();
    adjustment.validate(p);
  }
};

//! Everything a run produces: the rejection output, and when adjustment is
//! active the adjusted sample and the fitted models.
struct InferenceResult {
  RejectionOutput rejection;
  std::optional<WeightedSample> adjusted;
  std::optional<RegressionModel> mean_model;
  std::optional<VarianceModel> variance_model;

  //! The sample posterior summaries should be computed from.
  const WeightedSample& posterior_sample() const {
    return adjusted ? *adjusted : rejection.sample;
  }
};

//! Runs regression fitting and adjustment on an existing rejection output.
inline InferenceResult finish_inference(const SimulationTable& table,
                                        const ObservedSummaries& obs,
                                        const InferenceConfig& config,
                                        RejectionOutput rejection) {
  InferenceResult result{std::move(rejection), {}, {}, {}};
  const AdjustmentConfig& adj = config.adjustment;
  if (adj.mode == AdjustmentMode::none) return result;

  const MatrixXd stats = accepted_stats(table, result.rejection);
  const WeightedSample& sample = result.rejection.sample;
  const MatrixXd phi = transform_forward(sample.values(), adj.transforms);

  switch (adj.mean_kind) {
    case RegressionKind::linear:
      result.mean_model = fit_wls_linear(stats, phi, sample.weights());
      break;
    case RegressionKind::ridge:
      result.mean_model = fit_ridge(stats, phi, sample.weights(), adj.ridge_lambda);
      break;
    case RegressionKind::mlp:
      result.mean_model = fit_mlp(stats, phi, sample.weights(), adj.mlp);
      break;
  }

  if (adj.mode == AdjustmentMode::homoscedastic) {
    result.adjusted = adjust_homoscedastic(sample, *result.mean_model, stats,
                                           obs.s_obs, adj.transforms);
  } else {
    const MatrixXd residuals = phi - result.mean_model->predict(stats);
    MlpConfig variance_mlp = adj.mlp;
    variance_mlp.seed = substream_seed(adj.mlp.seed, 1);
    result.variance_model = fit_log_variance(stats, residuals, sample.weights(),
                                             adj.variance_kind, variance_mlp);
    result.adjusted =
        adjust_heteroscedastic(sample, *result.mean_model, *result.variance_model,
                               stats, obs.s_obs, adj.transforms);
  }
  return result;
}

//! Rejection, regression fitting and adjustment in one call.
inline InferenceResult run_inference(const SimulationTable& table,
                                     const ObservedSummaries& obs,
                                     const InferenceConfig& config) {
  config.validate(table.p());
  return finish_inference(table, obs, config, reject(table, obs, config.rejection));
}

//! Builds an InferenceConfig from the method vocabulary used by reports
//! and the command line: rejection | loclinear | ridge | neuralnet, each
//! optionally suffixed with -homo (default) or -hetero. Plain rejection
//! uses the uniform kernel unless the caller overrode the kernel, so the
//! accepted sample is the classic equally weighted one.
inline InferenceConfig make_method_config(std::string_view method,
                                          const RejectionConfig& rejection_base,
                                          const AdjustmentConfig& adjustment_base,
                                          bool kernel_overridden = false) {
  InferenceConfig config;
  config.name = std::string(method);
  config.rejection = rejection_base;
  config.adjustment = adjustment_base;

  std::string_view mean = method;
  AdjustmentMode mode = AdjustmentMode::homoscedastic;
  if (const auto pos = method.rfind("-hetero"); pos != std::string_view::npos &&
                                                pos + 7 == method.size()) {
    mean = method.substr(0, pos);
    mode = AdjustmentMode::heteroscedastic;
  } else if (const auto hpos = method.rfind("-homo");
             hpos != std::string_view::npos && hpos + 5 == method.size()) {
    mean = method.substr(0, hpos);
  }

  if (mean == "rejection") {
    if (method != "rejection")
      throw ConfigError("method 'rejection' takes no homo/hetero suffix");
    config.adjustment.mode = AdjustmentMode::none;
    if (!kernel_overridden) config.rejection.kernel = KernelKind::uniform;
    return config;
  }
  config.adjustment.mode = mode;
  if (mean == "loclinear") {
    config.adjustment.mean_kind = RegressionKind::linear;
    config.adjustment.variance_kind = VarianceKind::linear;
  } else if (mean == "ridge") {
    config.adjustment.mean_kind = RegressionKind::ridge;
    config.adjustment.variance_kind = VarianceKind::linear;
  } else if (mean == "neuralnet") {
    config.adjustment.mean_kind = RegressionKind::mlp;
    config.adjustment.variance_kind = VarianceKind::mlp;
  } else {
    throw ConfigError("unknown method '" + std::string(method) + "'");
  }
  return config;
}

}  // namespace abcreg
