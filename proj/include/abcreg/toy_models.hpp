#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "abcreg/rng.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

//! Built-in generative models with known structure, standing in for an
//! external simulator. gaussian_conjugate has a closed-form partial
//! posterior and anchors the correctness checks.
enum class ToyId { gaussian_conjugate, linear_gaussian_multi, hetero_scale };

inline const char* to_string(ToyId id) {
  switch (id) {
    case ToyId::gaussian_conjugate: return "gaussian_conjugate";
    case ToyId::linear_gaussian_multi: return "linear_gaussian_multi";
    case ToyId::hetero_scale: return "hetero_scale";
  }
  return "?";
}

inline ToyId parse_toy_id(std::string_view name) {
  if (name == "gaussian_conjugate") return ToyId::gaussian_conjugate;
  if (name == "linear_gaussian_multi") return ToyId::linear_gaussian_multi;
  if (name == "hetero_scale") return ToyId::hetero_scale;
  throw ConfigError("unknown toy model '" + std::string(name) + "'");
}

//! Toy model hyperparameters.
//!  - gaussian_conjugate: theta ~ N(prior_mean, prior_sd^2), the summary is
//!    the mean of data_per_draw Normal(theta, noise_sd^2) draws.
//!  - linear_gaussian_multi: same, plus noise_stats independent N(0,1)
//!    statistics carrying no information.
//!  - hetero_scale: theta ~ U(0,1), s ~ N(theta, (0.05 + 0.5 theta)^2), so
//!    the residual spread grows with s.
struct ToySpec {
  ToyId id = ToyId::gaussian_conjugate;
  double prior_mean = 0.0;
  double prior_sd = 1.0;
  double noise_sd = 1.0;
  Index data_per_draw = 10;   // k
  Index noise_stats = 4;      // linear_gaussian_multi only
  std::uint64_t seed = 0;

  void validate() const {
    if (!(prior_sd > 0.0)) throw ConfigError("prior sd must be positive");
    if (!(noise_sd > 0.0)) throw ConfigError("noise sd must be positive");
    if (data_per_draw < 1) throw ConfigError("draws per dataset must be >= 1");
    if (noise_stats < 0) throw ConfigError("noise statistic count must be >= 0");
  }
};

//! One simulated dataset: the reference table, the observed statistics
//! generated from a fresh prior draw, and that true parameter.
struct ToyData {
  SimulationTable table;
  ObservedSummaries observed;
  VectorXd true_theta;
};

namespace detail {

//! Draws (theta, statistics) for one row. Row `index` uses the substream
//! Rng(substream_seed(seed, index)); the observed dataset is row n.
inline void simulate_row(
    const ToySpec& spec, std::uint64_t index, double& theta,
    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> stats) {
  Rng rng(substream_seed(spec.seed, index));
  switch (spec.id) {
    case ToyId::gaussian_conjugate:
    case ToyId::linear_gaussian_multi: {
      theta = spec.prior_mean + spec.prior_sd * rng.normal();
      double acc = 0.0;
      for (Index k = 0; k < spec.data_per_draw; ++k)
        acc += theta + spec.noise_sd * rng.normal();
      stats[0] = acc / static_cast<double>(spec.data_per_draw);
      for (Index j = 1; j < stats.size(); ++j) stats[j] = rng.normal();
      break;
    }
    case ToyId::hetero_scale: {
      theta = rng.uniform();
      stats[0] = theta + (0.05 + 0.5 * theta) * rng.normal();
      break;
    }
  }
}

inline Index toy_stat_count(const ToySpec& spec) {
  return spec.id == ToyId::linear_gaussian_multi ? 1 + spec.noise_stats : 1;
}

}  // namespace detail

//! Simulates a reference table of n rows plus one observed dataset.
//! Deterministic given spec.seed; rows are independent substreams, so the
//! table does not depend on generation order.
inline ToyData simulate(const ToySpec& spec, Index n) {
  spec.validate();
  if (n < 1) throw ConfigError("toy simulation needs n >= 1");
  const Index q = detail::toy_stat_count(spec);

  MatrixXd theta(n, 1);
  MatrixXd stats(n, q);
  for (Index i = 0; i < n; ++i)
    detail::simulate_row(spec, static_cast<std::uint64_t>(i), theta(i, 0),
                         stats.row(i));

  std::vector<std::string> stat_names{"s1"};
  for (Index j = 1; j < q; ++j)
    stat_names.push_back("noise" + std::to_string(j));

  double true_theta = 0.0;
  Eigen::RowVectorXd obs_row(q);
  detail::simulate_row(spec, static_cast<std::uint64_t>(n), true_theta, obs_row);

  ToyData out{SimulationTable(std::move(theta), std::move(stats), {"theta"},
                              std::move(stat_names)),
              ObservedSummaries{obs_row.transpose()}, VectorXd::Constant(1, true_theta)};
  return out;
}

//! Closed-form partial posterior moments.
struct AnalyticPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

//! Normal-normal conjugate update with observation variance
//! noise_sd^2 / data_per_draw. The noise statistics of
//! linear_gaussian_multi are independent of theta and drop out, so only
//! the first observed statistic enters. hetero_scale has no closed form.
inline AnalyticPosterior analytic_posterior(const ToySpec& spec,
                                            const VectorXd& s_obs) {
  spec.validate();
  if (spec.id == ToyId::hetero_scale)
    throw ConfigError("no analytic posterior for hetero_scale");
  if (s_obs.size() < 1) throw DataError("observed vector is empty");
  const double obs_var =
      spec.noise_sd * spec.noise_sd / static_cast<double>(spec.data_per_draw);
  const double prior_precision = 1.0 / (spec.prior_sd * spec.prior_sd);
  const double data_precision = 1.0 / obs_var;
  const double precision = prior_precision + data_precision;
  AnalyticPosterior out;
  out.variance = 1.0 / precision;
  out.mean = (spec.prior_mean * prior_precision + s_obs[0] * data_precision) /
             precision;
  return out;
}

}  // namespace abcreg
