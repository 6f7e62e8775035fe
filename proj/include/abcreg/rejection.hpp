#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abcreg/kernels.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

//! Per-statistic scaling applied before the Euclidean distance.
enum class Standardization { mad, sd, none };

inline const char* to_string(Standardization s) {
  switch (s) {
    case Standardization::mad: return "mad";
    case Standardization::sd: return "sd";
    case Standardization::none: return "none";
  }
  return "?";
}

inline Standardization parse_standardization(std::string_view name) {
  if (name == "mad") return Standardization::mad;
  if (name == "sd") return Standardization::sd;
  if (name == "none") return Standardization::none;
  throw ConfigError("unknown standardization '" + std::string(name) + "'");
}

//! Rejection step configuration. Exactly one of acceptance_rate (fraction
//! of simulations kept, the bandwidth becomes that quantile of the
//! distances) or bandwidth (explicit h) must be set.
struct RejectionConfig {
  KernelKind kernel = KernelKind::epanechnikov;
  std::optional<double> acceptance_rate;  // in (0, 1]
  std::optional<double> bandwidth;        // h > 0
  Standardization standardization = Standardization::mad;

  void validate() const {
    if (acceptance_rate.has_value() == bandwidth.has_value())
      throw ConfigError("exactly one of acceptance rate and bandwidth must be set");
    if (acceptance_rate && !(*acceptance_rate > 0.0 && *acceptance_rate <= 1.0))
      throw ConfigError("acceptance rate must lie in (0, 1]");
    if (bandwidth && !(*bandwidth > 0.0))
      throw ConfigError("bandwidth must be positive");
  }

  friend bool operator==(const RejectionConfig&, const RejectionConfig&) = default;
};

//! Scaled statistics, scaled observation and the per-column scale factors.
struct StandardizedStats {
  MatrixXd stats;
  VectorXd obs;
  VectorXd scales;
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    const double lo = *std::max_element(
        v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (lo + m);
  }
  return m;
}

}  // namespace detail

//! Median absolute deviation of a column (no consistency constant; only
//! relative scales matter for the distance).
inline double column_mad(const Eigen::Ref<const VectorXd>& column) {
  std::vector<double> work(column.data(), column.data() + column.size());
  const double med = detail::median_inplace(work);
  for (double& x : work) x = std::abs(x - med);
  return detail::median_inplace(work);
}

//! Sample standard deviation of a column (divisor n-1).
inline double column_sd(const Eigen::Ref<const VectorXd>& column) {
  const Index n = column.size();
  if (n < 2) return 0.0;
  const double mean = column.mean();
  return std::sqrt((column.array() - mean).square().sum() /
                   static_cast<double>(n - 1));
}

//! Divides each statistic column and the matching observed entry by the
//! column's scale (mad or sd of the simulated column, or 1).
inline StandardizedStats standardize(const SimulationTable& table,
                                     const ObservedSummaries& obs,
                                     Standardization mode) {
  if (obs.s_obs.size() != table.q())
    throw DataError("observed vector length does not match table statistics");
  StandardizedStats out;
  out.scales = VectorXd::Ones(table.q());
  if (mode != Standardization::none) {
    for (Index j = 0; j < table.q(); ++j) {
      const double s = mode == Standardization::mad ? column_mad(table.stats.col(j))
                                                    : column_sd(table.stats.col(j));
      if (!(s > 0.0))
        throw DataError("statistic column '" + table.stat_names[static_cast<std::size_t>(j)] +
                        "' has zero " +
                        (mode == Standardization::mad ? std::string("mad") : std::string("sd")) +
                        "; cannot standardize");
      out.scales[j] = s;
    }
  }
  out.stats = table.stats.array().rowwise() / out.scales.array().transpose();
  out.obs = obs.s_obs.array() / out.scales.array();
  return out;
}

//! Euclidean distances between each scaled row and the scaled observation.
inline VectorXd distances(const Eigen::Ref<const MatrixXd>& scaled_stats,
                          const Eigen::Ref<const VectorXd>& scaled_obs) {
  if (scaled_stats.cols() != scaled_obs.size())
    throw DataError("statistic dimension does not match observed vector");
  return (scaled_stats.rowwise() - scaled_obs.transpose()).rowwise().norm();
}

//! Bandwidth from an acceptance rate: the ceil(p*n)-th smallest distance,
//! so at least that many simulations satisfy distance <= h. The ceil is
//! evaluated with a small slack against floating rounding of p*n.
inline double bandwidth_from_rate(const Eigen::Ref<const VectorXd>& dist,
                                  double rate) {
  if (!(rate > 0.0 && rate <= 1.0))
    throw ConfigError("acceptance rate must lie in (0, 1]");
  const Index n = dist.size();
  if (n < 1) throw DataError("no distances given");
  auto k = static_cast<Index>(
      std::ceil(rate * static_cast<double>(n) - 1e-9));
  k = std::clamp<Index>(k, 1, n);
  std::vector<double> work(dist.data(), dist.data() + n);
  std::nth_element(work.begin(), work.begin() + (k - 1), work.end());
  const double h = work[static_cast<std::size_t>(k - 1)];
  if (!(h > 0.0))
    throw NumericError(
        "acceptance-rate bandwidth is zero (the observed vector is duplicated "
        "in the table at least " + std::to_string(k) +
        " times); set an explicit bandwidth instead");
  return h;
}

//! Kernel weights K(d_i/h), truncated at h for every kernel so the
//! accepted set stays local under the Gaussian kernel too. The returned
//! vector has full length; positive entries are normalized to sum 1 and
//! rejected rows are zero.
inline VectorXd kernel_weights(const Eigen::Ref<const VectorXd>& dist, double h,
                               KernelKind kernel) {
  if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
  VectorXd w(dist.size());
  for (Index i = 0; i < dist.size(); ++i)
    w[i] = dist[i] <= h ? kernel_value(kernel, dist[i] / h) : 0.0;
  const double total = w.sum();
  if (!(total > 0.0))
    throw NumericError("no accepted simulations (all kernel weights are zero)");
  return w / total;
}

//! Output of the rejection step: the accepted weighted sample plus enough
//! bookkeeping to reproduce it.
struct RejectionOutput {
  WeightedSample sample;           // unadjusted accepted theta values
  std::vector<Index> accepted_indices;  // into the source table
  VectorXd distances;              // accepted rows, same order as sample
  double bandwidth = 0.0;
  VectorXd scales;                 // per-statistic standardization factors
};

//! Boxed rejection step: standardize, measure distances, pick h, weight.
inline RejectionOutput reject(const SimulationTable& table,
                              const ObservedSummaries& obs,
                              const RejectionConfig& config) {
  config.validate();
  const StandardizedStats scaled = standardize(table, obs, config.standardization);
  const VectorXd dist = distances(scaled.stats, scaled.obs);
  const double h = config.bandwidth ? *config.bandwidth
                                    : bandwidth_from_rate(dist, *config.acceptance_rate);
  const VectorXd w = kernel_weights(dist, h, config.kernel);

  const Index m = (w.array() > 0.0).count();
  MatrixXd values(m, table.p());
  VectorXd weights(m);
  VectorXd kept_dist(m);
  std::vector<Index> indices;
  indices.reserve(static_cast<std::size_t>(m));
  Index out = 0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) {
      values.row(out) = table.theta.row(i);
      weights[out] = w[i];
      kept_dist[out] = dist[i];
      indices.push_back(i);
      ++out;
    }
  }
  return RejectionOutput{
      WeightedSample::from_normalized(std::move(values), std::move(weights),
                                      SampleLabel::rejection),
      std::move(indices), std::move(kept_dist), h, scaled.scales};
}

//! Accepted rows of the statistic matrix, in original units.
inline MatrixXd accepted_stats(const SimulationTable& table,
                               const RejectionOutput& rejection) {
  MatrixXd out(static_cast<Index>(rejection.accepted_indices.size()), table.q());
  for (std::size_t i = 0; i < rejection.accepted_indices.size(); ++i)
    out.row(static_cast<Index>(i)) = table.stats.row(rejection.accepted_indices[i]);
  return out;
}

}  // namespace abcreg
