#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "abcreg/kernels.hpp"
#include "abcreg/text.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

//! Weighted mean per parameter (weights normalized).
inline VectorXd weighted_mean(const WeightedSample& sample) {
  return sample.values().transpose() * sample.weights();
}

//! Weighted variance per parameter: sum_i w_i (x_i - mean)^2.
inline VectorXd weighted_variance(const WeightedSample& sample) {
  const VectorXd mean = weighted_mean(sample);
  VectorXd var(sample.dim());
  for (Index j = 0; j < sample.dim(); ++j)
    var[j] = (sample.values().col(j).array() - mean[j])
                 .square()
                 .matrix()
                 .dot(sample.weights());
  return var;
}

inline std::pair<VectorXd, VectorXd> weighted_mean_var(const WeightedSample& sample) {
  VectorXd mean = weighted_mean(sample);
  VectorXd var(sample.dim());
  for (Index j = 0; j < sample.dim(); ++j)
    var[j] = (sample.values().col(j).array() - mean[j])
                 .square()
                 .matrix()
                 .dot(sample.weights());
  return {std::move(mean), std::move(var)};
}

//! Effective number of equally weighted draws, 1 / sum w_i^2.
inline double effective_sample_size(const WeightedSample& sample) {
  return 1.0 / sample.weights().squaredNorm();
}

//! Left-continuous weighted empirical quantile: the smallest sample value
//! whose cumulative weight reaches `level`, sorting by value.
inline double weighted_quantile(const WeightedSample& sample, double level,
                                Index parameter) {
  if (!(level > 0.0 && level <= 1.0))
    throw ConfigError("quantile level must lie in (0, 1]");
  if (parameter < 0 || parameter >= sample.dim())
    throw ConfigError("parameter index out of range");
  const Index m = sample.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  const auto& column = sample.values().col(parameter);
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return column[a] < column[b]; });
  double cumulative = 0.0;
  for (Index idx : order) {
    cumulative += sample.weights()[idx];
    if (cumulative >= level) return column[idx];
  }
  return column[order.back()];  // level ~ 1 with rounding shortfall
}

//! Weighted Silverman rule of thumb:
//! h' = 0.9 min(sd_w, IQR_w/1.34) m_eff^(-1/5). Falls back to the weighted
//! sd when the weighted IQR collapses to zero.
inline double kde_bandwidth(const WeightedSample& sample, Index parameter) {
  const VectorXd var = weighted_variance(sample);
  if (parameter < 0 || parameter >= sample.dim())
    throw ConfigError("parameter index out of range");
  const double sd = std::sqrt(var[parameter]);
  // A spread below the floating-point resolution of the sample location is
  // a point mass for all practical purposes; a grid could not resolve it.
  const double center = std::abs(weighted_mean(sample)[parameter]);
  if (!(var[parameter] > 0.0) || sd <= center * 1e-11)
    throw NumericError("degenerate sample; density unavailable");
  const double iqr = weighted_quantile(sample, 0.75, parameter) -
                     weighted_quantile(sample, 0.25, parameter);
  double scale = std::min(sd, iqr / 1.34);
  if (!(scale > 0.0)) scale = sd;
  const double m_eff = effective_sample_size(sample);
  return 0.9 * scale * std::pow(m_eff, -0.2);
}

//! Grid-evaluated weighted kernel density estimate of one marginal
//! posterior, pi(theta_j | s_obs) = sum_i w_i K((theta_i - theta)/h')/h'.
struct PosteriorDensity {
  VectorXd grid;      // strictly increasing, parameter units
  VectorXd density;   // nonnegative
  double bandwidth = 0.0;
  KernelKind kernel = KernelKind::gaussian;
  Index parameter = 0;

  //! Trapezoidal integral over the grid; near 1 when the grid covers the
  //! sample mass plus a 3h' margin.
  double trapezoid_mass() const {
    double total = 0.0;
    for (Index i = 1; i < grid.size(); ++i)
      total += 0.5 * (density[i - 1] + density[i]) * (grid[i] - grid[i - 1]);
    return total;
  }
};

//! Default evaluation grid: 512 equally spaced points covering the sample
//! range plus a 3h' margin on both sides.
inline VectorXd default_grid(const WeightedSample& sample, Index parameter,
                             double bandwidth, Index points = 512) {
  const double lo = sample.values().col(parameter).minCoeff() - 3.0 * bandwidth;
  const double hi = sample.values().col(parameter).maxCoeff() + 3.0 * bandwidth;
  return VectorXd::LinSpaced(points, lo, hi);
}

inline PosteriorDensity weighted_kde(const WeightedSample& sample, Index parameter,
                                     const Eigen::Ref<const VectorXd>& grid,
                                     double bandwidth,
                                     KernelKind kernel = KernelKind::gaussian) {
  if (!(bandwidth > 0.0)) throw ConfigError("density bandwidth must be positive");
  if (parameter < 0 || parameter >= sample.dim())
    throw ConfigError("parameter index out of range");
  for (Index i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ConfigError("density grid must be strictly increasing");
  const auto& column = sample.values().col(parameter);
  // Accumulate in (value, weight) order so the result is bitwise invariant
  // under any permutation of the sample rows.
  std::vector<Index> order(static_cast<std::size_t>(sample.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (column[a] != column[b]) return column[a] < column[b];
    return sample.weights()[a] < sample.weights()[b];
  });
  PosteriorDensity out;
  out.grid = grid;
  out.density = VectorXd::Zero(grid.size());
  for (Index g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (const Index i : order)
      acc += sample.weights()[i] *
             kernel_density_value(kernel, (column[i] - grid[g]) / bandwidth);
    out.density[g] = acc / bandwidth;
  }
  out.bandwidth = bandwidth;
  out.kernel = kernel;
  out.parameter = parameter;
  return out;
}

//! Central credible interval at one level.
struct CredibleInterval {
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

//! Weighted moments, medians and central credible intervals per parameter.
struct PosteriorSummary {
  VectorXd mean;
  VectorXd variance;
  VectorXd median;
  std::vector<std::vector<CredibleInterval>> intervals;  // [parameter][level]
};

inline PosteriorSummary summarize(const WeightedSample& sample,
                                  const std::vector<double>& levels = {0.95}) {
  for (double level : levels)
    if (!(level > 0.0 && level < 1.0))
      throw ConfigError("credible levels must lie in (0, 1)");
  PosteriorSummary out;
  std::tie(out.mean, out.variance) = weighted_mean_var(sample);
  out.median.resize(sample.dim());
  out.intervals.resize(static_cast<std::size_t>(sample.dim()));
  for (Index j = 0; j < sample.dim(); ++j) {
    out.median[j] = weighted_quantile(sample, 0.5, j);
    for (double level : levels) {
      const double tail = 0.5 * (1.0 - level);
      out.intervals[static_cast<std::size_t>(j)].push_back(
          {level, weighted_quantile(sample, tail, j),
           weighted_quantile(sample, 1.0 - tail, j)});
    }
  }
  return out;
}

//! Per-parameter ratio of weighted variances, adjusted over rejection.
//! Linear homoscedastic adjustment keeps this at or below 1.
inline VectorXd shrinkage_ratio(const WeightedSample& adjusted,
                                const WeightedSample& rejection) {
  if (adjusted.dim() != rejection.dim())
    throw DataError("samples have different parameter dimensions");
  const VectorXd var_adj = weighted_variance(adjusted);
  const VectorXd var_rej = weighted_variance(rejection);
  for (Index j = 0; j < var_rej.size(); ++j)
    if (!(var_rej[j] > 0.0))
      throw NumericError("rejection sample has zero variance in parameter " +
                         std::to_string(j + 1));
  return var_adj.array() / var_rej.array();
}

//! Emits a density as two-column delimited text (grid, density).
inline void write_density(std::ostream& out, const PosteriorDensity& density,
                          char delimiter = '\t') {
  std::string buf = "grid";
  buf.push_back(delimiter);
  buf += "density\n";
  for (Index i = 0; i < density.grid.size(); ++i) {
    append_value(buf, density.grid[i]);
    buf.push_back(delimiter);
    append_value(buf, density.density[i]);
    buf.push_back('\n');
  }
  out << buf;
}

//! Emits a summary as key/value rows, one statistic per line.
inline void write_summary(std::ostream& out, const PosteriorSummary& summary,
                          const std::vector<std::string>& param_names,
                          char delimiter = '\t') {
  std::string buf;
  auto emit = [&](const std::string& key, double value) {
    buf += key;
    buf.push_back(delimiter);
    append_value(buf, value);
    buf.push_back('\n');
  };
  for (Index j = 0; j < summary.mean.size(); ++j) {
    const std::string& name = param_names[static_cast<std::size_t>(j)];
    emit("mean_" + name, summary.mean[j]);
    emit("variance_" + name, summary.variance[j]);
    emit("sd_" + name, std::sqrt(summary.variance[j]));
    emit("median_" + name, summary.median[j]);
    for (const CredibleInterval& ci : summary.intervals[static_cast<std::size_t>(j)]) {
      char level_buf[16];
      std::snprintf(level_buf, sizeof(level_buf), "%g", ci.level);
      const std::string tag = level_buf + ("_" + name);
      emit("ci" + tag + "_low", ci.lower);
      emit("ci" + tag + "_high", ci.upper);
    }
  }
  out << buf;
}

}  // namespace abcreg
