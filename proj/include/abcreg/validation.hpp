#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "abcreg/pipeline.hpp"
#include "abcreg/posterior.hpp"
#include "abcreg/text.hpp"
#include "abcreg/toy_models.hpp"

namespace abcreg {

namespace detail {

//! Compensated (Kahan) mean; the cross-validation scores average many
//! small squared errors and plain accumulation loses digits.
inline double kahan_mean(const Eigen::Ref<const VectorXd>& xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (Index i = 0; i < xs.size(); ++i) {
    const double y = xs[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(xs.size());
}

}  // namespace detail

//! Standard error of the mean of `values` by nonparametric bootstrap.
//! Identical (seed, size, replicates) triples reuse the same resampled
//! index sequence, which is what makes per-method errors comparable when
//! several methods are bootstrapped on the same evaluation points.
inline double bootstrap_se(const Eigen::Ref<const VectorXd>& values, int replicates,
                           std::uint64_t seed) {
  if (replicates < 100)
    throw ConfigError("bootstrap needs at least 100 replicates, got " +
                      std::to_string(replicates));
  const Index n = values.size();
  if (n < 2)
    throw DataError("bootstrap needs at least two evaluation points, got " +
                    std::to_string(n));
  Rng rng(seed);
  VectorXd means(replicates);
  for (int b = 0; b < replicates; ++b) {
    double sum = 0.0;
    double carry = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double y = values[static_cast<Index>(rng.uniform_below(
                           static_cast<std::uint64_t>(n)))] -
                       carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    means[b] = sum / static_cast<double>(n);
  }
  const double center = means.mean();
  return std::sqrt((means.array() - center).square().sum() /
                   static_cast<double>(replicates - 1));
}

//! Leave-n-out cross-validation settings.
struct CvConfig {
  Index n_holdout = 100;         // rows scored as pseudo-observations
  int bootstrap_replicates = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_holdout < 1)
      throw ConfigError("holdout size must be positive, got " +
                        std::to_string(n_holdout));
    if (bootstrap_replicates < 100)
      throw ConfigError("bootstrap needs at least 100 replicates, got " +
                        std::to_string(bootstrap_replicates));
  }
};

//! Cross-validation score for one method.
struct CvMethodResult {
  std::string name;
  double error = 0.0;  // mean prior-scaled squared estimation error
  double se = 0.0;     // bootstrap standard error of `error`
};

struct CvReport {
  std::vector<CvMethodResult> methods;
  std::vector<Index> holdout;          // rows drawn as pseudo-observations
  std::vector<std::string> failures;   // human-readable skip reasons
  Index n_evaluated = 0;               // rows scored for every method
  MatrixXd per_point;                  // n_evaluated x methods squared errors

  Index n_failed() const { return static_cast<Index>(failures.size()); }
};

//! Estimates the prediction error of each configured method by treating
//! `n_holdout` random table rows as pseudo-observed data sets. Held-out
//! rows are removed from the reference table once (shared by every
//! pseudo-observation), point estimates are posterior means, and errors
//! are squared differences scaled by the prior standard deviation of each
//! parameter so that parameters on different scales contribute evenly.
//! A row where any method fails (for example an empty acceptance set) is
//! excluded for all methods, keeping the comparison paired.
inline CvReport cross_validate(const SimulationTable& table,
                               const std::vector<InferenceConfig>& configs,
                               const CvConfig& cv) {
  cv.validate();
  if (configs.empty()) throw ConfigError("cross-validation needs at least one method");
  for (const InferenceConfig& config : configs) config.validate(table.p());
  const Index n = table.n();
  const Index p = table.p();
  if (cv.n_holdout >= n)
    throw ConfigError("holdout size " + std::to_string(cv.n_holdout) +
                      " must be smaller than the table (" + std::to_string(n) +
                      " rows)");

  // Prior scale per parameter, from the full set of prior draws.
  VectorXd scale(p);
  for (Index j = 0; j < p; ++j) {
    scale[j] = column_sd(table.theta.col(j));
    if (scale[j] <= 0.0)
      throw DataError("parameter '" + table.param_names[static_cast<std::size_t>(j)] +
                      "' is constant across the table; scaled errors are undefined");
  }

  // Draw the holdout rows by partial Fisher-Yates shuffle.
  CvReport report;
  {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(substream_seed(cv.seed, 0));
    for (Index i = 0; i < cv.n_holdout; ++i) {
      const Index j =
          i + static_cast<Index>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    report.holdout.assign(order.begin(), order.begin() + cv.n_holdout);
  }

  // Reference table without the held-out rows, shared by all evaluations.
  std::vector<bool> held(static_cast<std::size_t>(n), false);
  for (const Index r : report.holdout) held[static_cast<std::size_t>(r)] = true;
  const Index n_ref = n - cv.n_holdout;
  MatrixXd theta_ref(n_ref, p);
  MatrixXd stats_ref(n_ref, table.q());
  for (Index i = 0, k = 0; i < n; ++i) {
    if (held[static_cast<std::size_t>(i)]) continue;
    theta_ref.row(k) = table.theta.row(i);
    stats_ref.row(k) = table.stats.row(i);
    ++k;
  }
  const SimulationTable reference(std::move(theta_ref), std::move(stats_ref),
                                  table.param_names, table.stat_names);

  // Methods sharing a rejection configuration reuse one rejection pass.
  const auto n_methods = configs.size();
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t m = 0; m < n_methods; ++m) {
    bool placed = false;
    for (std::vector<std::size_t>& group : groups) {
      if (configs[group.front()].rejection == configs[m].rejection) {
        group.push_back(m);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({m});
  }

  MatrixXd errors(cv.n_holdout, static_cast<Index>(n_methods));
  Index n_eval = 0;
  for (const Index row : report.holdout) {
    const ObservedSummaries obs{table.stats.row(row).transpose()};
    VectorXd row_errors(static_cast<Index>(n_methods));
    bool ok = true;
    std::string failure;
    for (const std::vector<std::size_t>& group : groups) {
      try {
        const RejectionOutput shared =
            reject(reference, obs, configs[group.front()].rejection);
        for (const std::size_t m : group) {
          const InferenceResult result =
              finish_inference(reference, obs, configs[m], shared);
          const VectorXd estimate = weighted_mean(result.posterior_sample());
          row_errors[static_cast<Index>(m)] =
              ((estimate - table.theta.row(row).transpose()).array() / scale.array())
                  .square()
                  .sum();
        }
      } catch (const DataError& e) {
        ok = false;
        failure = e.what();
      } catch (const NumericError& e) {
        ok = false;
        failure = e.what();
      }
      if (!ok) break;
    }
    if (ok) {
      errors.row(n_eval++) = row_errors.transpose();
    } else {
      report.failures.push_back("row " + std::to_string(row) + ": " + failure);
    }
  }
  if (n_eval < 2)
    throw DataError("fewer than two held-out rows could be evaluated; "
                    "increase the holdout size or the acceptance rate");

  report.n_evaluated = n_eval;
  report.per_point = errors.topRows(n_eval);
  const std::uint64_t boot_seed = substream_seed(cv.seed, 1);
  for (std::size_t m = 0; m < n_methods; ++m) {
    CvMethodResult res;
    res.name = configs[m].name;
    res.error = detail::kahan_mean(report.per_point.col(static_cast<Index>(m)));
    res.se = bootstrap_se(report.per_point.col(static_cast<Index>(m)),
                          cv.bootstrap_replicates, boot_seed);
    report.methods.push_back(std::move(res));
  }
  return report;
}

//! One cell of a simulation study: estimator accuracy at a given table
//! size and statistic dimension.
struct MseRow {
  Index n = 0;
  Index q = 0;
  std::string method;
  double mse = 0.0;  // mean squared error against the analytic posterior mean
  double se = 0.0;   // standard error of that mean over replicates
};

struct MseStudyConfig {
  ToySpec base;                    // conjugate family template; q varies below
  std::vector<Index> n_values;     // table sizes
  std::vector<Index> q_values;     // statistic dimensions (1 = no noise stats)
  std::vector<InferenceConfig> methods;
  int replicates = 50;
  std::uint64_t seed = 0;

  void validate() const {
    base.validate();
    if (base.id == ToyId::hetero_scale)
      throw ConfigError("the accuracy study needs an analytic posterior; "
                        "hetero_scale has none");
    if (n_values.empty()) throw ConfigError("study needs at least one table size");
    if (q_values.empty())
      throw ConfigError("study needs at least one statistic dimension");
    for (const Index q : q_values)
      if (q < 1)
        throw ConfigError("statistic dimension must be positive, got " +
                          std::to_string(q));
    if (methods.empty()) throw ConfigError("study needs at least one method");
    if (replicates < 2)
      throw ConfigError("study needs at least two replicates, got " +
                        std::to_string(replicates));
  }
};

//! Monte Carlo accuracy study on the conjugate toy family. For every
//! (table size, statistic dimension) pair it simulates fresh tables,
//! runs each method on the same tables, and scores the posterior-mean
//! estimate against the analytic posterior mean. With q > 1 the extra
//! dimensions are pure noise statistics, so growing q isolates the cost
//! of uninformative summaries.
inline std::vector<MseRow> mse_study(const MseStudyConfig& study) {
  study.validate();
  for (const InferenceConfig& config : study.methods) config.validate(1);
  const auto n_q = study.q_values.size();
  const auto n_rep = static_cast<std::size_t>(study.replicates);
  std::vector<MseRow> rows;
  for (std::size_t ni = 0; ni < study.n_values.size(); ++ni) {
    for (std::size_t qi = 0; qi < n_q; ++qi) {
      const Index q = study.q_values[qi];
      ToySpec spec = study.base;
      spec.id = (q == 1) ? ToyId::gaussian_conjugate : ToyId::linear_gaussian_multi;
      spec.noise_stats = q - 1;

      MatrixXd sq_err(study.replicates, static_cast<Index>(study.methods.size()));
      for (std::size_t r = 0; r < n_rep; ++r) {
        spec.seed = substream_seed(study.seed, (ni * n_q + qi) * n_rep + r);
        const ToyData data = simulate(spec, study.n_values[ni]);
        const AnalyticPosterior truth = analytic_posterior(spec, data.observed.s_obs);
        for (std::size_t m = 0; m < study.methods.size(); ++m) {
          const InferenceResult result =
              run_inference(data.table, data.observed, study.methods[m]);
          const double estimate = weighted_mean(result.posterior_sample())[0];
          const double diff = estimate - truth.mean;
          sq_err(static_cast<Index>(r), static_cast<Index>(m)) = diff * diff;
        }
      }
      for (std::size_t m = 0; m < study.methods.size(); ++m) {
        MseRow row;
        row.n = study.n_values[ni];
        row.q = q;
        row.method = study.methods[m].name;
        row.mse = detail::kahan_mean(sq_err.col(static_cast<Index>(m)));
        const double sd = std::sqrt(
            (sq_err.col(static_cast<Index>(m)).array() - row.mse).square().sum() /
            static_cast<double>(study.replicates - 1));
        row.se = sd / std::sqrt(static_cast<double>(study.replicates));
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

//! Tab-separated cross-validation report, one row per method. bar_low and
//! bar_high are the two-standard-deviation error bars around the estimate.
inline void write_cv_report(std::ostream& out, const CvReport& report) {
  out << "method\terror\tse\tbar_low\tbar_high\tn_evaluated\tn_failed\n";
  for (const CvMethodResult& res : report.methods) {
    out << res.name << '\t' << format_value(res.error) << '\t'
        << format_value(res.se) << '\t' << format_value(res.error - 2.0 * res.se)
        << '\t' << format_value(res.error + 2.0 * res.se) << '\t'
        << report.n_evaluated << '\t' << report.n_failed() << '\n';
  }
}

//! Tab-separated accuracy-study table, one row per (n, q, method) cell.
inline void write_mse_table(std::ostream& out, const std::vector<MseRow>& rows) {
  out << "n\tq\tmethod\tmse\tse\n";
  for (const MseRow& row : rows) {
    out << row.n << '\t' << row.q << '\t' << row.method << '\t'
        << format_value(row.mse) << '\t' << format_value(row.se) << '\n';
  }
}

}  // namespace abcreg
