#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "abcreg/errors.hpp"

namespace abcreg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

//! Reference table of simulated (parameter, summary statistic) pairs.
//! Row i of `theta` and row i of `stats` come from the same simulation.
//! Immutable after construction; all entries finite.
struct SimulationTable {
  MatrixXd theta;                        // n x p, parameter draws
  MatrixXd stats;                        // n x q, summary statistics
  std::vector<std::string> param_names;  // p labels (prefix stripped)
  std::vector<std::string> stat_names;   // q labels (prefix stripped)

  SimulationTable(MatrixXd theta_in, MatrixXd stats_in,
                  std::vector<std::string> param_names_in,
                  std::vector<std::string> stat_names_in)
      : theta(std::move(theta_in)),
        stats(std::move(stats_in)),
        param_names(std::move(param_names_in)),
        stat_names(std::move(stat_names_in)) {
    if (theta.rows() < 1) throw DataError("simulation table has zero data rows");
    if (theta.cols() < 1) throw DataError("simulation table has no parameter columns");
    if (stats.cols() < 1) throw DataError("simulation table has no statistic columns");
    if (theta.rows() != stats.rows())
      throw DataError("parameter and statistic row counts differ");
    if (param_names.size() != static_cast<std::size_t>(theta.cols()))
      throw DataError("parameter name count does not match columns");
    if (stat_names.size() != static_cast<std::size_t>(stats.cols()))
      throw DataError("statistic name count does not match columns");
    if (!theta.allFinite() || !stats.allFinite())
      throw DataError("simulation table contains non-finite values");
  }

  Index n() const { return theta.rows(); }
  Index p() const { return theta.cols(); }
  Index q() const { return stats.cols(); }
};

//! Observed summary statistics, same units and order as the table's
//! statistic columns.
struct ObservedSummaries {
  VectorXd s_obs;
};

//! Checks a raw observed vector against a table: length q, finite entries.
inline ObservedSummaries validate_observed(const SimulationTable& table,
                                           const VectorXd& raw) {
  if (raw.size() != table.q())
    throw DataError("observed vector has length " + std::to_string(raw.size()) +
                    " but the table has " + std::to_string(table.q()) +
                    " statistics");
  for (Index j = 0; j < raw.size(); ++j) {
    if (!std::isfinite(raw[j]))
      throw DataError("observed vector has a non-finite entry at position " +
                      std::to_string(j + 1));
  }
  return ObservedSummaries{raw};
}

//! Provenance of a weighted sample.
enum class SampleLabel { rejection, homoscedastic, heteroscedastic };

inline const char* to_string(SampleLabel label) {
  switch (label) {
    case SampleLabel::rejection: return "rejection";
    case SampleLabel::homoscedastic: return "homoscedastic";
    case SampleLabel::heteroscedastic: return "heteroscedastic";
  }
  return "?";
}

//! Parameter draws with positive normalized weights; the carrier between
//! rejection, adjustment and posterior summaries. Rows are the accepted
//! simulations only, so every stored weight is strictly positive.
class WeightedSample {
 public:
  //! Builds from raw (unnormalized) weights. Rows with zero weight are
  //! dropped, the rest are normalized to sum 1, so the stored sample holds
  //! exactly the accepted simulations.
  WeightedSample(MatrixXd values, VectorXd weights, SampleLabel label)
      : values_(std::move(values)), weights_(std::move(weights)), label_(label) {
    if (values_.rows() != weights_.size())
      throw DataError("weight count does not match sample rows");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!std::isfinite(weights_[i]) || weights_[i] < 0.0)
        throw DataError("weights must be finite and nonnegative (row " +
                        std::to_string(i + 1) + ")");
    }
    const Index kept = (weights_.array() > 0.0).count();
    if (kept == 0)
      throw DataError("weighted sample needs at least one positive weight");
    if (kept != weights_.size()) {
      MatrixXd v(kept, values_.cols());
      VectorXd w(kept);
      Index out = 0;
      for (Index i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) {
          v.row(out) = values_.row(i);
          w[out] = weights_[i];
          ++out;
        }
      }
      values_ = std::move(v);
      weights_ = std::move(w);
    }
    validate_shapes();
    weights_ /= weights_.sum();
  }

  //! Builds from weights that already sum to 1; the weights are stored
  //! verbatim so adjustment can pass them through bit-exactly.
  static WeightedSample from_normalized(MatrixXd values, VectorXd weights,
                                        SampleLabel label) {
    WeightedSample out(private_tag{}, std::move(values), std::move(weights), label);
    out.validate_shapes();
    if (std::abs(out.weights_.sum() - 1.0) > 1e-12)
      throw DataError("weights expected to be normalized to sum 1");
    return out;
  }

  const MatrixXd& values() const { return values_; }
  const VectorXd& weights() const { return weights_; }
  SampleLabel label() const { return label_; }
  Index size() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }

 private:
  struct private_tag {};
  WeightedSample(private_tag, MatrixXd values, VectorXd weights, SampleLabel label)
      : values_(std::move(values)), weights_(std::move(weights)), label_(label) {}

  void validate_shapes() const {
    if (values_.rows() < 1) throw DataError("weighted sample is empty");
    if (values_.rows() != weights_.size())
      throw DataError("weight count does not match sample rows");
    if (!values_.allFinite()) throw DataError("weighted sample has non-finite values");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
        throw DataError("weighted sample requires finite positive weights (row " +
                        std::to_string(i + 1) + ")");
    }
  }

  MatrixXd values_;
  VectorXd weights_;
  SampleLabel label_;
};

}  // namespace abcreg
