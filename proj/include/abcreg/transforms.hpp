#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "abcreg/text.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

enum class TransformKind { none, log, logit };

//! Per-parameter transform applied around the regression, keeping adjusted
//! values inside the prior support.
struct Transform {
  TransformKind kind = TransformKind::none;
  double lower = 0.0;  // logit only
  double upper = 0.0;  // logit only

  static Transform identity() { return {}; }
  static Transform log_scale() { return {TransformKind::log, 0.0, 0.0}; }
  static Transform logit(double lower, double upper) {
    if (!(lower < upper))
      throw ConfigError("logit transform requires lower < upper");
    return {TransformKind::logit, lower, upper};
  }
};

//! Transform specification for all parameters. Empty means identity
//! everywhere.
struct TransformSpec {
  std::vector<Transform> per_parameter;

  bool is_identity() const {
    for (const Transform& t : per_parameter)
      if (t.kind != TransformKind::none) return false;
    return true;
  }

  const Transform& at(Index j) const {
    static const Transform ident{};
    if (per_parameter.empty()) return ident;
    return per_parameter[static_cast<std::size_t>(j)];
  }

  void validate(Index p) const {
    if (!per_parameter.empty() &&
        per_parameter.size() != static_cast<std::size_t>(p))
      throw ConfigError("transform count does not match parameter count");
  }
};

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

//! Forward transform: phi = log(theta), phi = log((theta-l)/(u-theta)) or
//! identity, per coordinate. Values outside the open support raise a
//! DataError naming the row and column.
inline MatrixXd transform_forward(const Eigen::Ref<const MatrixXd>& theta,
                                  const TransformSpec& spec) {
  spec.validate(theta.cols());
  MatrixXd phi(theta.rows(), theta.cols());
  for (Index j = 0; j < theta.cols(); ++j) {
    const Transform& t = spec.at(j);
    for (Index i = 0; i < theta.rows(); ++i) {
      const double x = theta(i, j);
      switch (t.kind) {
        case TransformKind::none:
          phi(i, j) = x;
          break;
        case TransformKind::log:
          if (!(x > 0.0))
            throw DataError("log transform requires positive values (row " +
                            std::to_string(i + 1) + ", column " +
                            std::to_string(j + 1) + ")");
          phi(i, j) = std::log(x);
          break;
        case TransformKind::logit:
          if (!(x > t.lower && x < t.upper))
            throw DataError("logit transform requires values in (" +
                            std::to_string(t.lower) + ", " + std::to_string(t.upper) +
                            ") (row " + std::to_string(i + 1) + ", column " +
                            std::to_string(j + 1) + ")");
          phi(i, j) = std::log((x - t.lower) / (t.upper - x));
          break;
      }
    }
  }
  return phi;
}

//! Back transform; exact inverse of transform_forward on its range.
//! Overflowing values saturate just inside the open support, so outputs
//! always lie strictly within it.
inline MatrixXd transform_back(const Eigen::Ref<const MatrixXd>& phi,
                               const TransformSpec& spec) {
  spec.validate(phi.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  MatrixXd theta(phi.rows(), phi.cols());
  for (Index j = 0; j < phi.cols(); ++j) {
    const Transform& t = spec.at(j);
    for (Index i = 0; i < phi.rows(); ++i) {
      const double x = phi(i, j);
      switch (t.kind) {
        case TransformKind::none:
          theta(i, j) = x;
          break;
        case TransformKind::log: {
          double v = std::exp(x);
          v = std::clamp(v, std::numeric_limits<double>::min(),
                         std::numeric_limits<double>::max());
          theta(i, j) = v;
          break;
        }
        case TransformKind::logit: {
          double v = t.lower + (t.upper - t.lower) * detail::sigmoid(x);
          v = std::clamp(v, std::nextafter(t.lower, inf),
                         std::nextafter(t.upper, -inf));
          theta(i, j) = v;
          break;
        }
      }
    }
  }
  return theta;
}

inline std::string to_string(const Transform& t) {
  switch (t.kind) {
    case TransformKind::none: return "none";
    case TransformKind::log: return "log";
    case TransformKind::logit:
      return "logit:" + format_value(t.lower) + ":" + format_value(t.upper);
  }
  return "?";
}

//! Parses "none", "log" or "logit:<lower>:<upper>".
inline Transform parse_transform(std::string_view token) {
  if (token == "none") return Transform::identity();
  if (token == "log") return Transform::log_scale();
  if (token.rfind("logit", 0) == 0) {
    const std::string s(token);
    const std::size_t a = s.find(':');
    const std::size_t b = a == std::string::npos ? a : s.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ConfigError("logit transform needs bounds: logit:<lower>:<upper>");
    try {
      const double lower = std::stod(s.substr(a + 1, b - a - 1));
      const double upper = std::stod(s.substr(b + 1));
      return Transform::logit(lower, upper);
    } catch (const std::logic_error&) {
      throw ConfigError("could not parse logit bounds in '" + s + "'");
    }
  }
  throw ConfigError("unknown transform '" + std::string(token) + "'");
}

}  // namespace abcreg
