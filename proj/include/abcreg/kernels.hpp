#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "abcreg/errors.hpp"

namespace abcreg {

//! Univariate statistical kernels. Each K satisfies K(u) >= 0 and is
//! nonincreasing in |u|.
enum class KernelKind { uniform, epanechnikov, gaussian };

//! Kernel value used for rejection weights: K(u) up to proportionality.
//! uniform 1{|u|<=1}, Epanechnikov (3/4)(1-u^2) 1{|u|<=1},
//! Gaussian exp(-u^2/2).
inline double kernel_value(KernelKind kind, double u) {
  const double a = std::abs(u);
  switch (kind) {
    case KernelKind::uniform:
      return a <= 1.0 ? 1.0 : 0.0;
    case KernelKind::epanechnikov:
      return a <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u);
  }
  return 0.0;
}

//! Kernel normalized to integrate to 1, for density estimation.
inline double kernel_density_value(KernelKind kind, double u) {
  const double a = std::abs(u);
  switch (kind) {
    case KernelKind::uniform:
      return a <= 1.0 ? 0.5 : 0.0;
    case KernelKind::epanechnikov:
      return a <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  }
  return 0.0;
}

inline const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::uniform: return "uniform";
    case KernelKind::epanechnikov: return "epanechnikov";
    case KernelKind::gaussian: return "gaussian";
  }
  return "?";
}

inline KernelKind parse_kernel(std::string_view name) {
  if (name == "uniform") return KernelKind::uniform;
  if (name == "epanechnikov") return KernelKind::epanechnikov;
  if (name == "gaussian") return KernelKind::gaussian;
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

}  // namespace abcreg
