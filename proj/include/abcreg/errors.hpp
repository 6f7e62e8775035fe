#pragma once

#include <stdexcept>
#include <string>

namespace abcreg {

//! Invalid configuration (bad rates, incompatible options, unknown names).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

//! Invalid or degenerate input data (parse failures, dimension mismatches,
//! values outside a declared support).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

//! Numerical failure at run time (empty acceptance, zero bandwidth,
//! non-finite losses, degenerate samples).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace abcreg
