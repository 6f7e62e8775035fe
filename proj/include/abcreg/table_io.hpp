#pragma once

#include <algorithm>
#include <cctype>
#include <iostream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "abcreg/text.hpp"
#include "abcreg/types.hpp"

namespace abcreg {

//! How to read a delimited table. The delimiter is auto-detected among
//! comma, tab and semicolon when left at 0. Columns are classified by the
//! `param_` / `stat_` name prefix unless explicit lists are given; explicit
//! lists win.
struct TableFormat {
  char delimiter = 0;  // 0 = auto-detect
  std::vector<std::string> param_columns;
  std::vector<std::string> stat_columns;
};

namespace detail {

inline char detect_delimiter(std::string_view header) {
  constexpr char candidates[] = {',', '\t', ';'};
  char best = ',';
  std::size_t best_fields = 1;
  for (char c : candidates) {
    const std::size_t fields = split(header, c).size();
    if (fields > best_fields) {
      best_fields = fields;
      best = c;
    }
  }
  return best;
}

inline bool getline_any(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

//! Reads a delimited text table with a header row into a SimulationTable.
//! Unclassified columns are skipped with a warning on `warn`.
inline SimulationTable load_table(std::istream& in, const TableFormat& format = {},
                                  std::ostream& warn = std::cerr) {
  std::string header;
  if (!detail::getline_any(in, header) || trim(header).empty())
    throw DataError("table is empty (no header row)");

  const char delim = format.delimiter ? format.delimiter
                                      : detail::detect_delimiter(header);
  std::vector<std::string> names;
  for (std::string_view f : split(header, delim)) names.emplace_back(trim(f));

  const bool explicit_lists =
      !format.param_columns.empty() || !format.stat_columns.empty();

  // Column classification: 0 = skip, 1 = parameter, 2 = statistic.
  std::vector<int> role(names.size(), 0);
  std::vector<std::string> param_names, stat_names;
  std::vector<Index> param_cols, stat_cols;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string& name = names[c];
    if (explicit_lists) {
      if (std::find(format.param_columns.begin(), format.param_columns.end(),
                    name) != format.param_columns.end()) {
        role[c] = 1;
      } else if (std::find(format.stat_columns.begin(), format.stat_columns.end(),
                           name) != format.stat_columns.end()) {
        role[c] = 2;
      }
    } else if (name.rfind("param_", 0) == 0) {
      role[c] = 1;
    } else if (name.rfind("stat_", 0) == 0) {
      role[c] = 2;
    }
    if (role[c] == 1) {
      param_names.push_back(explicit_lists ? name : name.substr(6));
      param_cols.push_back(static_cast<Index>(c));
    } else if (role[c] == 2) {
      stat_names.push_back(explicit_lists ? name : name.substr(5));
      stat_cols.push_back(static_cast<Index>(c));
    } else {
      warn << "warning: ignoring unclassified column '" << name << "'\n";
    }
  }
  if (param_cols.empty()) throw DataError("table has no parameter columns");
  if (stat_cols.empty()) throw DataError("table has no statistic columns");

  std::vector<double> theta_flat, stats_flat;  // row-major
  std::string line;
  Index n = 0;
  while (detail::getline_any(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, delim);
    ++n;
    if (fields.size() != names.size())
      throw DataError("malformed row " + std::to_string(n) + ": expected " +
                      std::to_string(names.size()) + " fields, got " +
                      std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (role[c] == 0) continue;
      double v = 0.0;
      if (!parse_value(trim(fields[c]), v))
        throw DataError("non-numeric value at row " + std::to_string(n) +
                        ", column " + names[c]);
      if (!std::isfinite(v))
        throw DataError("non-finite value at row " + std::to_string(n) +
                        ", column " + names[c]);
      (role[c] == 1 ? theta_flat : stats_flat).push_back(v);
    }
  }
  if (n == 0) throw DataError("table has zero data rows");

  const Index p = static_cast<Index>(param_cols.size());
  const Index q = static_cast<Index>(stat_cols.size());
  MatrixXd theta = Eigen::Map<
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      theta_flat.data(), n, p);
  MatrixXd stats = Eigen::Map<
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      stats_flat.data(), n, q);
  return SimulationTable(std::move(theta), std::move(stats),
                         std::move(param_names), std::move(stat_names));
}

//! Writes a table with `param_`/`stat_` prefixed headers and 17-digit
//! values, so load_table(write_table(t)) reproduces t exactly.
inline void write_table(std::ostream& out, const SimulationTable& table,
                        char delimiter = '\t') {
  std::string buf;
  buf.reserve(static_cast<std::size_t>(table.n()) *
                  static_cast<std::size_t>(table.p() + table.q()) * 26 +
              256);
  for (Index j = 0; j < table.p(); ++j) {
    if (j > 0) buf.push_back(delimiter);
    buf += "param_" + table.param_names[static_cast<std::size_t>(j)];
  }
  for (Index j = 0; j < table.q(); ++j) {
    buf.push_back(delimiter);
    buf += "stat_" + table.stat_names[static_cast<std::size_t>(j)];
  }
  buf.push_back('\n');
  for (Index i = 0; i < table.n(); ++i) {
    for (Index j = 0; j < table.p(); ++j) {
      if (j > 0) buf.push_back(delimiter);
      append_value(buf, table.theta(i, j));
    }
    for (Index j = 0; j < table.q(); ++j) {
      buf.push_back(delimiter);
      append_value(buf, table.stats(i, j));
    }
    buf.push_back('\n');
  }
  out << buf;
}

//! Reads observed statistics: either a one-row table whose statistic
//! columns are matched to `table` by name, or a flat numeric vector
//! (one or more whitespace/delimiter separated values).
inline ObservedSummaries load_observed(std::istream& in,
                                       const SimulationTable& table) {
  std::vector<std::string> lines;
  std::string line;
  while (detail::getline_any(in, line)) {
    if (!trim(line).empty()) lines.push_back(std::string(trim(line)));
  }
  if (lines.empty()) throw DataError("observed file is empty");

  // Flat vector mode: every token on every line parses as a number.
  std::vector<double> flat;
  bool is_flat = true;
  for (const std::string& l : lines) {
    std::string norm = l;
    for (char& c : norm)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::size_t pos = 0;
    while (pos < norm.size() && is_flat) {
      while (pos < norm.size() && norm[pos] == ' ') ++pos;
      if (pos >= norm.size()) break;
      std::size_t end = norm.find(' ', pos);
      if (end == std::string::npos) end = norm.size();
      double v = 0.0;
      if (!parse_value(std::string_view(norm).substr(pos, end - pos), v))
        is_flat = false;
      else
        flat.push_back(v);
      pos = end;
    }
    if (!is_flat) break;
  }
  if (is_flat) {
    VectorXd raw = Eigen::Map<const VectorXd>(flat.data(),
                                              static_cast<Index>(flat.size()));
    return validate_observed(table, raw);
  }

  // One-row table mode: header + single data row; match by statistic name.
  const char delim = detail::detect_delimiter(lines[0]);
  std::vector<std::string> names;
  for (std::string_view f : split(lines[0], delim)) names.emplace_back(trim(f));
  if (lines.size() != 2)
    throw DataError("observed table must have a header and exactly one data row");
  const auto fields = split(lines[1], delim);
  if (fields.size() != names.size())
    throw DataError("observed table header/row field counts differ");

  VectorXd raw(table.q());
  std::vector<bool> found(static_cast<std::size_t>(table.q()), false);
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::string name = names[c];
    if (name.rfind("stat_", 0) == 0) name = name.substr(5);
    const auto it = std::find(table.stat_names.begin(), table.stat_names.end(), name);
    if (it == table.stat_names.end()) continue;
    const auto j = static_cast<std::size_t>(it - table.stat_names.begin());
    double v = 0.0;
    if (!parse_value(trim(fields[c]), v))
      throw DataError("non-numeric observed value in column " + names[c]);
    raw[static_cast<Index>(j)] = v;
    found[j] = true;
  }
  for (std::size_t j = 0; j < found.size(); ++j) {
    if (!found[j])
      throw DataError("observed table is missing statistic '" +
                      table.stat_names[j] + "'");
  }
  return validate_observed(table, raw);
}

}  // namespace abcreg
