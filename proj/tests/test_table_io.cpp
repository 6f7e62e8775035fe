#include <doctest.h>

#include <random>
#include <sstream>
#include <string>

#include "abcreg/table_io.hpp"

using namespace abcreg;

namespace {

SimulationTable load_from(const std::string& text, const TableFormat& format = {},
                          std::ostream* warn = nullptr) {
  std::istringstream in(text);
  std::ostringstream sink;
  return load_table(in, format, warn ? *warn : sink);
}

}  // namespace

TEST_CASE("comma table with prefixes parses into the right shape") {
  const SimulationTable table =
      load_from("param_p,stat_a,stat_b\n1,2,3\n4,5,6\n");
  CHECK(table.n() == 2);
  CHECK(table.p() == 1);
  CHECK(table.q() == 2);
  CHECK(table.param_names == std::vector<std::string>{"p"});
  CHECK(table.stat_names == std::vector<std::string>{"a", "b"});
  CHECK(table.theta(1, 0) == 4.0);
  CHECK(table.stats(0, 1) == 3.0);
}

TEST_CASE("semicolon and tab delimiters are auto-detected") {
  const SimulationTable semi = load_from("param_x;stat_y\n1;2\n");
  CHECK(semi.stats(0, 0) == 2.0);
  const SimulationTable tab = load_from("param_x\tstat_y\n1\t2\n");
  CHECK(tab.stats(0, 0) == 2.0);
}

TEST_CASE("explicit delimiter override wins over detection") {
  TableFormat format;
  format.delimiter = ';';
  const SimulationTable table = load_from("param_x;stat_y\n1;2\n", format);
  CHECK(table.theta(0, 0) == 1.0);
}

TEST_CASE("explicit column lists take names as-is") {
  TableFormat format;
  format.param_columns = {"a"};
  format.stat_columns = {"b", "c"};
  const SimulationTable table = load_from("a,b,c\n1,2,3\n", format);
  CHECK(table.p() == 1);
  CHECK(table.q() == 2);
  CHECK(table.param_names == std::vector<std::string>{"a"});
  CHECK(table.stat_names == std::vector<std::string>{"b", "c"});
}

TEST_CASE("unclassified columns are skipped with a warning") {
  std::ostringstream warn;
  const SimulationTable table =
      load_from("param_p,junk,stat_s\n1,9,2\n", {}, &warn);
  CHECK(table.p() == 1);
  CHECK(table.q() == 1);
  CHECK(warn.str().find("junk") != std::string::npos);
}

TEST_CASE("load_table errors carry row and column details") {
  CHECK_THROWS_WITH_AS(load_from(""), "table is empty (no header row)", DataError);
  CHECK_THROWS_AS(load_from("param_p,stat_s\n"), DataError);  // zero rows
  CHECK_THROWS_WITH_AS(load_from("param_p,stat_s\n1,2\n3\n"),
                       "malformed row 2: expected 2 fields, got 1", DataError);
  CHECK_THROWS_WITH_AS(load_from("param_p,stat_s\n1,x\n"),
                       "non-numeric value at row 1, column stat_s", DataError);
  CHECK_THROWS_WITH_AS(load_from("param_p,stat_s\n1,NaN\n"),
                       "non-finite value at row 1, column stat_s", DataError);
  CHECK_THROWS_WITH_AS(load_from("param_p,stat_s\n1,inf\n"),
                       "non-finite value at row 1, column stat_s", DataError);
  CHECK_THROWS_AS(load_from("stat_a,stat_b\n1,2\n"), DataError);  // no params
  CHECK_THROWS_AS(load_from("param_a,param_b\n1,2\n"), DataError);  // no stats
}

TEST_CASE("write then load reproduces values and names exactly") {
  std::mt19937 gen(123);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  const Index n = 500;
  MatrixXd theta(n, 2);
  MatrixXd stats(n, 3);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 2; ++j) theta(i, j) = dist(gen) * std::pow(10.0, j - 3);
    for (Index j = 0; j < 3; ++j) stats(i, j) = dist(gen) * std::pow(10.0, -j);
  }
  const SimulationTable table(theta, stats, {"a", "b"}, {"x", "y", "z"});

  std::ostringstream out;
  write_table(out, table);
  const SimulationTable back = load_from(out.str());
  CHECK(back.theta == table.theta);  // bitwise, thanks to 17-digit output
  CHECK(back.stats == table.stats);
  CHECK(back.param_names == table.param_names);
  CHECK(back.stat_names == table.stat_names);
}

TEST_CASE("a million-row table loads and round-trips bit-identically") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  const Index n = 1000000;
  MatrixXd theta(n, 1);
  MatrixXd stats(n, 2);
  for (Index i = 0; i < n; ++i) {
    theta(i, 0) = dist(gen);
    stats(i, 0) = dist(gen);
    stats(i, 1) = dist(gen);
  }
  const SimulationTable table(theta, stats, {"t"}, {"u", "v"});
  std::ostringstream out;
  write_table(out, table);
  const SimulationTable back = load_from(out.str());
  CHECK(back.theta == table.theta);
  CHECK(back.stats == table.stats);
}

TEST_CASE("write_table emits prefixed headers") {
  MatrixXd theta(1, 1);
  theta << 1.0;
  MatrixXd stats(1, 1);
  stats << 2.0;
  const SimulationTable table(theta, stats, {"t"}, {"s"});
  std::ostringstream out;
  write_table(out, table);
  CHECK(out.str().rfind("param_t\tstat_s\n", 0) == 0);
}

TEST_CASE("observed files parse in flat-vector mode") {
  const SimulationTable table = load_from("param_p,stat_a,stat_b\n1,2,3\n4,5,6\n");
  std::istringstream flat("0.5 1.5\n");
  const ObservedSummaries obs = load_observed(flat, table);
  CHECK(obs.s_obs[0] == 0.5);
  CHECK(obs.s_obs[1] == 1.5);

  std::istringstream lines("0.5\n1.5\n");
  CHECK(load_observed(lines, table).s_obs[1] == 1.5);

  std::istringstream wrong("0.5 1.5 2.5\n");
  CHECK_THROWS_AS(load_observed(wrong, table), DataError);
}

TEST_CASE("observed tables are matched to statistics by name") {
  const SimulationTable table = load_from("param_p,stat_a,stat_b\n1,2,3\n4,5,6\n");
  std::istringstream reordered("stat_b\tstat_a\n9\t8\n");
  const ObservedSummaries obs = load_observed(reordered, table);
  CHECK(obs.s_obs[0] == 8.0);  // table order a, b
  CHECK(obs.s_obs[1] == 9.0);

  std::istringstream missing("stat_a\n1\n");
  CHECK_THROWS_AS(load_observed(missing, table), DataError);

  std::istringstream empty("");
  CHECK_THROWS_AS(load_observed(empty, table), DataError);
}
