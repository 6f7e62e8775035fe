#include <doctest.h>

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "abcreg/regression.hpp"
#include "oracles.hpp"

using namespace abcreg;

namespace {

struct FitData {
  MatrixXd stats;
  MatrixXd theta;
  VectorXd weights;
};

FitData random_fit_data(Index m, Index q, Index p, unsigned seed,
                        bool random_weights) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  std::uniform_real_distribution<double> wdist(0.1, 1.0);
  FitData data;
  data.stats = MatrixXd(m, q);
  data.theta = MatrixXd(m, p);
  data.weights = VectorXd(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < q; ++j) data.stats(i, j) = dist(gen);
    for (Index j = 0; j < p; ++j) data.theta(i, j) = dist(gen);
    data.weights[i] = random_weights ? wdist(gen) : 1.0;
  }
  return data;
}

}  // namespace

TEST_CASE("an exact affine relation is recovered with zero residuals") {
  const Index m = 30;
  MatrixXd stats(m, 1);
  MatrixXd theta(m, 1);
  std::mt19937 gen(11);
  std::normal_distribution<double> dist;
  for (Index i = 0; i < m; ++i) {
    stats(i, 0) = dist(gen);
    theta(i, 0) = 2.0 + 3.0 * stats(i, 0);
  }
  const VectorXd weights = VectorXd::Ones(m);
  const RegressionModel model = fit_wls_linear(stats, theta, weights);
  const auto [alpha, beta] = model.coefficients_raw();  // beta is (stat, param)
  CHECK(alpha[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(beta(0, 0) == doctest::Approx(3.0).epsilon(1e-10));
  const MatrixXd residuals = theta - model.predict(stats);
  CHECK(residuals.array().abs().maxCoeff() <= 1e-10);
}

TEST_CASE("weighted fit matches the normal equations solved independently") {
  for (const bool random_weights : {false, true}) {
    const FitData data = random_fit_data(50, 3, 2, random_weights ? 21 : 20,
                                         random_weights);
    const RegressionModel model =
        fit_wls_linear(data.stats, data.theta, data.weights);
    const auto [alpha, beta] = model.coefficients_raw();
    const VectorXd w = data.weights / data.weights.sum();
    const auto [oracle_alpha, oracle_beta] =
        oracle::wls_normal_equations(data.stats, data.theta, w);
    CHECK((alpha - oracle_alpha).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((beta.transpose() - oracle_beta).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("the weighted residuals of a linear fit average to zero") {
  const FitData data = random_fit_data(80, 4, 2, 22, true);
  const RegressionModel model =
      fit_wls_linear(data.stats, data.theta, data.weights);
  const MatrixXd residuals = data.theta - model.predict(data.stats);
  const VectorXd w = data.weights / data.weights.sum();
  const VectorXd means = residuals.transpose() * w;
  CHECK(means.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("linear fits are equivariant under affine response maps") {
  const FitData data = random_fit_data(60, 2, 1, 23, true);
  const RegressionModel base =
      fit_wls_linear(data.stats, data.theta, data.weights);
  const double a = -2.5, b = 0.7;
  const MatrixXd mapped_theta = (a * data.theta).array() + b;
  const RegressionModel mapped =
      fit_wls_linear(data.stats, mapped_theta, data.weights);
  MatrixXd probe(3, 2);
  probe << 0.0, 0.0, 1.0, -1.0, 0.3, 2.0;
  const MatrixXd lhs = mapped.predict(probe);
  const MatrixXd rhs = (a * base.predict(probe)).array() + b;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * std::abs(a) * 10);
}

TEST_CASE("collinear statistics make the plain fit fail with advice") {
  FitData data = random_fit_data(40, 2, 1, 24, false);
  MatrixXd stats(40, 3);
  stats.leftCols(2) = data.stats;
  stats.col(2) = data.stats.col(0);  // exact duplicate
  try {
    fit_wls_linear(stats, data.theta, data.weights);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("ridge") != std::string::npos);
  }
}

TEST_CASE("too few rows for the linear fit is an error") {
  const FitData data = random_fit_data(4, 3, 1, 25, false);  // need q+2 = 5
  CHECK_THROWS_AS(fit_wls_linear(data.stats, data.theta, data.weights), DataError);
}

TEST_CASE("fit input validation catches mismatched or bad weights") {
  const FitData data = random_fit_data(10, 2, 1, 26, false);
  VectorXd short_weights = VectorXd::Ones(9);
  CHECK_THROWS_AS(fit_wls_linear(data.stats, data.theta, short_weights), DataError);
  VectorXd zero_weights = VectorXd::Zero(10);
  CHECK_THROWS_AS(fit_wls_linear(data.stats, data.theta, zero_weights), DataError);
}

TEST_CASE("ridge with zero penalty reduces to the plain fit") {
  const FitData data = random_fit_data(50, 3, 2, 27, true);
  const RegressionModel plain =
      fit_wls_linear(data.stats, data.theta, data.weights);
  const RegressionModel ridge = fit_ridge(data.stats, data.theta, data.weights, 0.0);
  CHECK(ridge.kind == RegressionKind::ridge);
  MatrixXd probe = random_fit_data(5, 3, 1, 28, false).stats;
  CHECK((plain.predict(probe) - ridge.predict(probe)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("ridge predictions match an independent penalized solve") {
  const FitData data = random_fit_data(60, 3, 2, 29, true);
  const double lambda = 0.37;
  const RegressionModel model =
      fit_ridge(data.stats, data.theta, data.weights, lambda);

  // Recompute the weighted standardization by explicit loops, solve the
  // penalized normal equations on those coordinates, and predict.
  const VectorXd w = data.weights / data.weights.sum();
  const Index q = data.stats.cols();
  VectorXd mean(q), scale(q);
  for (Index j = 0; j < q; ++j) {
    double mu = 0.0;
    for (Index i = 0; i < data.stats.rows(); ++i) mu += w[i] * data.stats(i, j);
    double var = 0.0;
    for (Index i = 0; i < data.stats.rows(); ++i)
      var += w[i] * (data.stats(i, j) - mu) * (data.stats(i, j) - mu);
    mean[j] = mu;
    scale[j] = std::sqrt(var);
  }
  const MatrixXd z =
      (data.stats.rowwise() - mean.transpose()).array().rowwise() /
      scale.transpose().array();
  const auto [alpha, beta] = oracle::ridge_normal_equations(z, data.theta, w, lambda);

  MatrixXd probe = random_fit_data(7, 3, 1, 30, false).stats;
  const MatrixXd probe_z =
      (probe.rowwise() - mean.transpose()).array().rowwise() /
      scale.transpose().array();
  const MatrixXd expected =
      (probe_z * beta.transpose()).rowwise() + alpha.transpose();
  CHECK((model.predict(probe) - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("a huge ridge penalty shrinks to the weighted mean") {
  const FitData data = random_fit_data(50, 2, 1, 31, true);
  const RegressionModel model =
      fit_ridge(data.stats, data.theta, data.weights, 1e12);
  const VectorXd w = data.weights / data.weights.sum();
  const double target = data.theta.col(0).dot(w);
  CHECK(model.coef.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(model.intercept[0] == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("ridge handles exactly duplicated statistics") {
  FitData data = random_fit_data(40, 1, 1, 32, false);
  MatrixXd stats(40, 2);
  stats.col(0) = data.stats.col(0);
  stats.col(1) = data.stats.col(0);
  const RegressionModel model = fit_ridge(stats, data.theta, data.weights, 1e-3);
  CHECK(model.coef.allFinite());
  // Symmetry: identical columns receive identical coefficients.
  CHECK(model.coef(0, 0) == doctest::Approx(model.coef(1, 0)).epsilon(1e-10));
}

TEST_CASE("the ridge coefficient norm never grows with the penalty") {
  const FitData data = random_fit_data(60, 3, 1, 33, true);
  double previous = std::numeric_limits<double>::infinity();
  for (const double lambda : {1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e3}) {
    const RegressionModel model =
        fit_ridge(data.stats, data.theta, data.weights, lambda);
    const double norm = model.coef.norm();
    CHECK(norm <= previous + 1e-12);
    previous = norm;
  }
  CHECK_THROWS_AS(fit_ridge(data.stats, data.theta, data.weights, -1.0),
                  ConfigError);
}

TEST_CASE("predict evaluates the fitted line at new statistics") {
  MatrixXd stats(5, 1);
  stats << 0.0, 1.0, 2.0, 4.0, -1.0;
  MatrixXd theta = (2.0 * stats).array() + 1.0;  // theta = 1 + 2 s
  const RegressionModel model = fit_wls_linear(stats, theta, VectorXd::Ones(5));
  VectorXd probe(1);
  probe << 3.0;
  CHECK(model.predict_one(probe)[0] == doctest::Approx(7.0).epsilon(1e-10));
}

TEST_CASE("linear model predictions satisfy the affine identity") {
  const FitData data = random_fit_data(50, 2, 2, 34, true);
  const RegressionModel model =
      fit_wls_linear(data.stats, data.theta, data.weights);
  MatrixXd a(1, 2), b(1, 2), zero(1, 2), sum(1, 2);
  a << 0.4, -1.2;
  b << 2.0, 0.3;
  zero.setZero();
  sum = a + b;
  const MatrixXd lhs = model.predict(a) + model.predict(b) - model.predict(zero);
  CHECK((lhs - model.predict(sum)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("raw coefficients reproduce predict in original units") {
  const FitData data = random_fit_data(40, 3, 2, 35, true);
  for (const double lambda : {0.0, 0.5}) {
    const RegressionModel model =
        lambda == 0.0 ? fit_wls_linear(data.stats, data.theta, data.weights)
                      : fit_ridge(data.stats, data.theta, data.weights, lambda);
    const auto [alpha, beta] = model.coefficients_raw();
    MatrixXd probe = random_fit_data(6, 3, 1, 36, false).stats;
    const MatrixXd manual = (probe * beta).rowwise() + alpha.transpose();
    CHECK((model.predict(probe) - manual).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("raw coefficients are rejected for network models") {
  const FitData data = random_fit_data(60, 1, 1, 37, false);
  MlpConfig config;
  config.epochs = 5;
  const RegressionModel model =
      fit_mlp(data.stats, data.theta, data.weights, config);
  CHECK_THROWS_AS(model.coefficients_raw(), ConfigError);
}

TEST_CASE("the analytic network gradient matches finite differences") {
  const Index m = 20, q = 3, p = 2, hidden = 4;
  const FitData data = random_fit_data(m, q, p, 38, true);
  const VectorXd w = data.weights / data.weights.sum();
  const MlpShape shape{q, hidden, p};

  std::mt19937 gen(39);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  MatrixXd w1(hidden, q), w2(p, hidden);
  VectorXd b1(hidden), b2(p);
  for (Index i = 0; i < w1.size(); ++i) w1.data()[i] = u(gen);
  for (Index i = 0; i < w2.size(); ++i) w2.data()[i] = u(gen);
  for (Index i = 0; i < hidden; ++i) b1[i] = u(gen);
  for (Index i = 0; i < p; ++i) b2[i] = u(gen);
  const VectorXd flat = mlp_pack(w1, b1, w2, b2);
  const double l2 = 1e-3;

  const VectorXd grad =
      mlp_loss_gradient(flat, shape, data.stats, data.theta, w, l2);
  const VectorXd fd = oracle::finite_difference_gradient(
      [&](const VectorXd& x) {
        return mlp_loss(x, shape, data.stats, data.theta, w, l2);
      },
      flat, 1e-6);
  CHECK((grad - fd).norm() <= 1e-5 * (grad.norm() + 1.0));
}

TEST_CASE("pack and unpack of network parameters round-trip") {
  const MlpShape shape{3, 4, 2};
  std::mt19937 gen(40);
  std::normal_distribution<double> dist;
  VectorXd flat(shape.parameter_count());
  for (Index i = 0; i < flat.size(); ++i) flat[i] = dist(gen);
  MatrixXd w1, w2;
  VectorXd b1, b2;
  mlp_unpack(flat, shape, w1, b1, w2, b2);
  CHECK(w1.rows() == 4);
  CHECK(w1.cols() == 3);
  CHECK(w2.rows() == 2);
  CHECK(w2.cols() == 4);
  CHECK(mlp_pack(w1, b1, w2, b2) == flat);
}

TEST_CASE("the network learns an exact affine relation well") {
  const Index m = 200;
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  MatrixXd stats(m, 1);
  MatrixXd theta(m, 1);
  for (Index i = 0; i < m; ++i) {
    stats(i, 0) = u(gen);
    theta(i, 0) = 1.0 + 2.0 * stats(i, 0);
  }
  const VectorXd weights = VectorXd::Ones(m);
  MlpConfig config;
  config.epochs = 5000;
  config.l2_penalty = 1e-6;
  const RegressionModel model = fit_mlp(stats, theta, weights, config);
  const MatrixXd residuals = theta - model.predict(stats);
  const double mse = residuals.array().square().mean();
  const double variance =
      (theta.array() - theta.mean()).square().sum() / (m - 1);
  CHECK(mse < 1e-3 * variance);
}

TEST_CASE("network training is deterministic for a fixed seed") {
  const FitData data = random_fit_data(120, 2, 1, 42, true);
  MlpConfig config;
  config.epochs = 50;
  config.seed = 77;
  const RegressionModel a = fit_mlp(data.stats, data.theta, data.weights, config);
  const RegressionModel b = fit_mlp(data.stats, data.theta, data.weights, config);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);
  CHECK(a.final_loss == b.final_loss);
}

TEST_CASE("more epochs never end with a larger training loss") {
  const FitData data = random_fit_data(120, 2, 1, 43, true);
  MlpConfig short_run;
  short_run.epochs = 10;
  MlpConfig long_run;
  long_run.epochs = 100;
  const double loss_short =
      fit_mlp(data.stats, data.theta, data.weights, short_run).final_loss;
  const double loss_long =
      fit_mlp(data.stats, data.theta, data.weights, long_run).final_loss;
  CHECK(loss_long <= loss_short);
}

TEST_CASE("training warns when rows are scarce for the network size") {
  const FitData data = random_fit_data(20, 1, 1, 44, false);
  MlpConfig config;
  config.hidden_units = 8;  // 20 rows < 10 * 8
  config.epochs = 2;
  std::ostringstream captured;
  std::streambuf* old = std::cerr.rdbuf(captured.rdbuf());
  fit_mlp(data.stats, data.theta, data.weights, config);
  std::cerr.rdbuf(old);
  CHECK(captured.str().find("recommend") != std::string::npos);
}

TEST_CASE("network config validation and default sizing") {
  MlpConfig config;
  config.epochs = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = MlpConfig{};
  config.learning_rate = 0.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = MlpConfig{};
  config.l2_penalty = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config = MlpConfig{};
  CHECK(config.resolved_hidden_units(1) == 4);
  CHECK(config.resolved_hidden_units(7) == 4);
  CHECK(config.resolved_hidden_units(9) == 5);
  CHECK(config.resolved_hidden_units(16) == 8);
  config.hidden_units = 3;
  CHECK(config.resolved_hidden_units(16) == 3);
}

TEST_CASE("constant-magnitude residuals give a flat log-variance surface") {
  const Index m = 60;
  FitData data = random_fit_data(m, 1, 1, 45, false);
  MatrixXd residuals(m, 1);
  for (Index i = 0; i < m; ++i) residuals(i, 0) = i % 2 == 0 ? 0.5 : -0.5;
  const VarianceModel model = fit_log_variance(
      data.stats, residuals, data.weights, VarianceKind::linear);
  MatrixXd probe(2, 1);
  probe << -1.0, 1.5;
  const MatrixXd lv = model.log_variance_at(probe);
  const double expected = std::log(0.25);
  CHECK(lv(0, 0) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(lv(1, 0) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(model.sigma(probe)(0, 0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("the log-variance fit recovers an exponential noise scale") {
  const Index m = 10000;
  std::mt19937 gen(46);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::normal_distribution<double> dist;
  MatrixXd stats(m, 1);
  MatrixXd residuals(m, 1);
  for (Index i = 0; i < m; ++i) {
    stats(i, 0) = u(gen);
    residuals(i, 0) = std::exp(0.5 * stats(i, 0)) * dist(gen);  // sd = e^{s/2}
  }
  const VarianceModel model =
      fit_log_variance(stats, residuals, VectorXd::Ones(m), VarianceKind::linear);
  MatrixXd probe(2, 1);
  probe << 0.0, 1.0;
  const MatrixXd lv = model.log_variance_at(probe);
  const double slope = lv(1, 0) - lv(0, 0);  // true log-variance slope is 1
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("all-zero residuals cannot support a variance model") {
  const FitData data = random_fit_data(30, 1, 1, 47, false);
  const MatrixXd residuals = MatrixXd::Zero(30, 1);
  CHECK_THROWS_AS(
      fit_log_variance(data.stats, residuals, data.weights, VarianceKind::linear),
      NumericError);
}

TEST_CASE("isolated zero residuals are clamped, not fatal") {
  const Index m = 30;
  FitData data = random_fit_data(m, 1, 1, 48, false);
  MatrixXd residuals(m, 1);
  std::mt19937 gen(49);
  std::normal_distribution<double> dist;
  for (Index i = 0; i < m; ++i) residuals(i, 0) = dist(gen);
  residuals(3, 0) = 0.0;
  const VarianceModel model = fit_log_variance(
      data.stats, residuals, data.weights, VarianceKind::linear);
  CHECK(model.log_variance_at(data.stats).allFinite());
}
