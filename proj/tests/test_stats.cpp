#include <cmath>

#include <Eigen/Dense>

#include "corrkit/errors.hpp"
#include "corrkit/random.hpp"
#include "corrkit/stats.hpp"
#include "doctest.h"

using namespace corrkit;

TEST_CASE("average_ranks gives midranks on ties") {
  Eigen::VectorXd v(3);
  v << 3.0, 1.0, 1.0;
  const Eigen::VectorXd r = average_ranks(v);
  CHECK(r[0] == doctest::Approx(3.0));
  CHECK(r[1] == doctest::Approx(1.5));
  CHECK(r[2] == doctest::Approx(1.5));
}

TEST_CASE("moment helpers on closed-form inputs") {
  Eigen::VectorXd x(4);
  x << -1.0, -1.0, 1.0, 1.0;  // m2 = 1, m4 = 1
  CHECK(mean(x) == doctest::Approx(0.0));
  CHECK(variance(x) == doctest::Approx(1.0));
  CHECK(excess_kurtosis(x) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(mean(Eigen::VectorXd()), ValidationError);
  CHECK_THROWS_AS(excess_kurtosis(Eigen::VectorXd::Zero(5)), NumericError);
}

TEST_CASE("gaussian sample has near-zero excess kurtosis") {
  RandomStream rng(3001);
  Eigen::VectorXd x(50000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
  CHECK(std::abs(excess_kurtosis(x)) < 0.15);
}

TEST_CASE("ols_fit is exact on exact lines") {
  Eigen::VectorXd x(5), y(5);
  x << 0, 1, 2, 3, 4;
  y = 2.0 * x.array() + 3.0;
  const auto [slope, intercept] = ols_fit(x, y);
  CHECK(slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(intercept == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ols_slope_stderr(x, y) == doctest::Approx(0.0));
  CHECK_THROWS_AS(ols_fit(Eigen::VectorXd::Ones(5), y), NumericError);
}

TEST_CASE("ewma_lambda halflife semantics") {
  CHECK(ewma_lambda(1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::pow(ewma_lambda(20.0), 20.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(ewma_lambda(0.0), ValidationError);
}

TEST_CASE("EwmaVol converges to the magnitude of a constant input") {
  EwmaVol vol(10.0, 5);
  for (int i = 0; i < 4; ++i) {
    vol.update(0.02);
    CHECK(!vol.warmed());
  }
  for (int i = 0; i < 200; ++i) vol.update(0.02);
  CHECK(vol.warmed());
  CHECK(vol.vol() == doctest::Approx(0.02).epsilon(1e-10));
}

TEST_CASE("EwmaVol tracks a volatility regime change") {
  EwmaVol vol(10.0);
  RandomStream rng(3002);
  for (int i = 0; i < 400; ++i) vol.update(0.01 * rng.gaussian());
  const double low = vol.vol();
  for (int i = 0; i < 400; ++i) vol.update(0.05 * rng.gaussian());
  CHECK(vol.vol() > 3.0 * low);
}

TEST_CASE("EwmaZScore on constant input saturates at 1/kappa") {
  const double lambda = ewma_lambda(20.0);
  const double kappa = std::sqrt((1.0 - lambda) / (1.0 + lambda));
  EwmaZScore z(20.0, 10);
  z.update(0.01);
  for (int i = 0; i < 8; ++i) {
    z.update(0.01);
    CHECK(z.z() == 0.0);  // below min_obs
  }
  for (int i = 0; i < 3000; ++i) z.update(0.01);
  CHECK(z.z() == doctest::Approx(1.0 / kappa).epsilon(1e-9));
}

TEST_CASE("EwmaZScore stays O(1) on iid input") {
  EwmaZScore z(20.0);
  RandomStream rng(3003);
  double worst = 0.0;
  for (int i = 0; i < 5000; ++i) {
    z.update(rng.gaussian());
    worst = std::max(worst, std::abs(z.z()));
  }
  // the EWMA variance can lag a burst, so spikes past the iid Gaussian range
  // are expected; 8 still rules out an unnormalized score
  CHECK(worst < 8.0);
  CHECK(worst > 0.5);  // it does move
}

TEST_CASE("leverage_modulation clamps each factor to [0.2, 5]") {
  CHECK(leverage_modulation(0.0, 0.0, 0.0, 3.0, -2.0, 7.0) == doctest::Approx(1.0));
  CHECK(leverage_modulation(0.35, 0.0, 0.0, -10.0, 0.0, 1.0) == doctest::Approx(0.2));
  CHECK(leverage_modulation(0.35, 0.0, 0.0, 100.0, 0.0, 1.0) == doctest::Approx(5.0));
  CHECK(leverage_modulation(0.0, 0.5, 0.0, 0.0, -100.0, 1.0) == doctest::Approx(0.2));
  CHECK(leverage_modulation(0.0, 0.0, 2.0, 0.0, 0.0, 100.0) == doctest::Approx(5.0));
  // interior point: no clamp, plain product
  CHECK(leverage_modulation(0.3, 0.2, 1.0, 1.0, -1.0, 1.5) ==
        doctest::Approx(1.3 * 0.8 * 1.5).epsilon(1e-12));
}

TEST_CASE("autocorrelation of an alternating series is -1 at lag 1") {
  const int n = 1000;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const AcfProfile p = autocorrelation(x, 3);
  REQUIRE(p.lags.size() == 4);
  CHECK(p.acf[0] == doctest::Approx(1.0));
  CHECK(p.acf[1] == doctest::Approx(-1.0).epsilon(2e-3));
  CHECK(p.acf[2] == doctest::Approx(1.0).epsilon(4e-3));
  CHECK(p.stderr_bartlett[1] == doctest::Approx(1.0 / std::sqrt(double(n))).epsilon(1e-9));
}

TEST_CASE("autocorrelation of iid noise is flat within 4 standard errors") {
  RandomStream rng(3004);
  Eigen::VectorXd x(20000);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
  const AcfProfile p = autocorrelation(x, 10);
  for (size_t k = 1; k < p.acf.size(); ++k)
    CHECK(std::abs(p.acf[k]) < 4.0 * p.stderr_bartlett[k]);
}
