#include <cmath>

#include <Eigen/Dense>

#include "corrkit/correlation.hpp"
#include "corrkit/epps.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/horizon.hpp"
#include "corrkit/market_sim.hpp"
#include "doctest.h"

using namespace corrkit;

TEST_CASE("lag response fraction: limits and the e^{-1} point") {
  CHECK(lag_response_fraction(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(lag_response_fraction(1e-6) == doctest::Approx(5e-7).epsilon(1e-4));
  CHECK(lag_response_fraction(50.0) == doctest::Approx(1.0 - 1.0 / 50.0).epsilon(1e-10));
  // continuity across the series/exact switch at 1e-4; the two probes differ
  // by dx = 2e-9 and g' ~ 1/2 there, so allow the genuine slope contribution
  const double below = lag_response_fraction(0.99999e-4);
  const double above = lag_response_fraction(1.00001e-4);
  CHECK(std::abs(below - above) < 2e-9);
  // monotone increasing
  double prev = 0.0;
  for (double x = 0.01; x < 20.0; x *= 1.5) {
    const double g = lag_response_fraction(x);
    CHECK(g > prev);
    prev = g;
  }
  CHECK_THROWS_AS(lag_response_fraction(0.0), ValidationError);
}

TEST_CASE("lag law endpoints") {
  CHECK(lag_law(60.0, 8.0, 60.0) == doctest::Approx(1.0 + 7.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(lag_law(1e9, 8.0, 60.0) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(lag_law(1e-3, 8.0, 60.0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(lag_law(-1.0, 8.0, 60.0), ValidationError);
}

TEST_CASE("scale curve drops starved horizons and rejects non-multiples") {
  const ReturnPanel panel = simulate_market(equicorrelation_spec(5, 0.3, 600, 10, 0.001), 8001);

  // 600 steps of 10 s: horizon 300 s leaves 20 samples -> dropped
  const ScaleCurveSet set = eigenvalue_scale_curve(panel, {10, 30, 300}, 2);
  REQUIRE(set.dropped_horizons.size() == 1);
  CHECK(set.dropped_horizons[0] == 300);
  REQUIRE(set.curves.size() == 2);
  CHECK(set.curves[0].eigen_index == 1);
  CHECK(set.curves[1].eigen_index == 2);
  REQUIRE(set.curves[0].horizons_seconds.size() == 2);
  CHECK(set.curves[0].values.size() == 2);

  CHECK_THROWS_AS(eigenvalue_scale_curve(panel, {15}, 1), ValidationError);
  CHECK_THROWS_AS(eigenvalue_scale_curve(panel, {10}, 0), ValidationError);
  CHECK_THROWS_AS(eigenvalue_scale_curve(panel, {300}, 1), ValidationError);  // all dropped
}

TEST_CASE("fit recovers parameters from an exact synthetic curve") {
  ScaleCurve curve;
  curve.eigen_index = 1;
  curve.horizons_seconds = {10, 30, 60, 120, 300, 600, 1800, 3600};
  curve.values.resize(8);
  for (int i = 0; i < 8; ++i)
    curve.values[i] = lag_law(static_cast<double>(curve.horizons_seconds[i]), 9.0, 120.0);

  const LagLawFit fit = fit_lag_law(curve);
  CHECK(fit.lambda_inf == doctest::Approx(9.0).epsilon(1e-4));
  CHECK(fit.tau_c_seconds == doctest::Approx(120.0).epsilon(1e-3));
  CHECK(fit.rms_relative_error < 1e-6);
}

TEST_CASE("fit validates its curve") {
  ScaleCurve too_few;
  too_few.horizons_seconds = {10, 30, 60};
  too_few.values = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(fit_lag_law(too_few), ValidationError);

  ScaleCurve narrow;
  narrow.horizons_seconds = {100, 200, 300, 400};
  narrow.values = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(fit_lag_law(narrow), ValidationError);

  ScaleCurve negative;
  negative.horizons_seconds = {10, 100, 500, 1000};
  negative.values = Eigen::VectorXd::Ones(4);
  negative.values[2] = -0.5;
  CHECK_THROWS_AS(fit_lag_law(negative), ValidationError);
}

TEST_CASE("fit tolerates noise around the law") {
  ScaleCurve curve;
  curve.eigen_index = 1;
  curve.horizons_seconds = {10, 30, 60, 120, 300, 600, 1800, 3600};
  curve.values.resize(8);
  const double wiggle[8] = {1.01, 0.99, 1.02, 0.98, 1.01, 0.99, 1.0, 1.0};
  for (int i = 0; i < 8; ++i)
    curve.values[i] =
        wiggle[i] * lag_law(static_cast<double>(curve.horizons_seconds[i]), 6.0, 90.0);
  const LagLawFit fit = fit_lag_law(curve);
  CHECK(fit.lambda_inf == doctest::Approx(6.0).epsilon(0.10));
  CHECK(fit.tau_c_seconds == doctest::Approx(90.0).epsilon(0.25));
  CHECK(fit.rms_relative_error < 0.05);
  CHECK(fit.rms_relative_error > 0.0);
}

TEST_CASE("day-horizon curve agrees with the generic scale curve") {
  const ReturnPanel daily = simulate_market(equicorrelation_spec(8, 0.4, 2000), 8002);
  const ScaleCurveSet by_days = horizon_eigen_curve(daily, {1, 5, 20}, 1);
  const ScaleCurveSet by_seconds =
      eigenvalue_scale_curve(daily, {86400, 5 * 86400, 20 * 86400}, 1);
  REQUIRE(by_days.curves.size() == 1);
  CHECK((by_days.curves[0].values - by_seconds.curves[0].values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an unlagged market has a flat scale curve") {
  const ReturnPanel panel = simulate_market(equicorrelation_spec(10, 0.4, 40000, 10, 0.001), 8003);
  const ScaleCurveSet set = eigenvalue_scale_curve(panel, {10, 50, 100, 500}, 1);
  const Eigen::VectorXd& v = set.curves[0].values;
  const double center = v.mean();
  for (Eigen::Index j = 0; j < v.size(); ++j)
    CHECK(v[j] == doctest::Approx(center).epsilon(0.10));
}

TEST_CASE("portfolio autocorrelation profile has Bartlett bands") {
  const ReturnPanel panel = simulate_market(equicorrelation_spec(6, 0.3, 5000), 8004);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  const AcfProfile prof = autocorrelation_profile(panel, w, 5);
  REQUIRE(prof.lags.size() == 6);
  CHECK(prof.acf[0] == doctest::Approx(1.0));
  for (size_t k = 1; k < prof.acf.size(); ++k) {
    CHECK(std::abs(prof.acf[k]) < 4.0 * prof.stderr_bartlett[k]);  // iid factor, no memory
    CHECK(prof.stderr_bartlett[k] >= prof.stderr_bartlett[1] - 1e-15);  // widening bands
  }
}
