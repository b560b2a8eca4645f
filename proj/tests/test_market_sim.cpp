#include <cmath>

#include <Eigen/Dense>

#include "corrkit/correlation.hpp"
#include "corrkit/epps.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/market_sim.hpp"
#include "corrkit/stats.hpp"
#include "doctest.h"

using namespace corrkit;

TEST_CASE("equicorrelation population matrix is exact") {
  const SyntheticMarketSpec spec = equicorrelation_spec(6, 0.4, 100);
  const Eigen::MatrixXd c = population_correlation(spec);
  REQUIRE(c.rows() == 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(c(i, j) == doctest::Approx(i == j ? 1.0 : 0.4).epsilon(1e-12));
}

TEST_CASE("sampled correlations converge to the population value") {
  const ReturnPanel panel = simulate_market(equicorrelation_spec(10, 0.5, 20000), 5001);
  const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
  double worst = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) worst = std::max(worst, std::abs(model.matrix(i, j) - 0.5));
  CHECK(worst < 0.03);
}

TEST_CASE("simulation is deterministic and seed-sensitive") {
  const SyntheticMarketSpec spec = equicorrelation_spec(5, 0.3, 300);
  const ReturnPanel a = simulate_market(spec, 5002);
  const ReturnPanel b = simulate_market(spec, 5002);
  const ReturnPanel c = simulate_market(spec, 5003);
  CHECK((a.returns - b.returns).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.returns - c.returns).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("adding assets never perturbs existing columns") {
  const ReturnPanel small = simulate_market(equicorrelation_spec(5, 0.3, 400), 5004);
  const ReturnPanel big = simulate_market(equicorrelation_spec(9, 0.3, 400), 5004);
  CHECK((big.returns.leftCols(5) - small.returns).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lagged factors obey the lag law at aggregated horizons") {
  // tau = 60 s, 10 s steps: pairwise correlation at horizon T is
  // rho_inf * (1 - (tau/T)(1 - e^{-T/tau})) for every pair.
  const SyntheticMarketSpec spec = lagged_factor_spec(8, 1, 60.0, 120000, 10, 0.001);
  const ReturnPanel panel = simulate_market(spec, 5005);

  const double rho_inf = 0.35;  // factor-1 variance share in the preset
  for (int m : {6, 30}) {
    const ReturnPanel agg = aggregate_returns(panel, m);
    const CorrelationModel model = correlation_matrix(agg, Estimator::pearson());
    const double expected =
        rho_inf * lag_response_fraction(static_cast<double>(m) * 10.0 / 60.0);
    double sum = 0.0;
    int cnt = 0;
    for (int i = 0; i < 8; ++i)
      for (int j = i + 1; j < 8; ++j) {
        sum += model.matrix(i, j);
        ++cnt;
      }
    CHECK(sum / cnt == doctest::Approx(expected).epsilon(0.15));
  }
}

TEST_CASE("single-step lagged correlations are strongly suppressed") {
  const SyntheticMarketSpec spec = lagged_factor_spec(8, 1, 60.0, 120000, 10, 0.001);
  const ReturnPanel panel = simulate_market(spec, 5006);
  const CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
  // expected: 0.35 * g(1/6) ~ 0.028, an order of magnitude below rho_inf
  double sum = 0.0;
  int cnt = 0;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) {
      sum += model.matrix(i, j);
      ++cnt;
    }
  const double expected = 0.35 * lag_response_fraction(10.0 / 60.0);
  CHECK(sum / cnt == doctest::Approx(expected).epsilon(0.2));
  CHECK(sum / cnt < 0.06);
}

TEST_CASE("per-step variance stays flat under the lag kernel") {
  const SyntheticMarketSpec spec = lagged_factor_spec(6, 1, 120.0, 80000, 10, 0.001);
  const ReturnPanel panel = simulate_market(spec, 5007);
  for (int i = 0; i < 6; ++i) {
    const double sd = std::sqrt(variance(panel.returns.col(i)));
    CHECK(sd == doctest::Approx(0.001).epsilon(0.03));
  }
}

TEST_CASE("zero leverage slopes give a constant loading path") {
  LeverageSpec lev;  // all slopes zero
  const SyntheticMarketSpec spec = leverage_market_spec(6, 2, lev, 300);
  const MarketSample sample = simulate_market_detailed(spec, 5008, true);
  REQUIRE(sample.beta_path.rows() == 300);
  REQUIRE(sample.beta_path.cols() == 6);
  const double scale = spec.factor_loadings.col(0).cwiseAbs().mean();
  for (int i = 0; i < 6; ++i) {
    // index-unit beta: loading over the mean loading (here all equal, so 1)
    const double base = spec.factor_loadings(i, 0) / scale;
    CHECK((sample.beta_path.col(i).array() - base).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("leverage modulates loadings but preserves total variance") {
  LeverageSpec lev;
  lev.systematic_slope = 0.35;
  const SyntheticMarketSpec spec = leverage_market_spec(20, 2, lev, 6000);
  const MarketSample sample = simulate_market_detailed(spec, 5009, true);

  // the loading path genuinely moves
  const Eigen::VectorXd path = sample.beta_path.col(0);
  CHECK(std::sqrt(variance(path)) > 0.1 * std::abs(mean(path)));

  // per-step total variance is invariant by construction: idio absorbs
  for (int i = 0; i < 20; ++i) {
    const double sd = std::sqrt(variance(sample.panel.returns.col(i)));
    CHECK(sd == doctest::Approx(0.01).epsilon(0.04));
  }
}

TEST_CASE("factor returns expose the index stream") {
  const SyntheticMarketSpec spec = equicorrelation_spec(5, 0.4, 1000);
  const MarketSample sample = simulate_market_detailed(spec, 5010, false);
  REQUIRE(sample.factor_returns.cols() == 1);
  REQUIRE(sample.factor_returns.rows() == 1000);
  CHECK(sample.beta_path.size() == 0);
  // every asset regresses on the factor with positive slope
  for (int i = 0; i < 5; ++i) {
    const auto [slope, icept] = ols_fit(sample.factor_returns.col(0),
                                        sample.panel.returns.col(i));
    (void)icept;
    CHECK(slope > 0.0);
  }
}

TEST_CASE("spec validation rejects malformed structures") {
  SyntheticMarketSpec spec = equicorrelation_spec(5, 0.3, 100);
  CHECK_NOTHROW(spec.validate());

  SyntheticMarketSpec no_assets = spec;
  no_assets.n_assets = 0;
  CHECK_THROWS_AS(no_assets.validate(), ValidationError);

  SyntheticMarketSpec bad_idio = spec;
  bad_idio.idiosyncratic_vol[2] = 0.0;
  CHECK_THROWS_AS(bad_idio.validate(), ValidationError);

  SyntheticMarketSpec bad_shape = spec;
  bad_shape.factor_loadings = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(bad_shape.validate(), ValidationError);

  CHECK_THROWS_AS(equicorrelation_spec(5, 1.2, 100), ValidationError);
}

TEST_CASE("population correlation is undefined for leveraged specs") {
  LeverageSpec lev;
  lev.systematic_slope = 0.2;
  const SyntheticMarketSpec spec = leverage_market_spec(5, 2, lev, 100);
  CHECK_THROWS_AS(population_correlation(spec), ValidationError);
}
