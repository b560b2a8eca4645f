#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "corrkit/panel.hpp"

namespace corrkit {

// Slopes/exponent of the three leverage corrections applied to the reactive
// volatility. Defaults are all-off: the reactive estimator then reduces to
// vol-standardized OLS. The generator in market_sim shares these functional
// forms — estimation consistency against it is what defines correctness.
struct ReactiveParams {
  double systematic_slope = 0.0;     // per unit index-drawdown z-score
  double specific_slope = 0.0;       // per unit relative-underperformance z-score
  double elasticity_exponent = 0.0;  // power on the relative vol ratio, [0, 2]
  double z_halflife_periods = 20.0;  // field order mirrors LeverageSpec
  double vol_halflife_periods = 40.0;

  void validate() const;
};

enum class BetaMethod { ols, reactive, trimean_quantile };

std::string beta_method_name(BetaMethod method);

struct BetaEstimate {
  double beta = 0.0;
  BetaMethod method = BetaMethod::ols;
  int window_periods = 0;
};

// Strictly predictable EWMA volatility of a series: entry t uses observations
// 0..t-1 only; the first burn_in entries hold the burn-in average so early
// values stay usable.
Eigen::VectorXd predictable_vol_path(const Eigen::VectorXd& series, double halflife,
                                     int burn_in = 20);

// T×N reactive volatilities: predictable EWMA vol × systematic drawdown
// modulation (contemporaneous in the index) × specific underperformance
// modulation (trailing) × relative-vol elasticity (trailing).
Eigen::MatrixXd reactive_vol_paths(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                                   const ReactiveParams& params);

// Each asset return divided by its reactive volatility.
ReturnPanel reactive_normalize(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                               const ReactiveParams& params);

// ols: slope of raw returns on index over the trailing window.
// reactive: slope on reactive-normalized returns, rescaled to raw units by the
//   current asset/index vol ratio.
// trimean_quantile: 0.25·q25 + 0.5·q50 + 0.25·q75 of quantile-regression
//   slopes (iteratively reweighted least squares).
std::vector<BetaEstimate> estimate_beta(const ReturnPanel& panel,
                                        const Eigen::VectorXd& index_returns, BetaMethod method,
                                        int window, const ReactiveParams& params = {});

// Per-period rolling estimates (row t uses data through t); rows before the
// first full window repeat the earliest available estimate.
Eigen::MatrixXd rolling_beta_path(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                                  BetaMethod method, int window,
                                  const ReactiveParams& params = {});

enum class BiasStrategy { momentum, low_beta, size_proxy, value_proxy };

std::string bias_strategy_name(BiasStrategy strategy);

struct BiasTestReport {
  std::string strategy;
  std::string beta_method;
  double residual_beta = 0.0;  // slope of the neutralized portfolio on the index
  double t_stat = 0.0;
  int n_obs = 0;
};

// Build the strategy's rank portfolio each period, neutralize it with betas
// from beta_method, and regress the realized next-period portfolio returns on
// the index. A working neutralization leaves no significant residual slope.
BiasTestReport bias_test(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                         BiasStrategy strategy, BetaMethod beta_method,
                         const std::optional<CriterionPanel>& criterion = std::nullopt,
                         const ReactiveParams& params = {});

struct RegimeEigenMode {
  int k = 1;
  double lambda_down = 0.0;
  double lambda_up = 0.0;
  double ratio = 1.0;   // lambda_down / lambda_up
  double ci_low = 0.0;  // bootstrap percentile CI of the ratio
  double ci_high = 0.0;
};

struct LeverageEigenReport {
  std::vector<RegimeEigenMode> modes;
  int n_down = 0;
  int n_up = 0;
  double quantile = 0.25;
};

// Split periods into bottom/top index-return quantiles (⌊qT⌋ rows each),
// estimate a correlation matrix per regime, and report λ_k down/up ratios
// with bootstrap confidence intervals (rows resampled within each regime).
LeverageEigenReport leverage_eigen_test(const ReturnPanel& panel,
                                        const Eigen::VectorXd& index_returns, int k_max,
                                        double quantile = 0.25, int n_boot = 200,
                                        std::uint64_t seed = 2026);

}  // namespace corrkit
