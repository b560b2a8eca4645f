#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "corrkit/ou_process.hpp"
#include "corrkit/panel.hpp"

namespace corrkit {

// Where OU persistence is injected: into the shared factor streams (moves
// correlations across horizons) or into each asset's idiosyncratic noise
// (control: leaves the correlation spectrum flat).
enum class TrendMode { factor, idiosyncratic };

// Loading modulation applied to the first factor:
//   beta_i1(t) = beta0_i1 · (1 + l_s·z_drawdown) · (1 + l_i·z_underperf_i) · relvol_i^{e_v}
// z_drawdown is contemporaneous in the index return; the specific z-score and
// the relative-vol ratio are strictly trailing. Same functional form as the
// reactive-beta normalization (shared leverage_modulation helper).
struct LeverageSpec {
  double systematic_slope = 0.0;     // l_s, per unit drawdown z-score
  double specific_slope = 0.0;       // l_i, per unit underperformance z-score
  double elasticity_exponent = 0.0;  // e_v in [0, 2]
  double z_halflife_periods = 20.0;
  double vol_halflife_periods = 40.0;  // fast filter; slow filter = 5x

  void validate() const;
};

struct SyntheticMarketSpec {
  int n_assets = 0;
  int n_factors = 1;
  Eigen::MatrixXd factor_loadings;    // N×K, per-step return units
  Eigen::VectorXd idiosyncratic_vol;  // N, per-step, all > 0
  long horizon_steps = 0;
  long step_seconds = 1;

  // Exponential lag kernel: asset prices absorb factor news with relaxation
  // time tau_c. Aggregated cross-correlations then follow
  //   rho(T) = rho_inf · [1 - (tau/T)(1 - e^{-T/tau})]
  // exactly at every horizon (each asset carries a private stationary OU
  // top-up so per-step variance stays flat while only the shared lagged
  // response correlates).
  std::optional<double> lag_relaxation_seconds;

  // Per-factor OU trend (factor mode) or per-asset OU noise (idiosyncratic
  // mode, one entry applied to every asset). stationary_std² is the variance
  // share of the persistent component; the white part tops up to 1.
  std::optional<std::vector<OuParams>> trend;
  TrendMode trend_mode = TrendMode::factor;

  std::optional<LeverageSpec> leverage;

  void validate() const;
};

struct MarketSample {
  ReturnPanel panel;
  // T×K realized common-factor returns, column k scaled to index units (mean
  // absolute loading), so column 0 is directly usable as the market index.
  Eigen::MatrixXd factor_returns;
  // T×N per-asset beta on the emitted index (modulated factor-1 loading over
  // the mean loading); empty unless requested.
  Eigen::MatrixXd beta_path;
};

ReturnPanel simulate_market(const SyntheticMarketSpec& spec, std::uint64_t seed);

// Also exposes the factor return streams (column 0 doubles as the market
// index in beta experiments) and, optionally, the true modulated loading path.
MarketSample simulate_market_detailed(const SyntheticMarketSpec& spec, std::uint64_t seed,
                                      bool want_beta_path = false);

// Single-period population correlation matrix implied by the spec. Defined
// for static structures only (a leveraged spec has no single matrix).
Eigen::MatrixXd population_correlation(const SyntheticMarketSpec& spec);

// --- preset builders ------------------------------------------------------

// One factor, equal loadings: every pair correlates at rho.
SyntheticMarketSpec equicorrelation_spec(int n_assets, double rho, long horizon_steps,
                                         long step_seconds = 86400, double per_step_vol = 0.01);

// K lagged factors with decreasing variance shares on sign-block patterns, so
// the top K eigenvalues are distinct and every one obeys the same lag law.
SyntheticMarketSpec lagged_factor_spec(int n_assets, int n_factors, double tau_seconds,
                                       long horizon_steps, long step_seconds = 10,
                                       double per_step_vol = 0.001);

// A market factor plus one style factor whose correlation loadings are exactly
// linear in rank quantile; idiosyncratic vols chosen so total variance is
// equal across assets (the optimum over sum-zero portfolios is then the
// centered-rank direction).
SyntheticMarketSpec linear_exposure_spec(int n_assets, long horizon_steps,
                                         double style_spread = 0.5, double market_loading = 0.5,
                                         long step_seconds = 86400, double per_step_vol = 0.01);

// One-factor equicorrelated market whose factor carries an OU trend.
SyntheticMarketSpec factor_trend_spec(int n_assets, double rho, double trend_relaxation_periods,
                                      double trend_variance_share, long horizon_steps,
                                      long step_seconds = 86400, double per_step_vol = 0.01);

// K-factor market with leverage modulation on the first factor's loadings.
SyntheticMarketSpec leverage_market_spec(int n_assets, int n_factors, const LeverageSpec& leverage,
                                         long horizon_steps, long step_seconds = 86400,
                                         double per_step_vol = 0.01);

}  // namespace corrkit
