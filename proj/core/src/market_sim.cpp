#include "corrkit/market_sim.hpp"

#include <cmath>
#include <string>

#include "corrkit/errors.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

void LeverageSpec::validate() const {
  if (!std::isfinite(systematic_slope) || !std::isfinite(specific_slope))
    throw ValidationError("leverage: slopes must be finite");
  if (!(elasticity_exponent >= 0.0 && elasticity_exponent <= 2.0))
    throw ValidationError("leverage: elasticity_exponent must lie in [0, 2]");
  if (!(z_halflife_periods > 0.0) || !(vol_halflife_periods > 0.0))
    throw ValidationError("leverage: half-lives must be positive");
}

void SyntheticMarketSpec::validate() const {
  if (n_assets < 2) throw ValidationError("market spec: need at least 2 assets");
  if (n_factors < 1) throw ValidationError("market spec: need at least 1 factor");
  if (factor_loadings.rows() != n_assets || factor_loadings.cols() != n_factors)
    throw ValidationError("market spec: factor_loadings must be n_assets x n_factors");
  if (!factor_loadings.allFinite()) throw ValidationError("market spec: non-finite loadings");
  if (idiosyncratic_vol.size() != n_assets)
    throw ValidationError("market spec: idiosyncratic_vol must have n_assets entries");
  for (int i = 0; i < n_assets; ++i)
    if (!(idiosyncratic_vol[i] > 0.0))
      throw ValidationError("market spec: idiosyncratic_vol must be positive (asset " +
                            std::to_string(i + 1) + ")");
  if (horizon_steps < 2) throw ValidationError("market spec: horizon_steps must be >= 2");
  if (step_seconds < 1) throw ValidationError("market spec: step_seconds must be >= 1");
  if (lag_relaxation_seconds && !(*lag_relaxation_seconds > 0.0))
    throw ValidationError("market spec: lag relaxation time must be positive");
  if (trend) {
    const size_t expected = trend_mode == TrendMode::factor ? static_cast<size_t>(n_factors) : 1u;
    if (trend->size() != expected)
      throw ValidationError("market spec: trend needs " + std::to_string(expected) + " entries");
    for (const auto& p : *trend) {
      p.validate();
      if (p.stationary_std > 1.0)
        throw ValidationError(
            "market spec: trend stationary_std must be <= 1 (it is a variance-share sqrt)");
    }
  }
  if (leverage) leverage->validate();
}

double lag_response_fraction(double x) {
  if (!(x > 0.0)) throw ValidationError("lag_response_fraction: argument must be positive");
  if (x < 1e-4) return x / 2.0 - x * x / 6.0 + x * x * x / 24.0;
  return 1.0 - (1.0 - std::exp(-x)) / x;
}

namespace {

// Exact one-step sampler for the lagged response of a factor news stream.
// With W the news Brownian and U the OU price-adjustment state
// (dU = -U/tau dt + dW), the absorbed response is L = W - U. Over a step of
// length delta: U' = a·U + I with a = e^{-delta/tau}; (ΔW, I) are jointly
// Gaussian with Var(ΔW)=delta, Var(I)=(tau/2)(1-a²), Cov=tau(1-a).
struct LagKernel {
  double a;
  double stationary_u_std;
  double sqrt_delta;
  double chol10, chol11;  // Cholesky rows for (ΔW, I): I = chol10·ξ1 + chol11·ξ2
  double priv_innov_std;  // innovation std of a free-running private OU copy

  LagKernel(double tau, double delta) {
    a = std::exp(-delta / tau);
    const double var_i = 0.5 * tau * (1.0 - a * a);
    const double cov_wi = tau * (1.0 - a);
    sqrt_delta = std::sqrt(delta);
    stationary_u_std = std::sqrt(0.5 * tau);
    chol10 = cov_wi / sqrt_delta;
    chol11 = std::sqrt(std::max(var_i - cov_wi * cov_wi / delta, 0.0));
    priv_innov_std = std::sqrt(var_i);
  }
};

constexpr std::uint64_t kFactorStreamId = 0x8000000000000000ULL;

// Additional cap on the factor-1 modulation so the compensated idiosyncratic
// variance keeps a floor of (0.2·total vol)²: leverage shifts variance between
// the first factor and the idiosyncratic term, never the total.
double cap_modulation(double mod, double beta0_sq, double other_sq, double total_var) {
  if (beta0_sq <= 0.0) return mod;
  const double floor_var = 0.04 * total_var;
  const double max_beta_sq = total_var - other_sq - floor_var;
  if (max_beta_sq <= 0.0) return 0.2;
  const double cap = std::sqrt(max_beta_sq / beta0_sq);
  return std::min(mod, cap);
}

}  // namespace

MarketSample simulate_market_detailed(const SyntheticMarketSpec& spec, std::uint64_t seed,
                                      bool want_beta_path) {
  spec.validate();
  const int n = spec.n_assets;
  const int kf = spec.n_factors;
  const long t_len = spec.horizon_steps;
  const double delta = static_cast<double>(spec.step_seconds);
  const bool lag = spec.lag_relaxation_seconds.has_value();
  const bool trend_factor = spec.trend && spec.trend_mode == TrendMode::factor;
  const bool trend_idio = spec.trend && spec.trend_mode == TrendMode::idiosyncratic;
  const bool lev = spec.leverage.has_value();

  RandomStream root(seed);
  RandomStream factor_stream = root.substream(kFactorStreamId);
  std::vector<RandomStream> asset_stream;
  asset_stream.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) asset_stream.push_back(root.substream(static_cast<std::uint64_t>(i)));

  std::optional<LagKernel> kern;
  if (lag) kern.emplace(*spec.lag_relaxation_seconds, delta);

  // Per-factor white-noise scale: trend takes stationary_std² of the unit
  // per-step variance, noise supplies the rest.
  Eigen::VectorXd noise_scale = Eigen::VectorXd::Ones(kf);
  std::vector<OuStepper> factor_trend;
  if (trend_factor) {
    for (int k = 0; k < kf; ++k) {
      const OuParams& p = (*spec.trend)[static_cast<size_t>(k)];
      factor_trend.emplace_back(p);
      noise_scale[k] = std::sqrt(1.0 - p.stationary_std * p.stationary_std);
    }
  }
  double idio_noise_scale = 1.0;
  std::vector<OuStepper> idio_trend;
  if (trend_idio) {
    const OuParams& p = (*spec.trend)[0];
    idio_noise_scale = std::sqrt(1.0 - p.stationary_std * p.stationary_std);
    for (int i = 0; i < n; ++i) idio_trend.emplace_back(p);
  }

  // Draw-order contract per stream (fixed so runs replay bit-identically and
  // adding assets never perturbs existing columns):
  //   factor stream: per factor, [trend draw][lag pair | plain draw]
  //   asset stream i: [idio trend draw][one private lag draw per factor][idio draw]
  Eigen::VectorXd u_common = Eigen::VectorXd::Zero(kf);
  Eigen::MatrixXd u_private = Eigen::MatrixXd::Zero(n, kf);
  if (trend_factor)
    for (int k = 0; k < kf; ++k) factor_trend[static_cast<size_t>(k)].init_stationary(factor_stream);
  if (lag)
    for (int k = 0; k < kf; ++k) u_common[k] = kern->stationary_u_std * factor_stream.gaussian();
  for (int i = 0; i < n; ++i) {
    if (trend_idio) idio_trend[static_cast<size_t>(i)].init_stationary(asset_stream[i]);
    if (lag)
      for (int k = 0; k < kf; ++k)
        u_private(i, k) = kern->stationary_u_std * asset_stream[i].gaussian();
  }

  // Leverage filters. The systematic z-score is contemporaneous in the index
  // (a regime split on today's index return must see today's loading shift);
  // the specific z-score and the vol ratio are strictly trailing.
  const LeverageSpec lev_spec = lev ? *spec.leverage : LeverageSpec{};
  EwmaZScore z_market(lev ? lev_spec.z_halflife_periods : 1.0);
  std::vector<EwmaZScore> z_specific;
  std::vector<EwmaVol> fast_vol, slow_vol;
  EwmaVol fast_vol_m(lev ? lev_spec.vol_halflife_periods : 1.0);
  EwmaVol slow_vol_m(lev ? 5.0 * lev_spec.vol_halflife_periods : 1.0);
  if (lev) {
    for (int i = 0; i < n; ++i) {
      z_specific.emplace_back(lev_spec.z_halflife_periods);
      fast_vol.emplace_back(lev_spec.vol_halflife_periods);
      slow_vol.emplace_back(5.0 * lev_spec.vol_halflife_periods);
    }
  }
  Eigen::VectorXd total_var(n), other_factor_sq(n);
  for (int i = 0; i < n; ++i) {
    const double all_sq = spec.factor_loadings.row(i).squaredNorm();
    total_var[i] = all_sq + spec.idiosyncratic_vol[i] * spec.idiosyncratic_vol[i];
    other_factor_sq[i] = all_sq - spec.factor_loadings(i, 0) * spec.factor_loadings(i, 0);
  }

  // Factor streams are emitted at index-return scale (mean absolute loading),
  // so column 0 is an honest market index: the specific-leverage filter
  // compares asset returns against it at matching units, and betas w.r.t. the
  // emitted index are O(1).
  Eigen::VectorXd emit_scale(kf);
  for (int k = 0; k < kf; ++k) {
    const double s = spec.factor_loadings.col(k).cwiseAbs().mean();
    emit_scale[k] = s > 0.0 ? s : 1.0;
  }

  MarketSample sample;
  sample.panel.period_seconds = spec.step_seconds;
  sample.panel.returns.resize(t_len, n);
  sample.panel.timestamps.resize(static_cast<size_t>(t_len));
  sample.panel.assets.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) sample.panel.assets.push_back("A" + std::to_string(i + 1));
  sample.factor_returns.resize(t_len, kf);
  if (want_beta_path) sample.beta_path.resize(t_len, n);

  Eigen::VectorXd factor_now(kf);
  Eigen::VectorXd priv_now(kf);
  for (long t = 0; t < t_len; ++t) {
    sample.panel.timestamps[static_cast<size_t>(t)] = spec.step_seconds * (t + 1);

    for (int k = 0; k < kf; ++k) {
      double value = 0.0;
      if (trend_factor) value += factor_trend[static_cast<size_t>(k)].step(factor_stream);
      if (lag) {
        const double xi1 = factor_stream.gaussian();
        const double xi2 = factor_stream.gaussian();
        const double dw = kern->sqrt_delta * xi1;
        const double innov = kern->chol10 * xi1 + kern->chol11 * xi2;
        const double dl = dw - innov + u_common[k] * (1.0 - kern->a);
        u_common[k] = u_common[k] * kern->a + innov;
        value += noise_scale[k] * dl / kern->sqrt_delta;
      } else {
        value += noise_scale[k] * factor_stream.gaussian();
      }
      factor_now[k] = value;
      sample.factor_returns(t, k) = emit_scale[k] * value;
    }

    const double index_return = emit_scale[0] * factor_now[0];
    double z_drawdown = 0.0;
    if (lev) {
      z_market.update(index_return);
      z_drawdown = -z_market.z();
    }
    double market_relvol = 1.0;
    if (lev && fast_vol_m.warmed() && slow_vol_m.warmed() && slow_vol_m.vol() > 0.0)
      market_relvol = fast_vol_m.vol() / slow_vol_m.vol();

    for (int i = 0; i < n; ++i) {
      RandomStream& rng = asset_stream[static_cast<size_t>(i)];
      double idio_shift = 0.0;
      if (trend_idio) idio_shift = idio_trend[static_cast<size_t>(i)].step(rng);
      if (lag) {
        for (int k = 0; k < kf; ++k) {
          const double u_new = u_private(i, k) * kern->a + kern->priv_innov_std * rng.gaussian();
          priv_now[k] = noise_scale[k] * (u_new - u_private(i, k)) / kern->sqrt_delta;
          u_private(i, k) = u_new;
        }
      }
      const double idio_xi = rng.gaussian();

      double mod = 1.0;
      if (lev) {
        double rel_vol = 1.0;
        const auto& fv = fast_vol[static_cast<size_t>(i)];
        const auto& sv = slow_vol[static_cast<size_t>(i)];
        if (fv.warmed() && sv.warmed() && sv.vol() > 0.0 && market_relvol > 0.0)
          rel_vol = (fv.vol() / sv.vol()) / market_relvol;
        const double z_under = -z_specific[static_cast<size_t>(i)].z();
        mod = leverage_modulation(lev_spec.systematic_slope, lev_spec.specific_slope,
                                  lev_spec.elasticity_exponent, z_drawdown, z_under, rel_vol);
        const double b0 = spec.factor_loadings(i, 0);
        mod = cap_modulation(mod, b0 * b0, other_factor_sq[i], total_var[i]);
      }

      double r = 0.0;
      for (int k = 0; k < kf; ++k) {
        const double loading = spec.factor_loadings(i, k) * (k == 0 ? mod : 1.0);
        r += loading * (factor_now[k] + (lag ? priv_now[k] : 0.0));
      }
      double idio_var = spec.idiosyncratic_vol[i] * spec.idiosyncratic_vol[i];
      if (lev) {
        const double b1 = spec.factor_loadings(i, 0) * mod;
        idio_var = std::max(total_var[i] - b1 * b1 - other_factor_sq[i], 0.0);
      }
      r += std::sqrt(idio_var) *
           (trend_idio ? idio_shift + idio_noise_scale * idio_xi : idio_xi);

      sample.panel.returns(t, i) = r;
      if (want_beta_path)
        sample.beta_path(t, i) = spec.factor_loadings(i, 0) * mod / emit_scale[0];
    }

    if (lev) {
      for (int i = 0; i < n; ++i) {
        z_specific[static_cast<size_t>(i)].update(sample.panel.returns(t, i) - index_return);
        fast_vol[static_cast<size_t>(i)].update(sample.panel.returns(t, i));
        slow_vol[static_cast<size_t>(i)].update(sample.panel.returns(t, i));
      }
      fast_vol_m.update(index_return);
      slow_vol_m.update(index_return);
    }
  }

  sample.panel.validate();
  return sample;
}

ReturnPanel simulate_market(const SyntheticMarketSpec& spec, std::uint64_t seed) {
  return simulate_market_detailed(spec, seed, false).panel;
}

Eigen::MatrixXd population_correlation(const SyntheticMarketSpec& spec) {
  spec.validate();
  if (spec.leverage)
    throw ValidationError("population_correlation: undefined for a leveraged spec");
  const int n = spec.n_assets;
  const int kf = spec.n_factors;

  // Per-factor contemporaneous covariance fraction: the OU trend part is
  // unlagged, the white part carries g(delta/tau) when the lag kernel is on.
  Eigen::VectorXd frac = Eigen::VectorXd::Ones(kf);
  if (spec.lag_relaxation_seconds) {
    const double g = lag_response_fraction(static_cast<double>(spec.step_seconds) /
                                           *spec.lag_relaxation_seconds);
    for (int k = 0; k < kf; ++k) {
      double share = 0.0;
      if (spec.trend && spec.trend_mode == TrendMode::factor) {
        const double s = (*spec.trend)[static_cast<size_t>(k)].stationary_std;
        share = s * s;
      }
      frac[k] = share + (1.0 - share) * g;
    }
  }

  Eigen::MatrixXd cov = spec.factor_loadings * frac.asDiagonal() *
                        spec.factor_loadings.transpose();
  for (int i = 0; i < n; ++i) {
    const double full = spec.factor_loadings.row(i).squaredNorm() +
                        spec.idiosyncratic_vol[i] * spec.idiosyncratic_vol[i];
    cov(i, i) = full;  // private lag top-ups restore the full per-step variance
  }
  Eigen::VectorXd inv_sd = cov.diagonal().array().sqrt().inverse();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  corr.diagonal().setOnes();
  return 0.5 * (corr + corr.transpose());
}

namespace {

// Sign-block loading pattern: factor 1 loads every asset, factor k >= 2 loads
// alternating blocks of size n/2^{k-1} with opposite signs (near-orthogonal
// patterns, so the top eigenvalues separate cleanly).
double block_sign(int asset, int factor, int n_assets) {
  if (factor == 0) return 1.0;
  const long blocks = 1L << factor;
  const long idx = static_cast<long>(asset) * blocks / n_assets;
  return (idx % 2 == 0) ? 1.0 : -1.0;
}

Eigen::VectorXd decreasing_shares(int n_factors, double first, double ratio) {
  Eigen::VectorXd shares(n_factors);
  double s = first;
  for (int k = 0; k < n_factors; ++k) {
    shares[k] = s;
    s *= ratio;
  }
  return shares;
}

SyntheticMarketSpec block_factor_spec(int n_assets, int n_factors, double first_share,
                                      double share_ratio, long horizon_steps, long step_seconds,
                                      double per_step_vol) {
  if (n_factors < 1) throw ValidationError("need at least 1 factor");
  Eigen::VectorXd shares = decreasing_shares(n_factors, first_share, share_ratio);
  if (shares.sum() >= 0.95)
    throw ValidationError("factor variance shares leave no idiosyncratic budget");
  SyntheticMarketSpec spec;
  spec.n_assets = n_assets;
  spec.n_factors = n_factors;
  spec.horizon_steps = horizon_steps;
  spec.step_seconds = step_seconds;
  spec.factor_loadings.resize(n_assets, n_factors);
  for (int i = 0; i < n_assets; ++i)
    for (int k = 0; k < n_factors; ++k)
      spec.factor_loadings(i, k) =
          block_sign(i, k, n_assets) * std::sqrt(shares[k]) * per_step_vol;
  spec.idiosyncratic_vol =
      Eigen::VectorXd::Constant(n_assets, std::sqrt(1.0 - shares.sum()) * per_step_vol);
  return spec;
}

}  // namespace

SyntheticMarketSpec equicorrelation_spec(int n_assets, double rho, long horizon_steps,
                                         long step_seconds, double per_step_vol) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ValidationError("equicorrelation_spec: rho must lie in [0, 1)");
  SyntheticMarketSpec spec;
  spec.n_assets = n_assets;
  spec.n_factors = 1;
  spec.horizon_steps = horizon_steps;
  spec.step_seconds = step_seconds;
  spec.factor_loadings = Eigen::MatrixXd::Constant(n_assets, 1, std::sqrt(rho) * per_step_vol);
  spec.idiosyncratic_vol =
      Eigen::VectorXd::Constant(n_assets, std::sqrt(1.0 - rho) * per_step_vol);
  return spec;
}

SyntheticMarketSpec lagged_factor_spec(int n_assets, int n_factors, double tau_seconds,
                                       long horizon_steps, long step_seconds,
                                       double per_step_vol) {
  SyntheticMarketSpec spec = block_factor_spec(n_assets, n_factors, 0.35, 0.55, horizon_steps,
                                               step_seconds, per_step_vol);
  spec.lag_relaxation_seconds = tau_seconds;
  return spec;
}

SyntheticMarketSpec linear_exposure_spec(int n_assets, long horizon_steps, double style_spread,
                                         double market_loading, long step_seconds,
                                         double per_step_vol) {
  if (!(style_spread > 0.0)) throw ValidationError("linear_exposure_spec: spread must be > 0");
  SyntheticMarketSpec spec;
  spec.n_assets = n_assets;
  spec.n_factors = 2;
  spec.horizon_steps = horizon_steps;
  spec.step_seconds = step_seconds;
  spec.factor_loadings.resize(n_assets, 2);
  spec.idiosyncratic_vol.resize(n_assets);
  const double min_idio_sq = 0.25;
  const double total =
      market_loading * market_loading + 0.25 * style_spread * style_spread + min_idio_sq;
  for (int i = 0; i < n_assets; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n_assets);
    const double s = style_spread * (u - 0.5);
    spec.factor_loadings(i, 0) = market_loading * per_step_vol;
    spec.factor_loadings(i, 1) = s * per_step_vol;
    // equal total variance across assets, so correlation loadings stay linear
    spec.idiosyncratic_vol[i] =
        std::sqrt(total - market_loading * market_loading - s * s) * per_step_vol;
  }
  return spec;
}

SyntheticMarketSpec factor_trend_spec(int n_assets, double rho, double trend_relaxation_periods,
                                      double trend_variance_share, long horizon_steps,
                                      long step_seconds, double per_step_vol) {
  if (!(trend_variance_share >= 0.0 && trend_variance_share <= 1.0))
    throw ValidationError("factor_trend_spec: variance share must lie in [0, 1]");
  SyntheticMarketSpec spec =
      equicorrelation_spec(n_assets, rho, horizon_steps, step_seconds, per_step_vol);
  OuParams trend;
  trend.relaxation_periods = trend_relaxation_periods;
  trend.stationary_std = std::sqrt(trend_variance_share);
  trend.long_run_mean = 0.0;
  spec.trend = std::vector<OuParams>{trend};
  spec.trend_mode = TrendMode::factor;
  return spec;
}

SyntheticMarketSpec leverage_market_spec(int n_assets, int n_factors, const LeverageSpec& leverage,
                                         long horizon_steps, long step_seconds,
                                         double per_step_vol) {
  SyntheticMarketSpec spec = block_factor_spec(n_assets, n_factors, 0.30, 0.50, horizon_steps,
                                               step_seconds, per_step_vol);
  spec.leverage = leverage;
  return spec;
}

}  // namespace corrkit
