#include "corrkit/reactive_beta.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "corrkit/correlation.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/maxvar.hpp"
#include "corrkit/random.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

void ReactiveParams::validate() const {
  if (!std::isfinite(systematic_slope) || !std::isfinite(specific_slope))
    throw ValidationError("reactive slopes must be finite");
  if (!(elasticity_exponent >= 0.0 && elasticity_exponent <= 2.0))
    throw ValidationError("elasticity_exponent must lie in [0, 2]");
  if (!(vol_halflife_periods > 0.0) || !(z_halflife_periods > 0.0))
    throw ValidationError("reactive halflives must be positive");
}

std::string beta_method_name(BetaMethod method) {
  switch (method) {
    case BetaMethod::ols: return "ols";
    case BetaMethod::reactive: return "reactive";
    case BetaMethod::trimean_quantile: return "trimean_quantile";
  }
  return "unknown";
}

std::string bias_strategy_name(BiasStrategy strategy) {
  switch (strategy) {
    case BiasStrategy::momentum: return "momentum";
    case BiasStrategy::low_beta: return "low_beta";
    case BiasStrategy::size_proxy: return "size_proxy";
    case BiasStrategy::value_proxy: return "value_proxy";
  }
  return "unknown";
}

Eigen::VectorXd predictable_vol_path(const Eigen::VectorXd& series, double halflife, int burn_in) {
  if (!(halflife > 0.0)) throw ValidationError("vol halflife must be positive");
  const Eigen::Index n = series.size();
  if (n < 1) throw ValidationError("volatility path needs a non-empty series");
  if (burn_in < 1) throw ValidationError("burn_in must be positive");

  const Eigen::Index seed_n = std::min<Eigen::Index>(burn_in, n);
  double seed_sq = 0.0;
  for (Eigen::Index t = 0; t < seed_n; ++t) seed_sq += series[t] * series[t];
  const double seed = std::sqrt(seed_sq / static_cast<double>(seed_n));

  Eigen::VectorXd out(n);
  EwmaVol filter(halflife, burn_in);
  for (Eigen::Index t = 0; t < n; ++t) {
    // Entry t must not depend on series[t]; the filter is read before update.
    out[t] = filter.warmed() ? filter.vol() : seed;
    filter.update(series[t]);
  }
  return out;
}

namespace {

void check_alignment(const ReturnPanel& panel, const Eigen::VectorXd& index_returns) {
  if (index_returns.size() != panel.returns.rows())
    throw ValidationError("index series length must match the panel's period count");
  for (Eigen::Index t = 0; t < index_returns.size(); ++t)
    if (!std::isfinite(index_returns[t])) throw ValidationError("index returns must be finite");
}

// Rolling OLS slopes of each column of y on x over trailing `window` rows;
// row t of the result is the estimate through t. Rows before the first full
// window repeat the estimate at t = window-1.
Eigen::MatrixXd rolling_ols_slopes(const Eigen::VectorXd& x, const Eigen::MatrixXd& y,
                                   int window) {
  const Eigen::Index T = x.size();
  const Eigen::Index N = y.cols();
  const Eigen::Index w = window;

  Eigen::VectorXd px(T + 1), pxx(T + 1);
  px[0] = pxx[0] = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    px[t + 1] = px[t] + x[t];
    pxx[t + 1] = pxx[t] + x[t] * x[t];
  }
  Eigen::MatrixXd py(T + 1, N), pxy(T + 1, N);
  py.row(0).setZero();
  pxy.row(0).setZero();
  for (Eigen::Index t = 0; t < T; ++t) {
    py.row(t + 1) = py.row(t) + y.row(t);
    pxy.row(t + 1) = pxy.row(t) + x[t] * y.row(t);
  }

  Eigen::MatrixXd slopes(T, N);
  const double nw = static_cast<double>(w);
  for (Eigen::Index t = w - 1; t < T; ++t) {
    const Eigen::Index lo = t + 1 - w;
    const double sx = px[t + 1] - px[lo];
    const double sxx = pxx[t + 1] - pxx[lo];
    const double denom = nw * sxx - sx * sx;
    if (!(denom > 0.0))
      throw ValidationError("degenerate index: zero variance over a rolling window");
    for (Eigen::Index i = 0; i < N; ++i) {
      const double sy = py(t + 1, i) - py(lo, i);
      const double sxy = pxy(t + 1, i) - pxy(lo, i);
      slopes(t, i) = (nw * sxy - sx * sy) / denom;
    }
  }
  for (Eigen::Index t = 0; t < w - 1; ++t) slopes.row(t) = slopes.row(w - 1);
  return slopes;
}

// Quantile-regression slope of y on x via iteratively reweighted least
// squares. Exactly linear data converges to the OLS fit in one pass.
double quantile_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double q) {
  auto [b, a] = ols_fit(x, y);
  const Eigen::Index n = x.size();
  for (int iter = 0; iter < 200; ++iter) {
    double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double r = y[t] - a - b * x[t];
      const double wt = (r >= 0.0 ? q : 1.0 - q) / std::max(std::abs(r), 1e-8);
      sw += wt;
      swx += wt * x[t];
      swxx += wt * x[t] * x[t];
      swy += wt * y[t];
      swxy += wt * x[t] * y[t];
    }
    const double denom = sw * swxx - swx * swx;
    if (!(std::abs(denom) > 0.0)) break;
    const double nb = (sw * swxy - swx * swy) / denom;
    const double na = (swy - nb * swx) / sw;
    const bool done = std::abs(nb - b) + std::abs(na - a) < 1e-8;
    b = nb;
    a = na;
    if (done) break;
  }
  return b;
}

double trimean_quantile_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return 0.25 * quantile_slope(x, y, 0.25) + 0.5 * quantile_slope(x, y, 0.5) +
         0.25 * quantile_slope(x, y, 0.75);
}

}  // namespace

Eigen::MatrixXd reactive_vol_paths(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                                   const ReactiveParams& params) {
  panel.validate();
  params.validate();
  check_alignment(panel, index_returns);
  const Eigen::Index T = panel.returns.rows();
  const Eigen::Index N = panel.returns.cols();

  Eigen::MatrixXd base(T, N);
  for (Eigen::Index i = 0; i < N; ++i)
    base.col(i) = predictable_vol_path(panel.returns.col(i), params.vol_halflife_periods);

  // Same filter stack and update schedule as the leveraged generator: the
  // index drawdown z-score sees the current index return, everything else is
  // strictly trailing.
  EwmaZScore z_market(params.z_halflife_periods);
  EwmaVol fast_m(params.vol_halflife_periods), slow_m(5.0 * params.vol_halflife_periods);
  std::vector<EwmaZScore> z_specific;
  std::vector<EwmaVol> fast_a, slow_a;
  for (Eigen::Index i = 0; i < N; ++i) {
    z_specific.emplace_back(params.z_halflife_periods);
    fast_a.emplace_back(params.vol_halflife_periods);
    slow_a.emplace_back(5.0 * params.vol_halflife_periods);
  }

  Eigen::MatrixXd vols(T, N);
  for (Eigen::Index t = 0; t < T; ++t) {
    z_market.update(index_returns[t]);
    const double z_drawdown = -z_market.z();
    double market_relvol = 1.0;
    if (fast_m.warmed() && slow_m.warmed() && slow_m.vol() > 0.0)
      market_relvol = fast_m.vol() / slow_m.vol();

    for (Eigen::Index i = 0; i < N; ++i) {
      const auto iu = static_cast<size_t>(i);
      double rel_vol = 1.0;
      if (fast_a[iu].warmed() && slow_a[iu].warmed() && slow_a[iu].vol() > 0.0 &&
          market_relvol > 0.0)
        rel_vol = (fast_a[iu].vol() / slow_a[iu].vol()) / market_relvol;
      const double z_under = -z_specific[iu].z();
      const double mod =
          leverage_modulation(params.systematic_slope, params.specific_slope,
                              params.elasticity_exponent, z_drawdown, z_under, rel_vol);
      vols(t, i) = base(t, i) * mod;
    }

    for (Eigen::Index i = 0; i < N; ++i) {
      const auto iu = static_cast<size_t>(i);
      z_specific[iu].update(panel.returns(t, i) - index_returns[t]);
      fast_a[iu].update(panel.returns(t, i));
      slow_a[iu].update(panel.returns(t, i));
    }
    fast_m.update(index_returns[t]);
    slow_m.update(index_returns[t]);
  }
  return vols;
}

ReturnPanel reactive_normalize(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                               const ReactiveParams& params) {
  const Eigen::MatrixXd vols = reactive_vol_paths(panel, index_returns, params);
  ReturnPanel out = panel;
  for (Eigen::Index t = 0; t < vols.rows(); ++t)
    for (Eigen::Index i = 0; i < vols.cols(); ++i) {
      if (!(vols(t, i) > 0.0))
        throw NumericError("reactive volatility vanished for asset '" +
                           panel.assets[static_cast<size_t>(i)] + "'");
      out.returns(t, i) = panel.returns(t, i) / vols(t, i);
    }
  return out;
}

std::vector<BetaEstimate> estimate_beta(const ReturnPanel& panel,
                                        const Eigen::VectorXd& index_returns, BetaMethod method,
                                        int window, const ReactiveParams& params) {
  panel.validate();
  params.validate();
  check_alignment(panel, index_returns);
  const Eigen::Index T = panel.returns.rows();
  const Eigen::Index N = panel.returns.cols();
  if (window < 2 || window > T)
    throw ValidationError("beta window must lie in [2, number of periods]");

  const Eigen::VectorXd x_tail = index_returns.tail(window);
  if (!(variance(x_tail) > 0.0))
    throw ValidationError("degenerate index: zero variance over the estimation window");

  std::vector<BetaEstimate> out(static_cast<size_t>(N));
  for (auto& e : out) {
    e.method = method;
    e.window_periods = window;
  }

  switch (method) {
    case BetaMethod::ols: {
      for (Eigen::Index i = 0; i < N; ++i)
        out[static_cast<size_t>(i)].beta =
            ols_fit(x_tail, panel.returns.col(i).tail(window)).first;
      break;
    }
    case BetaMethod::reactive: {
      const Eigen::MatrixXd vols = reactive_vol_paths(panel, index_returns, params);
      const Eigen::VectorXd vm =
          predictable_vol_path(index_returns, params.vol_halflife_periods);
      for (Eigen::Index t = 0; t < T; ++t)
        if (!(vm[t] > 0.0)) throw NumericError("index volatility vanished");
      const Eigen::VectorXd xn = (index_returns.array() / vm.array()).matrix().tail(window);
      for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::VectorXd yn(window);
        for (int s = 0; s < window; ++s) {
          const Eigen::Index t = T - window + s;
          if (!(vols(t, i) > 0.0))
            throw NumericError("reactive volatility vanished for asset '" +
                               panel.assets[static_cast<size_t>(i)] + "'");
          yn[s] = panel.returns(t, i) / vols(t, i);
        }
        const double slope = ols_fit(xn, yn).first;
        out[static_cast<size_t>(i)].beta = slope * vols(T - 1, i) / vm[T - 1];
      }
      break;
    }
    case BetaMethod::trimean_quantile: {
      for (Eigen::Index i = 0; i < N; ++i)
        out[static_cast<size_t>(i)].beta =
            trimean_quantile_slope(x_tail, panel.returns.col(i).tail(window));
      break;
    }
  }
  return out;
}

Eigen::MatrixXd rolling_beta_path(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                                  BetaMethod method, int window, const ReactiveParams& params) {
  panel.validate();
  params.validate();
  check_alignment(panel, index_returns);
  const Eigen::Index T = panel.returns.rows();
  const Eigen::Index N = panel.returns.cols();
  if (window < 2 || window > T)
    throw ValidationError("beta window must lie in [2, number of periods]");

  switch (method) {
    case BetaMethod::ols:
      return rolling_ols_slopes(index_returns, panel.returns, window);
    case BetaMethod::reactive: {
      const Eigen::MatrixXd vols = reactive_vol_paths(panel, index_returns, params);
      const Eigen::VectorXd vm =
          predictable_vol_path(index_returns, params.vol_halflife_periods);
      Eigen::MatrixXd yn(T, N);
      Eigen::VectorXd xn(T);
      for (Eigen::Index t = 0; t < T; ++t) {
        if (!(vm[t] > 0.0)) throw NumericError("index volatility vanished");
        xn[t] = index_returns[t] / vm[t];
        for (Eigen::Index i = 0; i < N; ++i) {
          if (!(vols(t, i) > 0.0))
            throw NumericError("reactive volatility vanished for asset '" +
                               panel.assets[static_cast<size_t>(i)] + "'");
          yn(t, i) = panel.returns(t, i) / vols(t, i);
        }
      }
      Eigen::MatrixXd slopes = rolling_ols_slopes(xn, yn, window);
      for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::Index tc = std::max<Eigen::Index>(t, window - 1);
        for (Eigen::Index i = 0; i < N; ++i) slopes(t, i) *= vols(tc, i) / vm[tc];
      }
      return slopes;
    }
    case BetaMethod::trimean_quantile: {
      Eigen::MatrixXd slopes(T, N);
      for (Eigen::Index t = window - 1; t < T; ++t) {
        const Eigen::VectorXd x = index_returns.segment(t + 1 - window, window);
        if (!(variance(x) > 0.0))
          throw ValidationError("degenerate index: zero variance over a rolling window");
        for (Eigen::Index i = 0; i < N; ++i)
          slopes(t, i) = trimean_quantile_slope(x, panel.returns.col(i).segment(t + 1 - window,
                                                                                window));
      }
      for (Eigen::Index t = 0; t < window - 1; ++t) slopes.row(t) = slopes.row(window - 1);
      return slopes;
    }
  }
  throw ValidationError("unknown beta method");
}

namespace {

// Trailing compounded return over `window` periods ending at t (inclusive);
// rows before the first full window are left unset by the caller's t0 guard.
Eigen::MatrixXd momentum_criterion(const Eigen::MatrixXd& returns, int window) {
  const Eigen::Index T = returns.rows();
  const Eigen::Index N = returns.cols();
  Eigen::MatrixXd crit = Eigen::MatrixXd::Zero(T, N);
  for (Eigen::Index t = window - 1; t < T; ++t)
    for (Eigen::Index i = 0; i < N; ++i) {
      double acc = 1.0;
      for (Eigen::Index s = t - window + 1; s <= t; ++s) acc *= 1.0 + returns(s, i);
      crit(t, i) = acc - 1.0;
    }
  return crit;
}

// Criterion value at each period = most recent criterion row on or before the
// period's timestamp (first row before any observation date).
Eigen::MatrixXd sample_criterion_panel(const CriterionPanel& criterion,
                                       const std::vector<std::int64_t>& timestamps,
                                       const std::vector<std::string>& assets) {
  criterion.validate();
  if (criterion.assets != assets)
    throw ValidationError("criterion panel asset list must match the return panel");
  const auto T = static_cast<Eigen::Index>(timestamps.size());
  const Eigen::Index N = criterion.values.cols();
  Eigen::MatrixXd crit(T, N);
  for (Eigen::Index t = 0; t < T; ++t) {
    size_t row = 0;
    for (size_t d = 0; d < criterion.dates.size(); ++d)
      if (criterion.dates[d] <= timestamps[static_cast<size_t>(t)]) row = d;
    crit.row(t) = criterion.values.row(static_cast<Eigen::Index>(row));
  }
  return crit;
}

}  // namespace

BiasTestReport bias_test(const ReturnPanel& panel, const Eigen::VectorXd& index_returns,
                         BiasStrategy strategy, BetaMethod beta_method,
                         const std::optional<CriterionPanel>& criterion,
                         const ReactiveParams& params) {
  panel.validate();
  params.validate();
  check_alignment(panel, index_returns);
  const Eigen::Index T = panel.returns.rows();

  // A long beta window keeps the neutralization's errors-in-variables
  // attenuation small: hedging against a noisy beta removes only the
  // reliability fraction of the true exposure, which would mask the
  // method comparison at short windows.
  constexpr int kBetaWindow = 250;
  constexpr int kMomentumWindow = 60;
  constexpr Eigen::Index kWarmup = 250;
  if (T < kWarmup + 2)
    throw ValidationError("bias test needs at least 252 periods");

  Eigen::MatrixXd crit;
  switch (strategy) {
    case BiasStrategy::momentum:
      crit = momentum_criterion(panel.returns, kMomentumWindow);
      break;
    case BiasStrategy::low_beta:
      crit = -rolling_ols_slopes(index_returns, panel.returns, kBetaWindow);
      break;
    case BiasStrategy::size_proxy:
    case BiasStrategy::value_proxy:
      if (!criterion)
        throw ValidationError("size/value strategies need a criterion panel");
      crit = sample_criterion_panel(*criterion, panel.timestamps, panel.assets);
      break;
  }

  const Eigen::MatrixXd betas =
      rolling_beta_path(panel, index_returns, beta_method, kBetaWindow, params);

  std::vector<double> port, mkt;
  for (Eigen::Index t = kWarmup; t + 1 < T; ++t) {
    Eigen::VectorXd w = rank_weights(crit.row(t).transpose());
    w = neutralize(w, betas.row(t).transpose(), {});
    port.push_back(w.dot(panel.returns.row(t + 1).transpose()));
    mkt.push_back(index_returns[t + 1]);
  }

  const auto n = static_cast<Eigen::Index>(port.size());
  Eigen::VectorXd p = Eigen::Map<Eigen::VectorXd>(port.data(), n);
  Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(mkt.data(), n);

  BiasTestReport report;
  report.strategy = bias_strategy_name(strategy);
  report.beta_method = beta_method_name(beta_method);
  report.residual_beta = ols_fit(m, p).first;
  const double se = ols_slope_stderr(m, p);
  report.t_stat = se > 0.0 ? report.residual_beta / se : 0.0;
  report.n_obs = static_cast<int>(n);
  return report;
}

namespace {

// Pearson eigenvalues of a row-subset of the panel, via a disposable panel
// with fresh uniform timestamps (row selection breaks the original spacing).
Eigen::VectorXd subset_eigenvalues(const ReturnPanel& panel, const std::vector<Eigen::Index>& rows,
                                   int k_max) {
  ReturnPanel sub;
  sub.period_seconds = panel.period_seconds;
  sub.assets = panel.assets;
  sub.timestamps.resize(rows.size());
  for (size_t r = 0; r < rows.size(); ++r)
    sub.timestamps[r] = static_cast<std::int64_t>(r + 1) * panel.period_seconds;
  sub.returns.resize(static_cast<Eigen::Index>(rows.size()), panel.returns.cols());
  for (size_t r = 0; r < rows.size(); ++r)
    sub.returns.row(static_cast<Eigen::Index>(r)) = panel.returns.row(rows[r]);
  const CorrelationModel model = correlation_matrix(sub, Estimator::pearson());
  return eigen_decompose(model).eigenvalues.head(k_max);
}

}  // namespace

LeverageEigenReport leverage_eigen_test(const ReturnPanel& panel,
                                        const Eigen::VectorXd& index_returns, int k_max,
                                        double quantile, int n_boot, std::uint64_t seed) {
  panel.validate();
  check_alignment(panel, index_returns);
  const Eigen::Index T = panel.returns.rows();
  const Eigen::Index N = panel.returns.cols();
  if (T < 500) throw ValidationError("leverage eigen test needs at least 500 periods");
  if (!(quantile > 0.0 && quantile <= 0.5))
    throw ValidationError("regime quantile must lie in (0, 0.5]");
  if (k_max < 1 || k_max > N) throw ValidationError("k_max must lie in [1, number of assets]");
  if (n_boot < 2) throw ValidationError("n_boot must be at least 2");

  const auto n_regime = static_cast<Eigen::Index>(
      std::floor(quantile * static_cast<double>(T)));
  if (n_regime < 30)
    throw ValidationError("regime slices need at least 30 periods; increase T or the quantile");

  std::vector<Eigen::Index> order(static_cast<size_t>(T));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return index_returns[a] != index_returns[b] ? index_returns[a] < index_returns[b] : a < b;
  });
  const std::vector<Eigen::Index> down(order.begin(), order.begin() + n_regime);
  const std::vector<Eigen::Index> up(order.end() - n_regime, order.end());

  const Eigen::VectorXd lam_down = subset_eigenvalues(panel, down, k_max);
  const Eigen::VectorXd lam_up = subset_eigenvalues(panel, up, k_max);

  std::vector<std::vector<double>> boot_ratios(static_cast<size_t>(k_max));
  RandomStream root(seed);
  std::vector<Eigen::Index> rows(static_cast<size_t>(n_regime));
  for (int b = 0; b < n_boot; ++b) {
    RandomStream rng_down = root.substream(static_cast<std::uint64_t>(2 * b));
    RandomStream rng_up = root.substream(static_cast<std::uint64_t>(2 * b + 1));
    for (auto& r : rows)
      r = down[static_cast<size_t>(rng_down.uniform_int(static_cast<std::uint64_t>(n_regime)))];
    const Eigen::VectorXd bd = subset_eigenvalues(panel, rows, k_max);
    for (auto& r : rows)
      r = up[static_cast<size_t>(rng_up.uniform_int(static_cast<std::uint64_t>(n_regime)))];
    const Eigen::VectorXd bu = subset_eigenvalues(panel, rows, k_max);
    for (int k = 0; k < k_max; ++k)
      boot_ratios[static_cast<size_t>(k)].push_back(bd[k] / bu[k]);
  }

  LeverageEigenReport report;
  report.n_down = static_cast<int>(n_regime);
  report.n_up = static_cast<int>(n_regime);
  report.quantile = quantile;
  for (int k = 0; k < k_max; ++k) {
    auto& r = boot_ratios[static_cast<size_t>(k)];
    std::sort(r.begin(), r.end());
    const auto last = static_cast<double>(r.size() - 1);
    RegimeEigenMode mode;
    mode.k = k + 1;
    mode.lambda_down = lam_down[k];
    mode.lambda_up = lam_up[k];
    mode.ratio = lam_down[k] / lam_up[k];
    mode.ci_low = r[static_cast<size_t>(std::floor(0.025 * last))];
    mode.ci_high = r[static_cast<size_t>(std::ceil(0.975 * last))];
    report.modes.push_back(mode);
  }
  return report;
}

}  // namespace corrkit
