#include "corrkit/epps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corrkit/correlation.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/market_sim.hpp"

namespace corrkit {

double lag_law(double t_seconds, double lambda_inf, double tau_c_seconds) {
  if (!(t_seconds > 0.0)) throw ValidationError("lag_law: horizon must be positive");
  if (!(lambda_inf > 0.0)) throw ValidationError("lag_law: lambda_inf must be positive");
  if (!(tau_c_seconds > 0.0)) throw ValidationError("lag_law: tau_c must be positive");
  return 1.0 + (lambda_inf - 1.0) * lag_response_fraction(t_seconds / tau_c_seconds);
}

ScaleCurveSet eigenvalue_scale_curve(const ReturnPanel& panel,
                                     const std::vector<long long>& horizons_seconds, int k_max) {
  panel.validate();
  if (k_max < 1 || k_max > panel.n_assets())
    throw ValidationError("eigenvalue_scale_curve: k_max must lie in [1, N]");
  if (horizons_seconds.empty())
    throw ValidationError("eigenvalue_scale_curve: need at least one horizon");

  std::vector<long long> horizons = horizons_seconds;
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  ScaleCurveSet out;
  std::vector<long long> kept;
  std::vector<Eigen::VectorXd> spectra;
  for (long long h : horizons) {
    if (h <= 0 || h % panel.period_seconds != 0)
      throw ValidationError("eigenvalue_scale_curve: horizon " + std::to_string(h) +
                            " s is not a multiple of the panel period");
    const long long m = h / panel.period_seconds;
    if (panel.n_periods() / m < 30) {  // too few aggregated samples: drop
      out.dropped_horizons.push_back(h);
      continue;
    }
    ReturnPanel agg = aggregate_returns(panel, static_cast<int>(m));
    CorrelationModel model = correlation_matrix(agg, Estimator::pearson());
    EigenSystem es = eigen_decompose(model);
    kept.push_back(h);
    spectra.push_back(es.eigenvalues.head(k_max));
  }
  if (kept.empty())
    throw ValidationError("eigenvalue_scale_curve: every horizon was dropped (< 30 samples)");

  for (int k = 0; k < k_max; ++k) {
    ScaleCurve curve;
    curve.horizons_seconds = kept;
    curve.eigen_index = k + 1;
    curve.values.resize(static_cast<Eigen::Index>(kept.size()));
    for (size_t i = 0; i < kept.size(); ++i)
      curve.values[static_cast<Eigen::Index>(i)] = spectra[i][k];
    out.curves.push_back(std::move(curve));
  }
  return out;
}

namespace {

// Σ(λ_i - 1 - a·g_i)² minimized over a in closed form; returns the SSE.
double lag_fit_sse(const ScaleCurve& curve, double tau, double* amplitude) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < curve.horizons_seconds.size(); ++i) {
    const double g =
        lag_response_fraction(static_cast<double>(curve.horizons_seconds[i]) / tau);
    num += g * (curve.values[static_cast<Eigen::Index>(i)] - 1.0);
    den += g * g;
  }
  const double a = den > 0.0 ? num / den : 0.0;
  double sse = 0.0;
  for (size_t i = 0; i < curve.horizons_seconds.size(); ++i) {
    const double g =
        lag_response_fraction(static_cast<double>(curve.horizons_seconds[i]) / tau);
    const double resid = curve.values[static_cast<Eigen::Index>(i)] - 1.0 - a * g;
    sse += resid * resid;
  }
  if (amplitude) *amplitude = a;
  return sse;
}

}  // namespace

LagLawFit fit_lag_law(const ScaleCurve& curve) {
  const size_t n = curve.horizons_seconds.size();
  if (n < 4 || static_cast<size_t>(curve.values.size()) != n)
    throw ValidationError("fit_lag_law: need at least 4 horizons");
  for (size_t i = 1; i < n; ++i)
    if (curve.horizons_seconds[i] <= curve.horizons_seconds[i - 1])
      throw ValidationError("fit_lag_law: horizons must be strictly increasing");
  const double t_min = static_cast<double>(curve.horizons_seconds.front());
  const double t_max = static_cast<double>(curve.horizons_seconds.back());
  if (!(t_max >= 10.0 * t_min))
    throw ValidationError("fit_lag_law: horizons must span at least one decade");
  if (!(curve.values.minCoeff() > 0.0))
    throw ValidationError("fit_lag_law: eigenvalues must be positive");

  // coarse pass over log τ, then golden-section inside the best bracket
  const double lo = std::log(t_min / 50.0);
  const double hi = std::log(t_max * 50.0);
  const int grid = 80;
  double best_log_tau = lo;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double lt = lo + (hi - lo) * static_cast<double>(i) / grid;
    const double sse = lag_fit_sse(curve, std::exp(lt), nullptr);
    if (sse < best_sse) {
      best_sse = sse;
      best_log_tau = lt;
    }
  }
  const double step = (hi - lo) / grid;
  double a = std::max(lo, best_log_tau - step);
  double b = std::min(hi, best_log_tau + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = lag_fit_sse(curve, std::exp(x1), nullptr);
  double f2 = lag_fit_sse(curve, std::exp(x2), nullptr);
  for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = lag_fit_sse(curve, std::exp(x1), nullptr);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = lag_fit_sse(curve, std::exp(x2), nullptr);
    }
  }

  LagLawFit fit;
  fit.tau_c_seconds = std::exp(0.5 * (a + b));
  double amplitude = 0.0;
  lag_fit_sse(curve, fit.tau_c_seconds, &amplitude);
  fit.lambda_inf = std::max(1.0 + amplitude, 1e-12);

  double rel_sq = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double model = lag_law(static_cast<double>(curve.horizons_seconds[i]), fit.lambda_inf,
                                 fit.tau_c_seconds);
    const double obs = curve.values[static_cast<Eigen::Index>(i)];
    const double rel = (model - obs) / obs;
    rel_sq += rel * rel;
  }
  fit.rms_relative_error = std::sqrt(rel_sq / static_cast<double>(n));
  return fit;
}

}  // namespace corrkit
