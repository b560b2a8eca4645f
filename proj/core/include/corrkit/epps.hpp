#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrkit/panel.hpp"

namespace corrkit {

struct ScaleCurve {
  std::vector<long long> horizons_seconds;  // ascending
  int eigen_index = 1;                      // 1-based k
  Eigen::VectorXd values;                   // λ_k at each horizon
};

struct ScaleCurveSet {
  std::vector<ScaleCurve> curves;            // one per k = 1..k_max
  std::vector<long long> dropped_horizons;   // horizons with < 30 samples
};

struct LagLawFit {
  double lambda_inf = 1.0;
  double tau_c_seconds = 1.0;
  double rms_relative_error = 0.0;
};

// g(x) = 1 - (1/x)(1 - e^{-x}), series-expanded near 0. Shared between the
// law below and the lagged synthetic generator.
double lag_response_fraction(double x);

// λ(T) = 1 + (λ_inf - 1)·g(T/τ_c), g(x) = 1 - (1/x)(1 - e^{-x}): the
// aggregated-variance fraction a lagged exponential response has absorbed by
// horizon T. λ→1 as T→0 (off-diagonals vanish), λ→λ_inf as T→∞.
double lag_law(double t_seconds, double lambda_inf, double tau_c_seconds);

// For each horizon (a multiple of the panel period): aggregate, estimate the
// correlation matrix, record λ_1..λ_{k_max}. Horizons leaving fewer than 30
// aggregated samples are dropped, not fatal.
ScaleCurveSet eigenvalue_scale_curve(const ReturnPanel& panel,
                                     const std::vector<long long>& horizons_seconds, int k_max);

// Least-squares (λ_inf, τ_c) on a measured curve: coarse log-grid over τ_c
// refined by golden-section search, λ_inf in closed form at each τ_c.
// Requires >= 4 horizons spanning at least a decade. A non-monotone curve
// still fits — the rms relative error carries the verdict.
LagLawFit fit_lag_law(const ScaleCurve& curve);

}  // namespace corrkit
