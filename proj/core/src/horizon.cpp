#include "corrkit/horizon.hpp"

#include "corrkit/errors.hpp"

namespace corrkit {

AcfProfile autocorrelation_profile(const ReturnPanel& panel, const Eigen::VectorXd& w,
                                   int max_lag) {
  panel.validate();
  if (w.size() != panel.n_assets())
    throw ValidationError("autocorrelation_profile: weight size mismatch");
  if (max_lag < 1) throw ValidationError("autocorrelation_profile: max_lag must be >= 1");
  if (static_cast<Eigen::Index>(max_lag) > panel.n_periods() / 10)
    throw ValidationError("autocorrelation_profile: max_lag exceeds T/10");
  Eigen::VectorXd series = panel.returns * w;
  return autocorrelation(series, max_lag);
}

ScaleCurveSet horizon_eigen_curve(const ReturnPanel& panel, const std::vector<int>& horizons_days,
                                  int k_max) {
  std::vector<long long> horizons_seconds;
  horizons_seconds.reserve(horizons_days.size());
  for (int d : horizons_days) {
    if (d < 1) throw ValidationError("horizon_eigen_curve: horizons must be >= 1 day");
    horizons_seconds.push_back(86400LL * d);
  }
  return eigenvalue_scale_curve(panel, horizons_seconds, k_max);
}

}  // namespace corrkit
