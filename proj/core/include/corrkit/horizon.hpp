#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrkit/epps.hpp"
#include "corrkit/panel.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

// Sample autocorrelations of the portfolio return series wᵀr at lags
// 1..max_lag (lag 0 included, identically 1) with Bartlett standard errors.
AcfProfile autocorrelation_profile(const ReturnPanel& panel, const Eigen::VectorXd& w,
                                   int max_lag);

// eigenvalue_scale_curve on day-denominated horizons (daily-and-above
// aggregation of a daily or finer panel).
ScaleCurveSet horizon_eigen_curve(const ReturnPanel& panel, const std::vector<int>& horizons_days,
                                  int k_max);

}  // namespace corrkit
