#include "corrkit/ou_process.hpp"

#include <cmath>

#include "corrkit/errors.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

void OuParams::validate() const {
  if (!(relaxation_periods > 0.0))
    throw ValidationError("OuParams: relaxation_periods must be positive");
  if (!(stationary_std >= 0.0)) throw ValidationError("OuParams: stationary_std must be >= 0");
  if (!std::isfinite(long_run_mean)) throw ValidationError("OuParams: long_run_mean not finite");
}

OuStepper::OuStepper(const OuParams& params) : p_(params) {
  p_.validate();
  decay_ = std::exp(-1.0 / p_.relaxation_periods);
  innov_std_ = p_.stationary_std * std::sqrt(1.0 - decay_ * decay_);
  x_ = p_.long_run_mean;
}

double OuStepper::init_stationary(RandomStream& rng) {
  x_ = p_.long_run_mean + p_.stationary_std * rng.gaussian();
  return x_;
}

double OuStepper::step(RandomStream& rng) {
  x_ = p_.long_run_mean + (x_ - p_.long_run_mean) * decay_ + innov_std_ * rng.gaussian();
  return x_;
}

Eigen::VectorXd simulate_ou(const OuParams& params, long n_steps, std::uint64_t seed) {
  if (n_steps < 1) throw ValidationError("simulate_ou: n_steps must be >= 1");
  RandomStream rng(seed);
  OuStepper ou(params);
  Eigen::VectorXd out(n_steps);
  out[0] = ou.init_stationary(rng);
  for (long t = 1; t < n_steps; ++t) out[t] = ou.step(rng);
  return out;
}

OuParams fit_ou_lag1(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  if (n < 3) throw ValidationError("fit_ou_lag1: need at least 3 observations");
  const Eigen::VectorXd x = series.head(n - 1);
  const Eigen::VectorXd y = series.tail(n - 1);

  double slope = 0.0, intercept = 0.0;
  try {
    std::tie(slope, intercept) = ols_fit(x, y);
  } catch (const NumericError&) {
    throw NumericError("fit_ou_lag1: non-stationary series (constant input)");
  }
  if (!(slope > 0.0 && slope < 1.0))
    throw NumericError("fit_ou_lag1: non-stationary series (lag-1 slope " + std::to_string(slope) +
                       " outside (0,1))");

  OuParams p;
  p.relaxation_periods = -1.0 / std::log(slope);
  p.long_run_mean = intercept / (1.0 - slope);
  const Eigen::ArrayXd resid = y.array() - slope * x.array() - intercept;
  const double resvar = resid.square().sum() / static_cast<double>(n - 1);
  p.stationary_std = std::sqrt(std::max(resvar / (1.0 - slope * slope), 0.0));
  return p;
}

}  // namespace corrkit
