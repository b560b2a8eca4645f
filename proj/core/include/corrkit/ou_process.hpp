#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "corrkit/random.hpp"

namespace corrkit {

// Scalar Ornstein-Uhlenbeck parameters in the (relaxation time, stationary
// std, long-run mean) form; the mean-reversion rate is 1/relaxation_periods.
struct OuParams {
  double relaxation_periods = 1.0;  // theta > 0, in panel periods
  double stationary_std = 0.0;      // >= 0
  double long_run_mean = 0.0;

  void validate() const;
};

// Exact-discretization stepper:
//   x_{t+1} = m + (x_t - m)·e^{-1/θ} + s·sqrt(1 - e^{-2/θ})·ξ
// Distribution-exact at any step size folded into θ; no Euler bias.
class OuStepper {
 public:
  explicit OuStepper(const OuParams& params);
  double init_stationary(RandomStream& rng);  // x_0 ~ N(m, s²)
  double step(RandomStream& rng);
  double level() const { return x_; }

 private:
  OuParams p_;
  double decay_;
  double innov_std_;
  double x_ = 0.0;
};

// n_steps values starting from a stationary draw.
Eigen::VectorXd simulate_ou(const OuParams& params, long n_steps, std::uint64_t seed);

// Inverts the exact discretization from a lag-1 regression x_{t+1} on x_t:
// θ = -1/ln(slope), mean = intercept/(1-slope), stationary std from the
// residual variance. A slope outside (0,1) means the series carries no
// stationary mean-reversion signal.
OuParams fit_ou_lag1(const Eigen::VectorXd& series);

}  // namespace corrkit
