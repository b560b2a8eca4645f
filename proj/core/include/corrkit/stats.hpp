#pragma once

#include <Eigen/Dense>
#include <vector>

namespace corrkit {

// Ranks 1..N with ties averaged ("midranks").
Eigen::VectorXd average_ranks(const Eigen::VectorXd& values);

double mean(const Eigen::VectorXd& x);
double variance(const Eigen::VectorXd& x);         // population (1/N) variance
double excess_kurtosis(const Eigen::VectorXd& x);  // m4/m2^2 - 3

// OLS of y on x with intercept: returns (slope, intercept).
std::pair<double, double> ols_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Standard error of the OLS slope (iid residuals).
double ols_slope_stderr(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// ---------------------------------------------------------------------------
// EWMA filters shared by the reactive-beta model and the synthetic-market
// generator. They must stay a single implementation: estimation-consistency
// tests compare model output against markets generated with these exact
// recursions.
// ---------------------------------------------------------------------------

// lambda = 2^(-1/halflife)
double ewma_lambda(double halflife);

// EWMA volatility filter. vol() reflects all observations pushed so far;
// the first `burn_in` squared observations seed the state so early output is
// usable without NaN handling.
class EwmaVol {
 public:
  explicit EwmaVol(double halflife, int burn_in = 20);
  void update(double x);
  double vol() const;
  bool warmed() const { return n_ >= burn_in_; }

 private:
  double lambda_;
  int burn_in_;
  int n_ = 0;
  double sum_sq_ = 0.0;  // burn-in accumulator
  double var_ = 0.0;
};

// Trailing z-score of the EWMA mean of a series, normalized by the stationary
// std of that EWMA mean (kappa = sqrt((1-lambda)/(1+lambda)) times the EWMA
// std of the raw series), so z ~ N(0,1) under iid input. z() is 0 until the
// filter has seen `min_obs` observations.
class EwmaZScore {
 public:
  explicit EwmaZScore(double halflife, int min_obs = 10);
  void update(double x);
  double z() const;

 private:
  double lambda_;
  double kappa_;
  int min_obs_;
  int n_ = 0;
  double mean_ = 0.0;
  double var_ = 0.0;
};

// Multiplicative leverage modulation, shared form between generator and model:
//   (1 + l_s * z_sys) * (1 + l_i * z_spec) * rel_vol^e_v
// Each factor is clamped to [0.2, 5] to keep volatilities positive under
// extreme z draws.
double leverage_modulation(double l_s, double l_i, double e_v, double z_sys, double z_spec,
                           double rel_vol);

// Sample autocorrelation at lags 0..max_lag plus Bartlett standard errors.
struct AcfProfile {
  std::vector<int> lags;
  std::vector<double> acf;
  std::vector<double> stderr_bartlett;
};
AcfProfile autocorrelation(const Eigen::VectorXd& series, int max_lag);

}  // namespace corrkit
