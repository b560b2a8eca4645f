#include "corrkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrkit/errors.hpp"

namespace corrkit {

Eigen::VectorXd average_ranks(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });

  Eigen::VectorXd ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the averaged 1-based rank
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double mean(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw ValidationError("mean: empty vector");
  return x.mean();
}

double variance(const Eigen::VectorXd& x) {
  if (x.size() == 0) throw ValidationError("variance: empty vector");
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size());
}

double excess_kurtosis(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw ValidationError("excess_kurtosis: need at least 2 observations");
  const double m = x.mean();
  const Eigen::ArrayXd d = x.array() - m;
  const double m2 = d.square().mean();
  if (m2 <= 0.0) throw NumericError("excess_kurtosis: zero variance");
  const double m4 = d.square().square().mean();
  return m4 / (m2 * m2) - 3.0;
}

std::pair<double, double> ols_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw ValidationError("ols_fit: size mismatch");
  if (x.size() < 2) throw ValidationError("ols_fit: need at least 2 observations");
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (sxx <= 0.0) throw NumericError("ols_fit: regressor has zero variance");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double ols_slope_stderr(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.size();
  if (n < 3) throw ValidationError("ols_slope_stderr: need at least 3 observations");
  auto [slope, intercept] = ols_fit(x, y);
  const Eigen::ArrayXd resid = y.array() - slope * x.array() - intercept;
  const double s2 = resid.square().sum() / static_cast<double>(n - 2);
  const double sxx = (x.array() - x.mean()).square().sum();
  return std::sqrt(s2 / sxx);
}

double ewma_lambda(double halflife) {
  if (!(halflife > 0.0)) throw ValidationError("ewma_lambda: halflife must be positive");
  return std::exp2(-1.0 / halflife);
}

EwmaVol::EwmaVol(double halflife, int burn_in) : lambda_(ewma_lambda(halflife)), burn_in_(burn_in) {
  if (burn_in_ < 1) throw ValidationError("EwmaVol: burn_in must be >= 1");
}

void EwmaVol::update(double x) {
  ++n_;
  if (n_ <= burn_in_) {
    sum_sq_ += x * x;
    var_ = sum_sq_ / static_cast<double>(n_);
    return;
  }
  var_ = lambda_ * var_ + (1.0 - lambda_) * x * x;
}

double EwmaVol::vol() const {
  if (n_ == 0) throw NumericError("EwmaVol: no observations");
  return std::sqrt(var_);
}

EwmaZScore::EwmaZScore(double halflife, int min_obs)
    : lambda_(ewma_lambda(halflife)),
      kappa_(std::sqrt((1.0 - ewma_lambda(halflife)) / (1.0 + ewma_lambda(halflife)))),
      min_obs_(min_obs) {}

void EwmaZScore::update(double x) {
  ++n_;
  if (n_ == 1) {
    mean_ = x;
    var_ = x * x;
    return;
  }
  mean_ = lambda_ * mean_ + (1.0 - lambda_) * x;
  var_ = lambda_ * var_ + (1.0 - lambda_) * x * x;
}

double EwmaZScore::z() const {
  if (n_ < min_obs_) return 0.0;
  const double sd = std::sqrt(std::max(var_, 0.0));
  if (sd <= 1e-300) return 0.0;
  return mean_ / (sd * kappa_);
}

double leverage_modulation(double l_s, double l_i, double e_v, double z_sys, double z_spec,
                           double rel_vol) {
  auto clamp = [](double v) { return std::clamp(v, 0.2, 5.0); };
  const double sys = clamp(1.0 + l_s * z_sys);
  const double spec = clamp(1.0 + l_i * z_spec);
  const double vol = clamp(std::pow(std::max(rel_vol, 1e-12), e_v));
  return sys * spec * vol;
}

AcfProfile autocorrelation(const Eigen::VectorXd& series, int max_lag) {
  const Eigen::Index n = series.size();
  if (max_lag < 0) throw ValidationError("autocorrelation: max_lag must be >= 0");
  if (n <= max_lag) throw ValidationError("autocorrelation: series shorter than max_lag");
  const double m = series.mean();
  const Eigen::ArrayXd d = series.array() - m;
  const double c0 = d.square().sum();
  if (c0 <= 0.0) throw NumericError("autocorrelation: zero variance");

  AcfProfile out;
  double cum = 0.0;  // sum of squared acf below current lag (Bartlett)
  for (int lag = 0; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (Eigen::Index t = lag; t < n; ++t) c += d[t] * d[t - lag];
    const double rho = c / c0;
    out.lags.push_back(lag);
    out.acf.push_back(rho);
    if (lag == 0) {
      out.stderr_bartlett.push_back(0.0);
    } else {
      out.stderr_bartlett.push_back(std::sqrt((1.0 + 2.0 * cum) / static_cast<double>(n)));
      cum += rho * rho;
    }
  }
  return out;
}

}  // namespace corrkit
