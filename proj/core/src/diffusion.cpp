#include "corrkit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "corrkit/correlation.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/random.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

namespace {

void check_correlation_invariants(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() < 2 || m.rows() != m.cols())
    throw ValidationError(std::string(what) + " must be square with dimension >= 2");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError(std::string(what) + " must be symmetric");
  if ((m.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10)
    throw ValidationError(std::string(what) + " must have a unit diagonal");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError(std::string(what) + " must be positive semidefinite");
}

// S -> diag(S)^(-1/2) S diag(S)^(-1/2), exactly symmetric, exactly unit diag.
Eigen::MatrixXd normalize_to_correlation(const Eigen::MatrixXd& s) {
  const Eigen::Index k = s.rows();
  Eigen::VectorXd d(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(s(i, i) > 0.0)) throw NumericError("non-positive variance during renormalization");
    d[i] = 1.0 / std::sqrt(s(i, i));
  }
  Eigen::MatrixXd c = d.asDiagonal() * s * d.asDiagonal();
  c = 0.5 * (c + c.transpose()).eval();
  c.diagonal().setOnes();
  return c;
}

Eigen::MatrixXd default_factor_weights(Eigen::Index k) {
  // I + c·11ᵀ with columns renormalized: invertible (eigenvalues 1 and 1+cK)
  // and deliberately non-orthogonal so vol moves rotate eigenvectors.
  const double c = 0.3 / std::sqrt(static_cast<double>(k));
  Eigen::MatrixXd w =
      Eigen::MatrixXd::Identity(k, k) + c * Eigen::MatrixXd::Ones(k, k);
  for (Eigen::Index j = 0; j < k; ++j) w.col(j).normalize();
  return w;
}

}  // namespace

void CorrPath::validate() const {
  if (matrices.size() < 1) throw ValidationError("correlation path must not be empty");
  if (times.size() != matrices.size())
    throw ValidationError("correlation path times and matrices must align");
  for (size_t t = 1; t < times.size(); ++t)
    if (times[t] <= times[t - 1])
      throw ValidationError("correlation path times must be strictly increasing");
  const Eigen::Index k = matrices.front().rows();
  for (const auto& m : matrices) {
    if (m.rows() != k || m.cols() != k)
      throw ValidationError("correlation path matrices must share one dimension");
    check_correlation_invariants(m, "path matrix");
  }
}

double semicircle_cdf(double x, double radius) {
  if (!(radius > 0.0)) throw ValidationError("semicircle radius must be positive");
  if (x <= -radius) return 0.0;
  if (x >= radius) return 1.0;
  const double r2 = radius * radius;
  return 0.5 + x * std::sqrt(r2 - x * x) / (M_PI * r2) + std::asin(x / radius) / M_PI;
}

std::vector<OuParams> fit_logfcl_ou(const Eigen::MatrixXd& fcl_series) {
  const Eigen::Index t_len = fcl_series.rows();
  const Eigen::Index k = fcl_series.cols();
  if (t_len < 3 || k < 1) throw ValidationError("fcl series needs >= 3 rows and >= 1 factor");
  std::vector<OuParams> out;
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::VectorXd logs(t_len);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const double v = fcl_series(t, j);
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("fcl series values must be positive and finite");
      logs[t] = std::log(v);
    }
    OuParams p = fit_ou_lag1(logs);
    // valid input, untrustworthy inversion: the lag-1 fit needs many
    // relaxation times of data before its output means anything
    if (static_cast<double>(t_len) < 10.0 * p.relaxation_periods)
      throw NumericError("fcl series too short: need at least 10 relaxation times of data");
    out.push_back(p);
  }
  return out;
}

Eigen::MatrixXd reduced_correlation_from_vols(const Eigen::MatrixXd& factor_weights,
                                              const Eigen::MatrixXd& fixed_factor_corr,
                                              const Eigen::VectorXd& factor_vols) {
  const Eigen::Index k = factor_weights.cols();
  if (factor_weights.rows() != k || k < 2)
    throw ValidationError("factor weights must be square with dimension >= 2");
  if (fixed_factor_corr.rows() != k || fixed_factor_corr.cols() != k)
    throw ValidationError("factor correlation dimension must match factor count");
  if (factor_vols.size() != k)
    throw ValidationError("factor vol count must match factor count");
  for (Eigen::Index i = 0; i < k; ++i)
    if (!(factor_vols[i] > 0.0)) throw ValidationError("factor vols must be positive");

  const Eigen::MatrixXd g = orthonormalize_pivoted(factor_weights);
  const Eigen::MatrixXd a = g.transpose() * factor_weights;
  const Eigen::MatrixXd dpd =
      factor_vols.asDiagonal() * fixed_factor_corr * factor_vols.asDiagonal();
  return normalize_to_correlation(a * dpd * a.transpose());
}

CorrPath simulate_corr_diffusion(const Eigen::VectorXd& base_fcl, const std::vector<OuParams>& ou,
                                 const Eigen::MatrixXd& fixed_factor_corr, long n_steps,
                                 std::uint64_t seed, const Eigen::MatrixXd& factor_weights) {
  const Eigen::Index k = base_fcl.size();
  if (k < 2) throw ValidationError("diffusion needs at least 2 factors");
  if (n_steps < 1) throw ValidationError("n_steps must be positive");
  if (static_cast<Eigen::Index>(ou.size()) != k)
    throw ValidationError("need one OU parameter set per factor");
  for (const auto& p : ou) p.validate();
  for (Eigen::Index i = 0; i < k; ++i)
    if (!(base_fcl[i] > 0.0)) throw ValidationError("base FCL levels must be positive");
  check_correlation_invariants(fixed_factor_corr, "fixed factor correlation");

  const Eigen::MatrixXd w =
      factor_weights.size() == 0 ? default_factor_weights(k) : factor_weights;
  if (w.rows() != k || w.cols() != k)
    throw ValidationError("factor weights must be K×K");

  // Frozen geometry: A maps factor space to the orthonormalized subspace.
  const Eigen::MatrixXd g = orthonormalize_pivoted(w);
  const Eigen::MatrixXd a = g.transpose() * w;

  // One OU per factor on its own substream so factor k's path is invariant to
  // the total factor count.
  RandomStream root(seed);
  std::vector<RandomStream> streams;
  std::vector<OuStepper> steppers;
  for (Eigen::Index i = 0; i < k; ++i) {
    streams.push_back(root.substream(static_cast<std::uint64_t>(i)));
    steppers.emplace_back(ou[static_cast<size_t>(i)]);
    steppers.back().init_stationary(streams.back());
  }

  CorrPath path;
  path.times.reserve(static_cast<size_t>(n_steps));
  path.matrices.reserve(static_cast<size_t>(n_steps));
  Eigen::VectorXd vols(k);
  for (long t = 0; t < n_steps; ++t) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double log_fcl =
          std::log(base_fcl[i]) + steppers[static_cast<size_t>(i)].level();
      vols[i] = std::exp(0.5 * log_fcl);  // vol = sqrt(FCL)
    }
    const Eigen::MatrixXd dpd =
        vols.asDiagonal() * fixed_factor_corr * vols.asDiagonal();
    path.times.push_back(t);
    path.matrices.push_back(normalize_to_correlation(a * dpd * a.transpose()));
    for (Eigen::Index i = 0; i < k; ++i)
      steppers[static_cast<size_t>(i)].step(streams[static_cast<size_t>(i)]);
  }
  return path;
}

IncrementSpectrum increment_spectrum(const CorrPath& path, int lag) {
  if (lag <= 0) throw ValidationError("increment lag must be positive");
  const auto t_len = static_cast<long>(path.matrices.size());
  if (t_len <= lag) throw ValidationError("path must be longer than the increment lag");

  IncrementSpectrum out;
  out.lag = lag;
  out.eigenvalues.reserve(static_cast<size_t>((t_len - lag) * path.dim()));
  for (long t = 0; t + lag < t_len; ++t) {
    const Eigen::MatrixXd delta = path.matrices[static_cast<size_t>(t + lag)] -
                                  path.matrices[static_cast<size_t>(t)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (delta + delta.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    out.max_abs_eigen_sum = std::max(out.max_abs_eigen_sum, std::abs(ev.sum()));
    for (Eigen::Index i = 0; i < ev.size(); ++i) out.eigenvalues.push_back(ev[i]);
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());

  const auto n = static_cast<Eigen::Index>(out.eigenvalues.size());
  const Eigen::Map<const Eigen::VectorXd> pool(out.eigenvalues.data(), n);
  out.std_dev = std::sqrt(variance(pool) + mean(pool) * mean(pool));  // second moment about 0
  if (out.std_dev > 0.0) {
    out.excess_kurtosis = excess_kurtosis(pool);
    // KS against the variance-matched semicircle (variance R²/4 -> R = 2σ).
    const double radius = 2.0 * out.std_dev;
    double ks = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f = semicircle_cdf(out.eigenvalues[static_cast<size_t>(i)], radius);
      const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
      const double lo = static_cast<double>(i) / static_cast<double>(n);
      ks = std::max({ks, std::abs(hi - f), std::abs(f - lo)});
    }
    out.ks_semicircle = ks;
  }
  return out;
}

CorrPath baseline_wishart(int dim, int dof, long n_steps, std::uint64_t seed,
                          const Eigen::MatrixXd& base_corr) {
  if (dim < 2) throw ValidationError("dimension must be >= 2");
  if (dof <= dim - 1)
    throw ValidationError("degenerate dof: sliding window needs dof > dim - 1");
  if (n_steps < 1) throw ValidationError("n_steps must be positive");

  Eigen::MatrixXd base = base_corr;
  if (base.size() == 0) {
    base = Eigen::MatrixXd::Constant(dim, dim, 0.3);
    base.diagonal().setOnes();
  }
  check_correlation_invariants(base, "base correlation");
  if (base.rows() != dim) throw ValidationError("base correlation dimension mismatch");

  Eigen::LLT<Eigen::MatrixXd> llt(base);
  if (llt.info() != Eigen::Success)
    throw NumericError("base correlation is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  RandomStream rng(seed);
  const auto w = static_cast<size_t>(dof);
  std::vector<Eigen::VectorXd> window(w);
  Eigen::VectorXd z(dim);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(dim, dim);
  auto draw = [&]() {
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = rng.gaussian();
    return Eigen::VectorXd(chol * z);
  };
  for (size_t i = 0; i < w; ++i) {
    window[i] = draw();
    sum.selfadjointView<Eigen::Lower>().rankUpdate(window[i], 1.0);
  }

  CorrPath path;
  path.times.reserve(static_cast<size_t>(n_steps));
  path.matrices.reserve(static_cast<size_t>(n_steps));
  size_t oldest = 0;
  for (long t = 0; t < n_steps; ++t) {
    const Eigen::MatrixXd cov =
        Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>()) / static_cast<double>(dof);
    path.times.push_back(t);
    path.matrices.push_back(normalize_to_correlation(cov));
    if (t + 1 == n_steps) break;
    // Slide: drop the oldest draw, add a fresh one.
    sum.selfadjointView<Eigen::Lower>().rankUpdate(window[oldest], -1.0);
    window[oldest] = draw();
    sum.selfadjointView<Eigen::Lower>().rankUpdate(window[oldest], 1.0);
    oldest = (oldest + 1) % w;
    // Rebuild the running sum periodically so rank-update drift cannot
    // accumulate along long paths.
    if ((t & 1023) == 1023) {
      sum.setZero();
      for (const auto& y : window) sum.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0);
    }
  }
  return path;
}

KacPath baseline_kac_walk(int dim, double step_angle, double mean_reversion, long n_steps,
                          std::uint64_t seed, const Eigen::VectorXd& eigenvalues) {
  if (dim < 2) throw ValidationError("dimension must be >= 2");
  if (!(step_angle >= 0.0)) throw ValidationError("step_angle must be >= 0");
  if (!(mean_reversion >= 0.0 && mean_reversion <= 1.0))
    throw ValidationError("mean_reversion must lie in [0, 1]");
  if (n_steps < 1) throw ValidationError("n_steps must be positive");

  Eigen::VectorXd lam = eigenvalues;
  if (lam.size() == 0) {
    // Linear spectrum 2(K+1-k)/(K+1): positive, decreasing, trace K.
    lam.resize(dim);
    for (int i = 0; i < dim; ++i)
      lam[i] = 2.0 * static_cast<double>(dim - i) / static_cast<double>(dim + 1);
  }
  if (lam.size() != dim) throw ValidationError("spectrum size must match dimension");
  if (!(lam.minCoeff() > 0.0)) throw ValidationError("spectrum must be positive");

  RandomStream rng(seed);
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(dim, dim);

  KacPath out;
  out.path.times.reserve(static_cast<size_t>(n_steps));
  out.path.matrices.reserve(static_cast<size_t>(n_steps));
  out.bases.reserve(static_cast<size_t>(n_steps));
  for (long t = 0; t < n_steps; ++t) {
    out.path.times.push_back(t);
    out.bases.push_back(q);
    out.path.matrices.push_back(
        normalize_to_correlation(q * lam.asDiagonal() * q.transpose()));
    if (t + 1 == n_steps) break;

    // Uniform unordered plane {i, j}, i != j.
    const auto i = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(dim)));
    auto j = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(dim - 1)));
    if (j >= i) ++j;
    const double angle = step_angle * rng.gaussian();
    const double c = std::cos(angle), s = std::sin(angle);
    const Eigen::RowVectorXd row_i = q.row(i);
    q.row(i) = c * row_i + s * q.row(j);
    q.row(j) = -s * row_i + c * q.row(j);

    if (mean_reversion > 0.0) {
      // Polar pull-back: the nearest orthogonal matrix to (1-κ)Q + κI.
      const Eigen::MatrixXd blend = (1.0 - mean_reversion) * q +
                                    mean_reversion * Eigen::MatrixXd::Identity(dim, dim);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(blend,
                                            Eigen::ComputeThinU | Eigen::ComputeThinV);
      q = svd.matrixU() * svd.matrixV().transpose();
    }
  }
  return out;
}

OverlapDecay eigvec_overlap_decay(const CorrPath& path, const std::vector<int>& taus) {
  const auto t_len = static_cast<long>(path.matrices.size());
  if (t_len < 1) throw ValidationError("empty path");
  const Eigen::Index k = path.dim();
  for (int tau : taus)
    if (tau < 0 || tau >= t_len)
      throw ValidationError("every tau must lie in [0, path length)");

  std::vector<Eigen::MatrixXd> vecs(static_cast<size_t>(t_len));
  std::vector<Eigen::VectorXd> vals(static_cast<size_t>(t_len));
  for (long t = 0; t < t_len; ++t) {
    const EigenSystem es = eigen_decompose(path.matrices[static_cast<size_t>(t)]);
    vecs[static_cast<size_t>(t)] = es.eigenvectors;
    vals[static_cast<size_t>(t)] = es.eigenvalues;
  }

  OverlapDecay out;
  out.taus = taus;
  out.mean_fcl = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(taus.size()), k);
  out.mean_sq_overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(taus.size()), k);
  for (size_t a = 0; a < taus.size(); ++a) {
    const int tau = taus[a];
    const long n_pairs = t_len - tau;
    for (long t = 0; t < n_pairs; ++t) {
      const auto& v0 = vecs[static_cast<size_t>(t)];
      const auto& v1 = vecs[static_cast<size_t>(t + tau)];
      const Eigen::MatrixXd cross =
          path.matrices[static_cast<size_t>(t + tau)] * v0;  // C(t+τ)·v_k(t)
      const Eigen::MatrixXd overlap = v1.transpose() * v0;   // ⟨v_j(t+τ), v_k(t)⟩
      for (Eigen::Index m = 0; m < k; ++m) {
        out.mean_fcl(static_cast<Eigen::Index>(a), m) += v0.col(m).dot(cross.col(m));
        const double o = overlap(m, m);
        out.mean_sq_overlap(static_cast<Eigen::Index>(a), m) += o * o;
      }
    }
    out.mean_fcl.row(static_cast<Eigen::Index>(a)) /= static_cast<double>(n_pairs);
    out.mean_sq_overlap.row(static_cast<Eigen::Index>(a)) /= static_cast<double>(n_pairs);
  }
  return out;
}

}  // namespace corrkit
