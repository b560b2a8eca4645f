#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "corrkit/ou_process.hpp"

namespace corrkit {

// A path of reduced (factor-space) correlation matrices on a uniform clock.
struct CorrPath {
  std::vector<std::int64_t> times;  // strictly increasing period indices
  std::vector<Eigen::MatrixXd> matrices;

  Eigen::Index n_steps() const { return static_cast<Eigen::Index>(matrices.size()); }
  Eigen::Index dim() const { return matrices.empty() ? 0 : matrices.front().rows(); }

  // Shape plus per-matrix correlation invariants (symmetric, unit diagonal,
  // PSD within 1e-10). O(T·K³); meant for tests and ingest boundaries.
  void validate() const;
};

// Pooled eigenvalues of C(t+lag) - C(t) over all valid t, with the summary
// statistics used to compare against the Wigner semicircle.
struct IncrementSpectrum {
  int lag = 1;
  std::vector<double> eigenvalues;  // pooled, ascending
  double std_dev = 0.0;
  double excess_kurtosis = 0.0;    // semicircle reference value is -1
  double ks_semicircle = 0.0;      // KS distance to the variance-matched semicircle
  double max_abs_eigen_sum = 0.0;  // trace identity: 0 within 1e-10 per increment
};

// Semicircle CDF on [-radius, radius] (variance radius²/4).
double semicircle_cdf(double x, double radius);

// OU fits on log(FCL) per factor; column k of fcl_series is factor k's FCL
// level path. Values must be positive; the fitted relaxation must be at most
// a tenth of the series length for the lag-1 inversion to be trustworthy.
std::vector<OuParams> fit_logfcl_ou(const Eigen::MatrixXd& fcl_series);

// Correlation-matrix diffusion driven by per-factor OU on log-FCL with fixed
// inter-factor correlations:
//   S(t) = A·D(t)·Phi·D(t)·Aᵀ,  D(t) = diag(sqrt(FCL_k(t))),
//   log FCL_k(t) = log(base_fcl_k) + OU_k(t),  A = GᵀW
// where W holds the (generally non-orthogonal) factor-portfolio weights and G
// is W's orthonormalization; C(t) renormalizes S(t) to unit diagonal. Vol
// moves on non-orthogonal factors rotate the reduced matrix's eigenvectors
// even though Phi never changes. Empty factor_weights selects a default
// non-orthogonal geometry (identity blended toward the diagonal direction).
CorrPath simulate_corr_diffusion(const Eigen::VectorXd& base_fcl,
                                 const std::vector<OuParams>& ou,
                                 const Eigen::MatrixXd& fixed_factor_corr, long n_steps,
                                 std::uint64_t seed,
                                 const Eigen::MatrixXd& factor_weights = Eigen::MatrixXd());

// Reduced correlation implied by factor weights W, factor correlations Phi and
// per-factor vols (the one-step kernel of simulate_corr_diffusion, exposed for
// closed-form checks).
Eigen::MatrixXd reduced_correlation_from_vols(const Eigen::MatrixXd& factor_weights,
                                              const Eigen::MatrixXd& fixed_factor_corr,
                                              const Eigen::VectorXd& factor_vols);

IncrementSpectrum increment_spectrum(const CorrPath& path, int lag);

// Stationary correlation path from sample covariances of a sliding window of
// `dof` gaussian draws around a fixed base correlation (default: equicorrelated
// 0.3). Consecutive matrices share dof-1 draws, which induces the temporal
// autocorrelation; increments decorrelate at lags of order dof.
CorrPath baseline_wishart(int dim, int dof, long n_steps, std::uint64_t seed,
                          const Eigen::MatrixXd& base_corr = Eigen::MatrixXd());

// Fixed-spectrum random-rotation walk: the eigenbasis takes a random Givens
// rotation each step (uniform plane, angle ~ N(0, step_angle²)) with an
// optional polar pull-back toward the initial basis.
struct KacPath {
  CorrPath path;
  std::vector<Eigen::MatrixXd> bases;  // orthogonal Q(t) before renormalization
};
KacPath baseline_kac_walk(int dim, double step_angle, double mean_reversion, long n_steps,
                          std::uint64_t seed,
                          const Eigen::VectorXd& eigenvalues = Eigen::VectorXd());

// Eigenvector-stability diagnostics: for each lag τ and mode k, the mean over
// t of fcl(C(t+τ), v_k(t)) and of the squared overlap |⟨v_k(t), v_k(t+τ)⟩|².
struct OverlapDecay {
  std::vector<int> taus;
  Eigen::MatrixXd mean_fcl;         // n_tau × K
  Eigen::MatrixXd mean_sq_overlap;  // n_tau × K
};
OverlapDecay eigvec_overlap_decay(const CorrPath& path, const std::vector<int>& taus);

}  // namespace corrkit
