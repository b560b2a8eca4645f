#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "corrkit/correlation.hpp"
#include "corrkit/diffusion.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/ou_process.hpp"
#include "corrkit/stats.hpp"
#include "doctest.h"

using namespace corrkit;

namespace {

std::vector<OuParams> flat_ou(int k, double theta, double sigma) {
  std::vector<OuParams> ou(static_cast<size_t>(k));
  for (auto& p : ou) {
    p.relaxation_periods = theta;
    p.stationary_std = sigma;
    p.long_run_mean = 0.0;
  }
  return ou;
}

Eigen::MatrixXd equicorr(int n, double rho) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, rho);
  c.diagonal().setOnes();
  return c;
}

}  // namespace

TEST_CASE("reduced correlation kernel: frozen 2x2 oracle") {
  Eigen::MatrixXd w(2, 2);
  w << 1.0, 0.6, 0.0, 0.8;  // columns (1,0) and (0.6,0.8)
  const Eigen::MatrixXd phi = equicorr(2, 0.5);

  Eigen::VectorXd vols(2);
  vols << 1.0, 2.0;
  // S = W diag(1,2) Phi diag(1,2) Wᵀ = [[3.64, 2.72], [2.72, 2.56]]
  const Eigen::MatrixXd c = reduced_correlation_from_vols(w, phi, vols);
  CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(2.72 / std::sqrt(3.64 * 2.56)).epsilon(1e-12));
  CHECK(c(1, 0) == doctest::Approx(c(0, 1)).epsilon(1e-14));

  // unit vols: S = W Phi Wᵀ -> off-diagonal 0.88/1.12 = 11/14
  const Eigen::MatrixXd c1 = reduced_correlation_from_vols(w, phi, Eigen::VectorXd::Ones(2));
  CHECK(c1(0, 1) == doctest::Approx(11.0 / 14.0).epsilon(1e-12));
}

TEST_CASE("vol moves on non-orthogonal factors rotate eigenvectors") {
  // 2x2 correlation matrices all share the (1, ±1)/sqrt(2) eigenbasis, so the
  // rotation effect only shows from dimension 3 up.
  Eigen::MatrixXd w(3, 3);
  w << 1.0, 0.4, 0.2, 0.0, 0.9, 0.3, 0.0, 0.0, 0.8;
  for (int c = 0; c < 3; ++c) w.col(c).normalize();
  const Eigen::MatrixXd phi = equicorr(3, 0.2);

  Eigen::VectorXd flat = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd tilted(3);
  tilted << 1.0, 1.8, 0.6;
  const Eigen::MatrixXd c_flat = reduced_correlation_from_vols(w, phi, flat);
  const Eigen::MatrixXd c_tilt = reduced_correlation_from_vols(w, phi, tilted);
  const Eigen::VectorXd v_flat = eigen_decompose(c_flat).eigenvectors.col(0);
  const Eigen::VectorXd v_tilt = eigen_decompose(c_tilt).eigenvectors.col(0);
  CHECK(std::abs(v_flat.dot(v_tilt)) < 1.0 - 1e-4);
}

TEST_CASE("diffusion path satisfies correlation invariants") {
  Eigen::VectorXd base(3);
  base << 1.8, 1.0, 0.4;
  const CorrPath path =
      simulate_corr_diffusion(base, flat_ou(3, 30.0, 0.3), equicorr(3, 0.2), 400, 10001);
  REQUIRE(path.n_steps() == 400);
  REQUIRE(path.dim() == 3);
  CHECK_NOTHROW(path.validate());

  // deterministic in the seed
  const CorrPath again =
      simulate_corr_diffusion(base, flat_ou(3, 30.0, 0.3), equicorr(3, 0.2), 400, 10001);
  double diff = 0.0;
  for (int t = 0; t < 400; ++t)
    diff = std::max(diff, (path.matrices[static_cast<size_t>(t)] -
                           again.matrices[static_cast<size_t>(t)])
                              .cwiseAbs()
                              .maxCoeff());
  CHECK(diff == 0.0);

  // the path genuinely moves
  CHECK((path.matrices[0] - path.matrices[399]).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("zero OU noise freezes the diffusion at its base point") {
  Eigen::VectorXd base(3);
  base << 1.5, 1.0, 0.6;
  const CorrPath path =
      simulate_corr_diffusion(base, flat_ou(3, 20.0, 0.0), equicorr(3, 0.25), 50, 10002);
  for (int t = 1; t < 50; ++t)
    CHECK((path.matrices[static_cast<size_t>(t)] - path.matrices[0]).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("diffusion increments are trace-free") {
  Eigen::VectorXd base(4);
  base << 2.0, 1.2, 0.7, 0.4;
  const CorrPath path =
      simulate_corr_diffusion(base, flat_ou(4, 40.0, 0.35), equicorr(4, 0.3), 600, 10003);
  const IncrementSpectrum spec = increment_spectrum(path, 10);
  CHECK(spec.lag == 10);
  CHECK(spec.max_abs_eigen_sum <= 1e-10);
  CHECK(spec.std_dev > 0.0);
  CHECK(static_cast<int>(spec.eigenvalues.size()) == 4 * (600 - 10));
  // pooled ascending
  for (size_t i = 1; i < spec.eigenvalues.size(); ++i)
    CHECK(spec.eigenvalues[i] >= spec.eigenvalues[i - 1]);
}

TEST_CASE("constant path has a degenerate increment spectrum") {
  CorrPath path;
  for (int t = 0; t < 20; ++t) {
    path.times.push_back(t);
    path.matrices.push_back(equicorr(3, 0.4));
  }
  const IncrementSpectrum spec = increment_spectrum(path, 5);
  CHECK(spec.std_dev == 0.0);
  CHECK(spec.excess_kurtosis == 0.0);
  CHECK(spec.ks_semicircle == 0.0);
  CHECK_THROWS_AS(increment_spectrum(path, 25), ValidationError);
}

TEST_CASE("semicircle cdf endpoints, symmetry, and jump-point KS") {
  CHECK(semicircle_cdf(-2.0, 2.0) == doctest::Approx(0.0));
  CHECK(semicircle_cdf(0.0, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(semicircle_cdf(2.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(semicircle_cdf(-3.0, 2.0) == doctest::Approx(0.0));
  CHECK(semicircle_cdf(3.0, 2.0) == doctest::Approx(1.0));
  CHECK(semicircle_cdf(1.0, 2.0) + semicircle_cdf(-1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  double prev = -1.0;
  for (double x = -2.0; x <= 2.0; x += 0.1) {
    const double v = semicircle_cdf(x, 2.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
}

TEST_CASE("log-FCL OU fits recover the generating parameters") {
  const int t_len = 60000;
  OuParams truth;
  truth.relaxation_periods = 25.0;
  truth.stationary_std = 0.3;
  truth.long_run_mean = 0.0;
  Eigen::MatrixXd fcl_series(t_len, 2);
  fcl_series.col(0) = simulate_ou(truth, t_len, 10004).array().exp() * 1.8;
  fcl_series.col(1) = simulate_ou(truth, t_len, 10005).array().exp() * 0.6;

  const std::vector<OuParams> fits = fit_logfcl_ou(fcl_series);
  REQUIRE(fits.size() == 2);
  for (const auto& f : fits) {
    CHECK(f.relaxation_periods == doctest::Approx(25.0).epsilon(0.15));
    CHECK(f.stationary_std == doctest::Approx(0.3).epsilon(0.05));
  }
  CHECK(std::exp(fits[0].long_run_mean) == doctest::Approx(1.8).epsilon(0.05));
  CHECK(std::exp(fits[1].long_run_mean) == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("log-FCL OU fit rejects bad series") {
  Eigen::MatrixXd negative(100, 1);
  negative.setConstant(1.0);
  negative(50, 0) = -0.2;
  CHECK_THROWS_AS(fit_logfcl_ou(negative), ValidationError);

  // a short series cannot support its own fitted relaxation time
  OuParams slow;
  slow.relaxation_periods = 200.0;
  slow.stationary_std = 0.3;
  Eigen::MatrixXd short_series(300, 1);
  short_series.col(0) = simulate_ou(slow, 300, 10006).array().exp();
  CHECK_THROWS_AS(fit_logfcl_ou(short_series), NumericError);
}

TEST_CASE("wishart baseline is a valid stationary correlation path") {
  const CorrPath path = baseline_wishart(6, 40, 300, 10007);
  REQUIRE(path.n_steps() == 300);
  CHECK_NOTHROW(path.validate());

  const CorrPath again = baseline_wishart(6, 40, 300, 10007);
  CHECK((path.matrices[299] - again.matrices[299]).cwiseAbs().maxCoeff() == 0.0);

  // hovers near the base: mean off-diagonal near 0.3
  double acc = 0.0;
  int cnt = 0;
  for (int t = 0; t < 300; ++t)
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) {
        acc += path.matrices[static_cast<size_t>(t)](i, j);
        ++cnt;
      }
  CHECK(acc / cnt == doctest::Approx(0.3).epsilon(0.25));

  CHECK_THROWS_AS(baseline_wishart(6, 5, 100, 1), ValidationError);  // dof <= dim - 1
}

TEST_CASE("wishart increments decorrelate while levels persist") {
  const CorrPath path = baseline_wishart(4, 60, 2000, 10008);
  // consecutive matrices share 59/60 draws: lag-1 level changes are tiny
  double lag1 = 0.0;
  for (int t = 1; t < 2000; ++t)
    lag1 = std::max(lag1, (path.matrices[static_cast<size_t>(t)] -
                           path.matrices[static_cast<size_t>(t - 1)])
                              .cwiseAbs()
                              .maxCoeff());
  CHECK(lag1 < 0.25);
  // across a full window the state renews
  CHECK((path.matrices[0] - path.matrices[1999]).cwiseAbs().maxCoeff() > 0.01);
}

TEST_CASE("kac walk keeps its spectrum and orthogonal frame") {
  const KacPath kac = baseline_kac_walk(5, 0.15, 0.0, 500, 10009);
  REQUIRE(kac.path.n_steps() == 500);
  REQUIRE(kac.bases.size() == 500);
  CHECK_NOTHROW(kac.path.validate());

  // default spectrum lambda_i = 2(dim - i)/(dim + 1), trace = dim; the walk
  // rotates Q Lambda Qᵀ, so the pre-normalization spectrum is exactly Lambda
  Eigen::VectorXd lam(5);
  for (int i = 0; i < 5; ++i) lam[i] = 2.0 * (5 - i) / 6.0;

  for (int t : {0, 250, 499}) {
    const Eigen::MatrixXd& q = kac.bases[static_cast<size_t>(t)];
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd spec =
        eigen_decompose(Eigen::MatrixXd(q * lam.asDiagonal() * q.transpose())).eigenvalues;
    CHECK((spec - lam).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Q(0) = I: the normalized starting matrix is exactly the identity, and the
  // published correlation path keeps the unit trace of any correlation matrix
  CHECK((kac.path.matrices[0] - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
        1e-14);
  for (int t : {100, 400}) {
    const Eigen::MatrixXd& c = kac.path.matrices[static_cast<size_t>(t)];
    CHECK(c.trace() == doctest::Approx(5.0));
    // a rotated frame genuinely correlates the coordinates
    Eigen::MatrixXd off = c;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() > 0.01);
  }
  CHECK((kac.path.matrices[250] - kac.path.matrices[0]).cwiseAbs().maxCoeff() > 0.05);

  // zero step angle freezes the frame at the identity
  const KacPath frozen = baseline_kac_walk(5, 0.0, 0.0, 50, 10010);
  CHECK((frozen.path.matrices[49] - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <
        1e-14);

  CHECK_THROWS_AS(baseline_kac_walk(5, -0.1, 0.0, 50, 1), ValidationError);
  CHECK_THROWS_AS(baseline_kac_walk(5, 0.1, 1.5, 50, 1), ValidationError);
}

TEST_CASE("mean reversion pulls the kac frame back toward its origin") {
  const int t_len = 2000;
  const KacPath free_walk = baseline_kac_walk(4, 0.2, 0.0, t_len, 10011);
  const KacPath pulled = baseline_kac_walk(4, 0.2, 0.3, t_len, 10011);
  // alignment with the initial basis: |diag of Q(0)ᵀQ(t)| stays higher when pulled
  auto alignment = [](const KacPath& kp, int t) {
    const Eigen::MatrixXd m = kp.bases[0].transpose() * kp.bases[static_cast<size_t>(t)];
    return m.diagonal().cwiseAbs().mean();
  };
  double free_acc = 0.0, pulled_acc = 0.0;
  for (int t = t_len / 2; t < t_len; t += 50) {
    free_acc += alignment(free_walk, t);
    pulled_acc += alignment(pulled, t);
  }
  CHECK(pulled_acc > free_acc);
}

TEST_CASE("overlap decay: tau = 0 recovers eigenvalues and unit overlaps") {
  Eigen::VectorXd base(3);
  base << 1.7, 1.0, 0.5;
  const CorrPath path =
      simulate_corr_diffusion(base, flat_ou(3, 25.0, 0.3), equicorr(3, 0.2), 200, 10012);
  const OverlapDecay decay = eigvec_overlap_decay(path, {0, 5, 50});
  REQUIRE(decay.taus.size() == 3);
  REQUIRE(decay.mean_fcl.rows() == 3);
  REQUIRE(decay.mean_fcl.cols() == 3);

  // tau = 0: fcl(C(t), v_k(t)) = lambda_k(t) and overlaps are exactly 1
  for (int k = 0; k < 3; ++k) CHECK(decay.mean_sq_overlap(0, k) == doctest::Approx(1.0).epsilon(1e-12));
  double mean_lambda1 = 0.0;
  for (int t = 0; t < 200; ++t)
    mean_lambda1 += eigen_decompose(path.matrices[static_cast<size_t>(t)]).eigenvalues[0];
  mean_lambda1 /= 200.0;
  CHECK(decay.mean_fcl(0, 0) == doctest::Approx(mean_lambda1).epsilon(1e-10));

  // overlaps decay with tau for the top mode
  CHECK(decay.mean_sq_overlap(1, 0) <= 1.0 + 1e-12);
  CHECK(decay.mean_sq_overlap(2, 0) < decay.mean_sq_overlap(0, 0));

  CHECK_THROWS_AS(eigvec_overlap_decay(path, {200}), ValidationError);
}
