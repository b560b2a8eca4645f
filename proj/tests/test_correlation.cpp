#include <cmath>

#include <Eigen/Dense>

#include "corrkit/correlation.hpp"
#include "corrkit/errors.hpp"
#include "corrkit/market_sim.hpp"
#include "corrkit/random.hpp"
#include "doctest.h"

using namespace corrkit;

namespace {

ReturnPanel gaussian_panel(int t_len, int n, std::uint64_t seed) {
  ReturnPanel p;
  p.period_seconds = 86400;
  p.timestamps.resize(static_cast<size_t>(t_len));
  for (int t = 0; t < t_len; ++t) p.timestamps[static_cast<size_t>(t)] = 86400LL * (t + 1);
  for (int i = 0; i < n; ++i) p.assets.push_back("a" + std::to_string(i));
  p.returns.resize(t_len, n);
  RandomStream rng(seed);
  for (int t = 0; t < t_len; ++t)
    for (int i = 0; i < n; ++i) p.returns(t, i) = rng.gaussian();
  return p;
}

Eigen::MatrixXd equicorr(int n, double rho) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, rho);
  c.diagonal().setOnes();
  return c;
}

CorrelationModel wrap(const Eigen::MatrixXd& m) {
  CorrelationModel model;
  model.matrix = m;
  model.estimator = Estimator::pearson();
  model.sample_T = 500;
  model.period_seconds = 86400;
  return model;
}

}  // namespace

TEST_CASE("2x2 eigen oracle") {
  const EigenSystem es = eigen_decompose(equicorr(2, 0.5));
  CHECK(es.eigenvalues[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(es.eigenvalues[1] == doctest::Approx(0.5).epsilon(1e-14));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(es.eigenvectors(0, 0)) == doctest::Approx(inv_sqrt2).epsilon(1e-12));
  // sign convention: largest-|entry| component positive
  CHECK(es.eigenvectors(0, 0) > 0.0);
  CHECK(es.eigenvectors(1, 0) > 0.0);
}

TEST_CASE("eigenvalues are descending and vectors orthonormal") {
  RandomStream rng(6001);
  Eigen::MatrixXd load(12, 4);
  for (Eigen::Index i = 0; i < load.size(); ++i) load(i) = rng.gaussian();
  Eigen::MatrixXd s = load * load.transpose() + 0.8 * Eigen::MatrixXd::Identity(12, 12);
  Eigen::VectorXd d = s.diagonal().array().rsqrt();
  Eigen::MatrixXd c = d.asDiagonal() * s * d.asDiagonal();
  c = 0.5 * (c + c.transpose()).eval();
  c.diagonal().setOnes();

  const EigenSystem es = eigen_decompose(c);
  for (int k = 1; k < 12; ++k) CHECK(es.eigenvalues[k] <= es.eigenvalues[k - 1] + 1e-14);
  const Eigen::MatrixXd gram = es.eigenvectors.transpose() * es.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
  // reconstruction
  const Eigen::MatrixXd rebuilt =
      es.eigenvectors * es.eigenvalues.asDiagonal() * es.eigenvectors.transpose();
  CHECK((rebuilt - c).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pearson estimator matches a direct computation") {
  const ReturnPanel p = gaussian_panel(200, 5, 6002);
  const CorrelationModel model = correlation_matrix(p, Estimator::pearson());
  model.validate();
  CHECK(model.sample_T == 200);

  Eigen::MatrixXd x = p.returns;
  x.rowwise() -= x.colwise().mean();
  for (int i = 0; i < 5; ++i) x.col(i) /= std::sqrt(x.col(i).squaredNorm());
  const Eigen::MatrixXd direct = x.transpose() * x;
  CHECK((model.matrix - direct).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ewma estimator approaches pearson for huge halflives") {
  const ReturnPanel p = gaussian_panel(300, 4, 6003);
  const CorrelationModel pearson = correlation_matrix(p, Estimator::pearson());
  const CorrelationModel ewma = correlation_matrix(p, Estimator::ewma(1e6));
  CHECK((pearson.matrix - ewma.matrix).cwiseAbs().maxCoeff() < 0.02);
  const CorrelationModel fast = correlation_matrix(p, Estimator::ewma(10.0));
  fast.validate();  // still a valid correlation matrix
  CHECK((pearson.matrix - fast.matrix).cwiseAbs().maxCoeff() > 0.01);  // and a different one
}

TEST_CASE("fcl matches the closed equicorrelation form") {
  const Eigen::MatrixXd c = equicorr(3, 0.5);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK(fcl(c, ones) == doctest::Approx(2.0).epsilon(1e-14));

  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(3);
  e1[0] = 1.0;
  CHECK(fcl(c, e1) == doctest::Approx(1.0).epsilon(1e-14));

  // bounded by the extreme eigenvalues
  RandomStream rng(6004);
  const EigenSystem es = eigen_decompose(c);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd w(3);
    for (int i = 0; i < 3; ++i) w[i] = rng.gaussian();
    const double v = fcl(c, w);
    CHECK(v >= es.eigenvalues.minCoeff() - 1e-12);
    CHECK(v <= es.eigenvalues.maxCoeff() + 1e-12);
  }
  CHECK(fcl(wrap(c), ones) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(fcl(c, Eigen::VectorXd::Zero(3)), ValidationError);
}

TEST_CASE("pivoted orthonormalization") {
  RandomStream rng(6005);
  Eigen::MatrixXd cols(10, 4);
  for (Eigen::Index i = 0; i < cols.size(); ++i) cols(i) = rng.gaussian();
  const Eigen::MatrixXd g = orthonormalize_pivoted(cols);
  CHECK((g.transpose() * g - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  // span is preserved: projector onto span(g) reproduces the original columns
  const Eigen::MatrixXd proj = g * g.transpose();
  CHECK((proj * cols - cols).cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd dependent(10, 3);
  dependent.col(0) = cols.col(0);
  dependent.col(1) = cols.col(1);
  dependent.col(2) = 2.0 * cols.col(0) - 3.0 * cols.col(1);
  CHECK_THROWS_AS(orthonormalize_pivoted(dependent), ValidationError);
}

TEST_CASE("constrained eigen with the full basis reproduces the spectrum") {
  RandomStream rng(6006);
  Eigen::MatrixXd load(8, 3);
  for (Eigen::Index i = 0; i < load.size(); ++i) load(i) = rng.gaussian();
  Eigen::MatrixXd s = load * load.transpose() + Eigen::MatrixXd::Identity(8, 8);
  Eigen::VectorXd d = s.diagonal().array().rsqrt();
  Eigen::MatrixXd c = (d.asDiagonal() * s * d.asDiagonal()).eval();
  c = 0.5 * (c + c.transpose()).eval();
  c.diagonal().setOnes();
  const CorrelationModel model = wrap(c);

  Eigen::MatrixXd basis(8, 8);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = rng.gaussian();
  const ReducedEigenSystem red = constrained_eigen(model, basis);
  const EigenSystem full = eigen_decompose(model);
  CHECK((red.constrained_eigenvalues - full.eigenvalues).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("constrained eigen interlaces and respects spanned directions") {
  const Eigen::MatrixXd c = equicorr(6, 0.4);
  const CorrelationModel model = wrap(c);
  const EigenSystem full = eigen_decompose(model);

  // one factor: the exact top eigenvector -> reduced eigenvalue = lambda_1
  const ReducedEigenSystem top = constrained_eigen(model, full.eigenvectors.col(0));
  CHECK(top.constrained_eigenvalues[0] == doctest::Approx(full.eigenvalues[0]).epsilon(1e-10));

  // random K=3: interlacing lambda_{j+N-K} <= reduced_j <= lambda_j
  RandomStream rng(6007);
  Eigen::MatrixXd basis(6, 3);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = rng.gaussian();
  const ReducedEigenSystem red = constrained_eigen(model, basis);
  for (int j = 0; j < 3; ++j) {
    CHECK(red.constrained_eigenvalues[j] <= full.eigenvalues[j] + 1e-10);
    CHECK(red.constrained_eigenvalues[j] >= full.eigenvalues[j + 3] - 1e-10);
  }
  CHECK(red.reduced_matrix.rows() == 3);
  CHECK(red.constrained_eigenvectors_in_asset_space.rows() == 6);
}

TEST_CASE("mp_clip averages the bulk and preserves the trace") {
  const ReturnPanel p = gaussian_panel(500, 50, 6008);
  const CorrelationModel raw = correlation_matrix(p, Estimator::pearson());
  const double q = 500.0 / 50.0;
  const CorrelationModel cleaned = mp_clip(raw, q);
  cleaned.validate();
  CHECK(cleaned.matrix.trace() == doctest::Approx(50.0).epsilon(1e-12));

  const Eigen::VectorXd lam = eigen_decompose(cleaned).eigenvalues;
  const double edge = std::pow(1.0 + 1.0 / std::sqrt(q), 2);
  // all eigenvalues at or below the edge collapsed to (nearly) one value
  double lo = 1e300, hi = -1e300;
  int n_bulk = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] <= edge) {
      lo = std::min(lo, lam[k]);
      hi = std::max(hi, lam[k]);
      ++n_bulk;
    }
  }
  CHECK(n_bulk > 40);
  CHECK(hi - lo < 0.05);  // diagonal renormalization perturbs the exact average slightly

  // a genuine spike survives clipping
  const ReturnPanel spiked = simulate_market(equicorrelation_spec(50, 0.5, 500), 6009);
  const CorrelationModel spiked_model =
      mp_clip(correlation_matrix(spiked, Estimator::pearson()), q);
  CHECK(eigen_decompose(spiked_model).eigenvalues[0] > 20.0);
}

TEST_CASE("fcl significance test is deterministic and sane") {
  const ReturnPanel null_panel = gaussian_panel(250, 20, 6010);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(20);
  const FclTest a = fcl_significance(null_panel, w, 5, 100, 6011);
  const FclTest b = fcl_significance(null_panel, w, 5, 100, 6011);
  CHECK(a.p_value == b.p_value);
  CHECK(a.fcl_hat == b.fcl_hat);
  CHECK(a.n_boot == 100);
  CHECK(a.block_len == 5);
  CHECK(a.p_value >= 0.0);
  CHECK(a.p_value <= 1.0);

  const ReturnPanel strong = simulate_market(equicorrelation_spec(20, 0.5, 250), 6012);
  const FclTest sig = fcl_significance(strong, w, 5, 100, 6013);
  CHECK(sig.fcl_hat > 5.0);
  CHECK(sig.p_value <= 0.05);
}
