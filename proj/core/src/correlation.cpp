#include "corrkit/correlation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corrkit/errors.hpp"
#include "corrkit/random.hpp"

namespace corrkit {

void CorrelationModel::validate() const {
  const Eigen::Index n = matrix.rows();
  if (n < 1 || matrix.cols() != n) throw ValidationError("correlation model: matrix not square");
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("correlation model: matrix not symmetric within 1e-12");
  if ((matrix.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw ValidationError("correlation model: diagonal not 1 within 1e-12");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("correlation model: eigenvalue computation failed");
  if (solver.eigenvalues().minCoeff() < -1e-10)
    throw ValidationError("correlation model: not positive semi-definite (min eigenvalue " +
                          std::to_string(solver.eigenvalues().minCoeff()) + ")");
}

namespace {

void check_nonzero_variance(const Eigen::VectorXd& var, const ReturnPanel& panel) {
  for (Eigen::Index i = 0; i < var.size(); ++i)
    if (!(var[i] > 0.0))
      throw ValidationError("degenerate asset '" + panel.assets[static_cast<size_t>(i)] +
                            "': zero sample variance");
}

Eigen::MatrixXd pearson_matrix(const ReturnPanel& panel) {
  const Eigen::MatrixXd& x = panel.returns;
  const double t = static_cast<double>(x.rows());
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / t;
  check_nonzero_variance(var, panel);
  Eigen::VectorXd inv_sd = var.array().sqrt().inverse();
  Eigen::MatrixXd c =
      inv_sd.asDiagonal() * (centered.transpose() * centered / t) * inv_sd.asDiagonal();
  return c;
}

Eigen::MatrixXd ewma_matrix(const ReturnPanel& panel, double halflife) {
  if (!(halflife > 0.0)) throw ValidationError("ewma estimator: halflife must be positive");
  const Eigen::MatrixXd& x = panel.returns;
  const Eigen::Index t_len = x.rows();
  const double lambda = std::exp2(-1.0 / halflife);

  Eigen::VectorXd weights(t_len);
  double wsum = 0.0;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    weights[t] = std::pow(lambda, static_cast<double>(t_len - 1 - t));
    wsum += weights[t];
  }
  weights /= wsum;

  Eigen::RowVectorXd mean = weights.transpose() * x;
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov =
      centered.transpose() * weights.asDiagonal() * centered;  // normalized weights
  Eigen::VectorXd var = cov.diagonal();
  check_nonzero_variance(var, panel);
  Eigen::VectorXd inv_sd = var.array().sqrt().inverse();
  return inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
}

void tidy_correlation(Eigen::MatrixXd& c) {
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
}

}  // namespace

CorrelationModel correlation_matrix(const ReturnPanel& panel, const Estimator& estimator) {
  panel.validate();
  CorrelationModel model;
  model.estimator = estimator;
  model.sample_T = panel.returns.rows();
  model.period_seconds = panel.period_seconds;
  model.matrix = estimator.kind == EstimatorKind::pearson
                     ? pearson_matrix(panel)
                     : ewma_matrix(panel, estimator.halflife_periods);
  tidy_correlation(model.matrix);
  return model;
}

namespace {

// Deterministic sign: the largest-magnitude entry of each column is positive.
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = 0.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double a = std::abs(vectors(r, c));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

}  // namespace

EigenSystem eigen_decompose(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols())
    throw ValidationError("eigen_decompose: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (symmetric + symmetric.transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("eigen_decompose: failed to converge");

  EigenSystem out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  fix_signs(out.eigenvectors);
  return out;
}

EigenSystem eigen_decompose(const CorrelationModel& model) {
  return eigen_decompose(model.matrix);
}

CorrelationModel mp_clip(const CorrelationModel& model, double q) {
  if (!(q > 1.0)) throw ValidationError("mp_clip: invalid ratio q = T/N, need q > 1");
  const double edge = std::pow(1.0 + 1.0 / std::sqrt(q), 2.0);

  EigenSystem es = eigen_decompose(model);
  Eigen::VectorXd lam = es.eigenvalues;
  double bulk_sum = 0.0;
  int bulk_count = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam[k] <= edge) {
      bulk_sum += lam[k];
      ++bulk_count;
    }
  }
  if (bulk_count > 0) {
    const double avg = bulk_sum / static_cast<double>(bulk_count);
    for (Eigen::Index k = 0; k < lam.size(); ++k)
      if (lam[k] <= edge) lam[k] = avg;
  }

  Eigen::MatrixXd rebuilt =
      es.eigenvectors * lam.asDiagonal() * es.eigenvectors.transpose();
  Eigen::VectorXd inv_sd = rebuilt.diagonal().array().sqrt().inverse();
  CorrelationModel out = model;
  out.matrix = inv_sd.asDiagonal() * rebuilt * inv_sd.asDiagonal();
  tidy_correlation(out.matrix);
  return out;
}

double fcl(const Eigen::MatrixXd& corr, const Eigen::VectorXd& w) {
  if (w.size() != corr.rows()) throw ValidationError("fcl: weight size mismatch");
  const double denom = w.squaredNorm();
  if (!(denom > 0.0)) throw ValidationError("fcl: zero weight vector");
  return w.dot(corr * w) / denom;
}

double fcl(const CorrelationModel& model, const Eigen::VectorXd& w) {
  return fcl(model.matrix, w);
}

Eigen::MatrixXd orthonormalize_pivoted(const Eigen::MatrixXd& columns, double tol) {
  const Eigen::Index n = columns.rows();
  const Eigen::Index k = columns.cols();
  if (k < 1) throw ValidationError("orthonormalize: need at least one column");
  if (k > n) throw ValidationError("orthonormalize: more columns than dimensions");

  Eigen::MatrixXd work = columns;
  Eigen::VectorXd initial_norm = columns.colwise().norm();
  std::vector<Eigen::Index> remaining;
  for (Eigen::Index j = 0; j < k; ++j) remaining.push_back(j);

  Eigen::MatrixXd g(n, k);
  for (Eigen::Index pos = 0; pos < k; ++pos) {
    size_t best_slot = 0;
    double best_norm = -1.0;
    for (size_t s = 0; s < remaining.size(); ++s) {
      const double nm = work.col(remaining[s]).norm();
      if (nm > best_norm) {
        best_norm = nm;
        best_slot = s;
      }
    }
    const Eigen::Index j = remaining[best_slot];
    if (best_norm <= tol * std::max(1.0, initial_norm[j])) {
      // every remaining column is inside the span already; name the first
      Eigen::Index dep = *std::min_element(remaining.begin(), remaining.end());
      throw ValidationError("factor column " + std::to_string(dep + 1) +
                            " is linearly dependent on the others");
    }
    Eigen::VectorXd v = work.col(j);
    if (pos > 0) v -= g.leftCols(pos) * (g.leftCols(pos).transpose() * v);  // re-orthogonalize
    g.col(pos) = v / v.norm();
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_slot));
    for (Eigen::Index r : remaining)
      work.col(r) -= g.col(pos) * g.col(pos).dot(work.col(r));
  }
  return g;
}

ReducedEigenSystem constrained_eigen(const CorrelationModel& model,
                                     const Eigen::MatrixXd& factors) {
  if (factors.rows() != model.size())
    throw ValidationError("constrained_eigen: factor rows must match correlation size");

  ReducedEigenSystem out;
  out.factor_weights = factors;
  for (Eigen::Index c = 0; c < out.factor_weights.cols(); ++c) {
    const double nm = out.factor_weights.col(c).norm();
    if (!(nm > 0.0))
      throw ValidationError("constrained_eigen: factor column " + std::to_string(c + 1) +
                            " is zero");
    out.factor_weights.col(c) /= nm;
  }
  out.orthonormal_basis = orthonormalize_pivoted(factors);
  out.reduced_matrix = out.orthonormal_basis.transpose() * model.matrix * out.orthonormal_basis;
  out.reduced_matrix = (0.5 * (out.reduced_matrix + out.reduced_matrix.transpose())).eval();

  EigenSystem reduced = eigen_decompose(out.reduced_matrix);
  out.constrained_eigenvalues = reduced.eigenvalues;
  out.constrained_eigenvectors_in_asset_space = out.orthonormal_basis * reduced.eigenvectors;
  fix_signs(out.constrained_eigenvectors_in_asset_space);
  return out;
}

FclTest fcl_significance(const ReturnPanel& panel, const Eigen::VectorXd& w, int block_len,
                         int n_boot, std::uint64_t seed) {
  panel.validate();
  if (block_len < 1) throw ValidationError("fcl_significance: block_len must be >= 1");
  if (n_boot < 100) throw ValidationError("fcl_significance: n_boot must be >= 100");
  const Eigen::Index t_len = panel.returns.rows();
  const Eigen::Index n = panel.returns.cols();
  if (w.size() != n) throw ValidationError("fcl_significance: weight size mismatch");
  if (t_len < 2 * static_cast<Eigen::Index>(block_len))
    throw ValidationError("fcl_significance: need T >= 2*block_len observations");

  CorrelationModel model = correlation_matrix(panel, Estimator::pearson());
  FclTest result;
  result.fcl_hat = fcl(model, w);
  result.n_boot = n_boot;
  result.block_len = block_len;

  // Standardized columns: a bootstrap FCL is then mean(p²)/|w|² with p the
  // portfolio series of the re-standardized resampled columns.
  Eigen::MatrixXd x = panel.returns;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = x.col(i).mean();
    x.col(i).array() -= m;
    const double sd = std::sqrt(x.col(i).squaredNorm() / static_cast<double>(t_len));
    x.col(i) /= sd;
  }
  const double wnorm_sq = w.squaredNorm();
  if (!(wnorm_sq > 0.0)) throw ValidationError("fcl_significance: zero weight vector");

  RandomStream root(seed);
  const Eigen::Index n_blocks = (t_len + block_len - 1) / block_len;
  int n_geq = 0;
  Eigen::VectorXd portfolio(t_len);
  Eigen::VectorXd column(t_len);
  for (int b = 0; b < n_boot; ++b) {
    RandomStream rep = root.substream(static_cast<std::uint64_t>(b));
    portfolio.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      RandomStream rng = rep.substream(static_cast<std::uint64_t>(i));
      for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
        const Eigen::Index phase = rng.uniform_int(static_cast<int>(t_len));
        const Eigen::Index start = blk * block_len;
        const Eigen::Index stop = std::min<Eigen::Index>(start + block_len, t_len);
        for (Eigen::Index t = start; t < stop; ++t)
          column[t] = x((phase + (t - start)) % t_len, i);
      }
      const double m = column.mean();
      const double sd =
          std::sqrt((column.array() - m).square().sum() / static_cast<double>(t_len));
      if (!(sd > 0.0)) continue;  // degenerate resample: contributes nothing
      portfolio += (w[i] / sd) * (column.array() - m).matrix();
    }
    const double boot_fcl = portfolio.squaredNorm() / (static_cast<double>(t_len) * wnorm_sq);
    if (boot_fcl >= result.fcl_hat) ++n_geq;
  }
  result.p_value = static_cast<double>(n_geq) / static_cast<double>(n_boot);
  return result;
}

}  // namespace corrkit
