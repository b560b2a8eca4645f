#include "corrkit/maxvar.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>

#include "corrkit/errors.hpp"
#include "corrkit/stats.hpp"

namespace corrkit {

MonotoneRankBasis MonotoneRankBasis::uniform(int n_knots) {
  if (n_knots < 2) throw ValidationError("rank basis: need at least 2 knots");
  MonotoneRankBasis basis;
  basis.knots = Eigen::VectorXd::LinSpaced(n_knots, 0.0, 1.0);
  return basis;
}

void MonotoneRankBasis::validate() const {
  if (knots.size() < 2) throw ValidationError("rank basis: need at least 2 knots");
  if (std::abs(knots[0]) > 1e-12 || std::abs(knots[knots.size() - 1] - 1.0) > 1e-12)
    throw ValidationError("rank basis: knots must start at 0 and end at 1");
  for (Eigen::Index j = 1; j < knots.size(); ++j)
    if (!(knots[j] > knots[j - 1])) throw ValidationError("rank basis: knots must be increasing");
  if (n_ramps() > 16)
    throw ValidationError("rank basis: more than 16 segments (subset search would explode)");
}

Eigen::MatrixXd MonotoneRankBasis::evaluate(const Eigen::VectorXd& u) const {
  validate();
  const int p = n_ramps();
  Eigen::MatrixXd psi(u.size(), p);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (int j = 0; j < p; ++j)
      psi(i, j) = std::min(std::max(u[i] - knots[j], 0.0), knots[j + 1] - knots[j]);
  return psi;
}

namespace {

Eigen::VectorXd checked_ranks(const Eigen::VectorXd& criterion_row) {
  if (criterion_row.size() < 2) throw ValidationError("criterion row: need at least 2 assets");
  if (!criterion_row.allFinite())
    throw ValidationError("criterion row: non-finite values are not rankable");
  const double first = criterion_row[0];
  bool distinct = false;
  for (Eigen::Index i = 1; i < criterion_row.size(); ++i)
    if (criterion_row[i] != first) distinct = true;
  if (!distinct) throw ValidationError("criterion row: all values equal, not rankable");
  return average_ranks(criterion_row);
}

}  // namespace

Eigen::VectorXd rank_weights(const Eigen::VectorXd& criterion_row) {
  Eigen::VectorXd ranks = checked_ranks(criterion_row);
  const double n = static_cast<double>(ranks.size());
  Eigen::VectorXd w = ranks.array() - (n + 1.0) / 2.0;
  const double norm = w.norm();
  if (!(norm > 1e-12))
    throw ValidationError("criterion row: ties collapse every centered rank to zero");
  return w / norm;
}

Eigen::VectorXd fama_french_weights(const Eigen::VectorXd& criterion_row, double quantile) {
  if (!(quantile > 0.0 && quantile <= 0.5))
    throw ValidationError("fama_french_weights: quantile must lie in (0, 0.5]");
  Eigen::VectorXd ranks = checked_ranks(criterion_row);
  const Eigen::Index n = ranks.size();
  const Eigen::Index n_side = static_cast<Eigen::Index>(std::floor(static_cast<double>(n) * quantile));
  if (n_side < 1)
    throw ValidationError("fama_french_weights: N*quantile < 1, no names per side");

  // rank cutoffs: bottom n_side smallest ranks short, top n_side largest long
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return ranks[a] != ranks[b] ? ranks[a] < ranks[b] : a < b;  // index tiebreak: deterministic
  });

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < n_side; ++s) {
    w[order[static_cast<size_t>(s)]] = -1.0 / static_cast<double>(n_side);
    w[order[static_cast<size_t>(n - 1 - s)]] = 1.0 / static_cast<double>(n_side);
  }
  const double norm = w.norm();
  if (!(norm > 1e-12)) throw ValidationError("fama_french_weights: degenerate portfolio");
  return w / norm;
}

namespace {

// Rows of the constraint system {x : Ax = 0}. Always includes the
// dollar-neutrality row of ones.
Eigen::MatrixXd constraint_rows(Eigen::Index n, const Eigen::VectorXd& betas,
                                const std::vector<int>& sector_labels) {
  std::vector<Eigen::VectorXd> rows;
  rows.push_back(Eigen::VectorXd::Ones(n));
  if (betas.size() > 0) {
    if (betas.size() != n) throw ValidationError("neutralize: beta size mismatch");
    if (!betas.allFinite()) throw ValidationError("neutralize: betas must be finite");
    rows.push_back(betas);
  }
  if (!sector_labels.empty()) {
    if (static_cast<Eigen::Index>(sector_labels.size()) != n)
      throw ValidationError("neutralize: sector label count mismatch");
    std::map<int, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[sector_labels[static_cast<size_t>(i)]].push_back(i);
    for (const auto& [label, members] : groups) {
      if (members.size() < 2)
        throw ValidationError("neutralize: sector " + std::to_string(label) +
                              " has fewer than 2 members");
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i : members) row[i] = 1.0;
      rows.push_back(row);
    }
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), n);
  for (size_t r = 0; r < rows.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = rows[r];
  return a;
}

// Orthonormal basis of the row space of A (rank via SVD, redundant rows fine).
Eigen::MatrixXd constraint_space_basis(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const double tol = 1e-12 * std::max(a.rows(), a.cols()) * svd.singularValues()[0];
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++rank;
  return svd.matrixV().leftCols(rank);  // N×r
}

}  // namespace

Eigen::VectorXd neutralize(const Eigen::VectorXd& w, const Eigen::VectorXd& betas,
                           const std::vector<int>& sector_labels) {
  const Eigen::Index n = w.size();
  if (n < 2) throw ValidationError("neutralize: need at least 2 assets");
  Eigen::MatrixXd a = constraint_rows(n, betas, sector_labels);
  Eigen::MatrixXd v = constraint_space_basis(a);
  if (v.cols() >= n)
    throw ValidationError("neutralize: constraints span the whole space (nothing to hold)");

  Eigen::VectorXd projected = w - v * (v.transpose() * w);
  const double norm = projected.norm();
  if (!(norm > 1e-12 * std::max(1.0, w.norm())))
    throw ValidationError("neutralize: portfolio lies entirely inside the constraint space");
  return projected / norm;
}

FactorPortfolio maxvar_optimize(const CorrelationModel& model,
                                const Eigen::VectorXd& criterion_row,
                                const Eigen::VectorXd& betas,
                                const std::vector<int>& sector_labels,
                                const MonotoneRankBasis& basis, const std::string& criterion_name) {
  basis.validate();
  const Eigen::Index n = model.size();
  if (criterion_row.size() != n)
    throw ValidationError("maxvar_optimize: criterion size must match correlation size");

  Eigen::VectorXd ranks = checked_ranks(criterion_row);
  Eigen::VectorXd u = (ranks.array() - 0.5) / static_cast<double>(n);
  Eigen::MatrixXd psi = basis.evaluate(u);
  const int p = static_cast<int>(psi.cols());

  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(psi);
    qr.setThreshold(1e-10);
    if (qr.rank() < 2)
      throw ValidationError("maxvar_optimize: basis evaluates to rank < 2 on these ranks");
  }

  // project the ramp columns onto the feasible subspace
  Eigen::MatrixXd a = constraint_rows(n, betas, sector_labels);
  Eigen::MatrixXd v = constraint_space_basis(a);
  if (v.cols() >= n) throw ValidationError("maxvar_optimize: constraints span the whole space");
  Eigen::MatrixXd z = psi - v * (v.transpose() * psi);

  double best_value = -1.0;
  Eigen::VectorXd best_w;
  const unsigned subsets = (1u << p);
  for (unsigned mask = 1; mask < subsets; ++mask) {
    std::vector<int> cols;
    for (int j = 0; j < p; ++j)
      if (mask & (1u << j)) cols.push_back(j);
    const int m = static_cast<int>(cols.size());
    Eigen::MatrixXd zs(n, m);
    for (int c = 0; c < m; ++c) zs.col(c) = z.col(cols[static_cast<size_t>(c)]);

    Eigen::MatrixXd gram = zs.transpose() * zs;
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(gram, Eigen::EigenvaluesOnly);
      if (check.info() != Eigen::Success || check.eigenvalues().minCoeff() < 1e-12) continue;
    }
    Eigen::MatrixXd projected_c = zs.transpose() * model.matrix * zs;
    projected_c = (0.5 * (projected_c + projected_c.transpose())).eval();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(projected_c, gram);
    if (solver.info() != Eigen::Success) continue;
    const Eigen::Index top = solver.eigenvalues().size() - 1;
    const double value = solver.eigenvalues()[top];
    Eigen::VectorXd coeff = solver.eigenvectors().col(top);

    // the monotone cone admits only uniform-sign ramp coefficients
    const double pos = coeff.maxCoeff();
    const double neg = coeff.minCoeff();
    const double tol = 1e-10 * coeff.cwiseAbs().maxCoeff();
    bool feasible = false;
    if (neg >= -tol)
      feasible = true;
    else if (pos <= tol) {
      coeff = -coeff;
      feasible = true;
    }
    if (!feasible) continue;

    if (value > best_value + 1e-14) {
      Eigen::VectorXd w = zs * coeff;
      const double norm = w.norm();
      if (!(norm > 1e-12)) continue;
      best_value = value;
      best_w = w / norm;
    }
  }

  if (best_w.size() == 0)
    throw ValidationError(
        "maxvar_optimize: constraints leave no monotone rank portfolio (degenerate subspace)");

  FactorPortfolio portfolio;
  portfolio.weights = best_w;
  portfolio.criterion_name = criterion_name;
  portfolio.market_neutral = true;
  portfolio.beta_neutral = betas.size() > 0;
  portfolio.sector_neutral = !sector_labels.empty();
  portfolio.fcl_value = fcl(model, best_w);
  return portfolio;
}

FactorSet build_factor_set(const ReturnPanel& panel, const std::vector<CriterionPanel>& criteria,
                           const std::vector<int>& sector_labels, const Eigen::VectorXd& betas) {
  if (criteria.empty()) throw ValidationError("build_factor_set: need at least one criterion");
  const Eigen::Index n = panel.n_assets();
  CorrelationModel model = correlation_matrix(panel, Estimator::pearson());

  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> names;
  for (const auto& crit : criteria) {
    crit.validate();
    if (crit.values.cols() != n)
      throw ValidationError("build_factor_set: criterion '" + crit.name +
                            "' asset count mismatch");
    const Eigen::VectorXd row = crit.values.row(crit.values.rows() - 1);
    FactorPortfolio p = maxvar_optimize(model, row, betas, sector_labels,
                                        MonotoneRankBasis::uniform(), crit.name);
    columns.push_back(p.weights);
    names.push_back("maxvar_" + crit.name);
  }

  columns.push_back(Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  names.push_back("market");

  if (!sector_labels.empty()) {
    if (static_cast<Eigen::Index>(sector_labels.size()) != n)
      throw ValidationError("build_factor_set: sector label count mismatch");
    std::map<int, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[sector_labels[static_cast<size_t>(i)]].push_back(i);
    for (const auto& [label, members] : groups) {
      const double n_in = static_cast<double>(members.size());
      const double n_out = static_cast<double>(n) - n_in;
      if (n_out < 1)
        throw ValidationError("build_factor_set: sector " + std::to_string(label) +
                              " covers every asset");
      Eigen::VectorXd w = Eigen::VectorXd::Constant(n, -1.0 / n_out);
      for (Eigen::Index i : members) w[i] = 1.0 / n_in;
      columns.push_back(w / w.norm());
      names.push_back("sector_" + std::to_string(label));
    }
  }

  FactorSet set;
  set.columns.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (size_t c = 0; c < columns.size(); ++c)
    set.columns.col(static_cast<Eigen::Index>(c)) = columns[c];
  set.names = std::move(names);
  return set;
}

}  // namespace corrkit
