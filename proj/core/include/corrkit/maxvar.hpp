#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "corrkit/correlation.hpp"
#include "corrkit/panel.hpp"

namespace corrkit {

struct FactorPortfolio {
  Eigen::VectorXd weights;  // unit-norm, on volatility-standardized positions
  std::string criterion_name;
  bool market_neutral = false;  // Σw = 0
  bool beta_neutral = false;
  bool sector_neutral = false;
  std::optional<double> fcl_value;
};

// Nondecreasing piecewise-linear rank functions: nonnegative combinations of
// ramp segments between consecutive knots on the rank-quantile axis. The
// family contains the linear function, so "the optimum is linear" is a
// falsifiable outcome rather than a built-in assumption.
struct MonotoneRankBasis {
  Eigen::VectorXd knots;  // ascending, knots[0]=0, knots.back()=1

  static MonotoneRankBasis uniform(int n_knots = 5);
  int n_ramps() const { return static_cast<int>(knots.size()) - 1; }
  // ramp j at quantile u: min(max(u - knots[j], 0), knots[j+1] - knots[j])
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& u) const;
  void validate() const;
};

// w_i = rank_i - (N+1)/2 (average ranks on ties), normalized to unit norm;
// sorted weights are equally spaced.
Eigen::VectorXd rank_weights(const Eigen::VectorXd& criterion_row);

// +1/n_top on the top floor(N·q) names, -1/n_bot on the bottom floor(N·q),
// zero elsewhere; unit-norm. q in (0, 0.5].
Eigen::VectorXd fama_french_weights(const Eigen::VectorXd& criterion_row, double quantile = 0.2);

// Orthogonal projection of w onto {x : Σx=0, xᵀβ=0, per-sector sums 0},
// renormalized to unit norm. betas empty = no beta constraint; sector_labels
// empty = no sector constraints. Redundant constraints are harmless (the
// projector is built from an SVD of the constraint rows).
Eigen::VectorXd neutralize(const Eigen::VectorXd& w, const Eigen::VectorXd& betas,
                           const std::vector<int>& sector_labels);

// Maximizes fcl(C, w) over w = (projected) nondecreasing rank functions from
// the basis. Each support subset of ramp coefficients yields a generalized
// symmetric eigenproblem; the best sign-feasible top eigenvector is the exact
// global optimum over the monotone cone intersected with the constraints.
FactorPortfolio maxvar_optimize(const CorrelationModel& model,
                                const Eigen::VectorXd& criterion_row,
                                const Eigen::VectorXd& betas,
                                const std::vector<int>& sector_labels,
                                const MonotoneRankBasis& basis = MonotoneRankBasis::uniform(),
                                const std::string& criterion_name = "");

struct FactorSet {
  Eigen::MatrixXd columns;  // N×K, unit-norm columns
  std::vector<std::string> names;
};

// One maxvar portfolio per criterion (latest row), a uniform market portfolio,
// and one long/short portfolio per sector: the factor set fed to
// constrained_eigen (e.g. 13 criteria + market + 10 sectors = 24 columns).
FactorSet build_factor_set(const ReturnPanel& panel,
                           const std::vector<CriterionPanel>& criteria,
                           const std::vector<int>& sector_labels, const Eigen::VectorXd& betas);

}  // namespace corrkit
