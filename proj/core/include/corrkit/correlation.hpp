#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "corrkit/panel.hpp"

namespace corrkit {

enum class EstimatorKind { pearson, ewma };

struct Estimator {
  EstimatorKind kind = EstimatorKind::pearson;
  double halflife_periods = 60.0;  // used by ewma only

  static Estimator pearson() { return {EstimatorKind::pearson, 0.0}; }
  static Estimator ewma(double halflife = 60.0) { return {EstimatorKind::ewma, halflife}; }
};

struct CorrelationModel {
  Eigen::MatrixXd matrix;  // N×N, symmetric, unit diagonal, PSD
  Estimator estimator;
  Eigen::Index sample_T = 0;
  std::int64_t period_seconds = 0;

  Eigen::Index size() const { return matrix.rows(); }
  // symmetric within 1e-12, unit diagonal within 1e-12, min eigenvalue >= -1e-10
  void validate() const;
};

struct EigenSystem {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, largest-|entry| positive
};

struct ReducedEigenSystem {
  Eigen::MatrixXd factor_weights;          // N×K, unit-norm columns as supplied
  Eigen::MatrixXd orthonormal_basis;       // N×K, pivoted Gram-Schmidt of the factors
  Eigen::MatrixXd reduced_matrix;          // K×K = GᵀCG
  Eigen::VectorXd constrained_eigenvalues; // descending
  Eigen::MatrixXd constrained_eigenvectors_in_asset_space;  // N×K
};

CorrelationModel correlation_matrix(const ReturnPanel& panel, const Estimator& estimator);

EigenSystem eigen_decompose(const Eigen::MatrixXd& symmetric);
EigenSystem eigen_decompose(const CorrelationModel& model);

// Replaces every eigenvalue at or below the Marchenko-Pastur upper edge
// (1+1/sqrt(q))² by the common average of the replaced bulk (trace preserved),
// rebuilds the matrix, and renormalizes the diagonal back to exactly 1.
CorrelationModel mp_clip(const CorrelationModel& model, double q);

// FCL = wᵀCw / wᵀw on volatility-standardized weights: the factor by which
// cross-correlations scale the portfolio variance relative to independence.
double fcl(const Eigen::MatrixXd& corr, const Eigen::VectorXd& w);
double fcl(const CorrelationModel& model, const Eigen::VectorXd& w);

// Modified Gram-Schmidt with column pivoting, 1e-10 rank tolerance; a
// dependent input column is reported by its (1-based) position.
Eigen::MatrixXd orthonormalize_pivoted(const Eigen::MatrixXd& columns, double tol = 1e-10);

// Principal components constrained to the span of the factor columns:
// compress C to the K×K reduced matrix on an orthonormal basis of that span,
// diagonalize there, and map the eigenvectors back to asset space. The
// constrained spectrum interlaces the full one (Poincaré separation).
ReducedEigenSystem constrained_eigen(const CorrelationModel& model,
                                     const Eigen::MatrixXd& factors);

struct FclTest {
  double fcl_hat = 0.0;
  double p_value = 1.0;
  int n_boot = 0;
  int block_len = 1;
};

// Circular block bootstrap with an independent phase per (asset, block):
// cross-asset correlation is destroyed while each asset keeps its marginal
// autocorrelation, giving the null distribution of the FCL statistic.
FclTest fcl_significance(const ReturnPanel& panel, const Eigen::VectorXd& w, int block_len,
                         int n_boot, std::uint64_t seed);

}  // namespace corrkit
