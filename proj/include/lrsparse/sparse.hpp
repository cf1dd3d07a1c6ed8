#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrsparse/types.hpp"

namespace lrsparse {

inline constexpr double kDefaultZeroTol = 1e-8;

/// Parameter vector with a tolerance-defined support.
struct SparseVector {
  Vector entries;
  double zero_tol = kDefaultZeroTol;

  Index size() const { return entries.size(); }
};

/// Indices i with |βᵢ| > zero_tol, ascending.
IndexSet support(const SparseVector& beta);

/// Settings for min_β ‖Xβ − y‖² + lambda·‖β‖₁ (no ½ on the quadratic).
struct LassoConfig {
  double lambda = 0.0;
  int max_sweeps = 20000;
  /// Stop once the largest coordinate move in a sweep is ≤ rel_tol·max|βⱼ|.
  double rel_tol = 1e-10;

  void validate() const;
};

/// Iterative adaptive hard thresholding.
///
/// β ← H(β + step·Xᵀ(y − Xβ), τ_k), τ_k = max(tau0·decay^k, tau_min), where H
/// zeroes entries with magnitude ≤ τ_k. Non-positive tau0/step select the
/// data-driven defaults: step = 1/‖X‖², tau0 = step·‖Xᵀy‖_∞ (the largest
/// entry of the first gradient step, so thresholding starts from an empty
/// support).
struct ImatConfig {
  double tau0 = 0.0;
  double decay = 0.85;
  double step = 0.0;
  double tau_min = 0.0;
  /// Sparse penalty on the LASSO scale. Raises the floor to step·lambda/2,
  /// so at the floor a zero coordinate stays zero exactly when
  /// |Xⱼᵀ(y − Xβ)| ≤ lambda/2, the LASSO entry condition; lambda ≥ 2‖Xᵀy‖_∞
  /// therefore returns β = 0 as the LASSO does.
  double lambda = 0.0;
  int max_iters = 300;
  double rel_tol = 1e-7;

  void validate() const;
};

/// Threshold used at iteration k (0-based).
double imat_threshold(double tau0, double decay, double tau_min, int k);

struct SparseFit {
  SparseVector beta;
  int iterations = 0;
  bool converged = false;
  /// Set when the solver's settings put it at risk (e.g. an IMAT step too
  /// large for the design).
  std::optional<std::string> warning;
  /// IMAT only: support size after each iteration and the threshold used.
  std::vector<Index> support_sizes;
  std::vector<double> thresholds;
};

/// Cyclic coordinate descent with covariance updates.
SparseFit lasso(const DenseMatrix& x, const Vector& y, const LassoConfig& cfg);

SparseFit imatcs(const DenseMatrix& x, const Vector& y, const ImatConfig& cfg);

/// ‖Xβ − y‖² + lambda·‖β‖₁
double lasso_objective(const DenseMatrix& x, const Vector& y, const Vector& beta,
                       double lambda);

/// Smallest lambda for which β = 0 solves the LASSO: 2‖Xᵀy‖_∞.
double lasso_lambda_max(const DenseMatrix& x, const Vector& y);

}  // namespace lrsparse
