#pragma once

#include "lrsparse/types.hpp"

namespace lrsparse {

/// Thin SVD: M = U·diag(σ)·Vᵀ with σ non-increasing.
struct SvdFactors {
  DenseMatrix left_vectors;
  Vector singular_values;
  DenseMatrix right_vectors;
};

SvdFactors svd(const DenseMatrix& m);

/// Singular-value soft-thresholding: U·diag(max(σ − tau, 0))·Vᵀ.
/// Throws InvalidArgument for tau < 0.
DenseMatrix svt(const DenseMatrix& m, double tau);

/// Result of a thresholding step that also reports the surviving spectrum,
/// so callers can evaluate the nuclear norm of the output for free.
struct Shrinkage {
  DenseMatrix value;
  Vector shrunk_singular_values;  // only the strictly positive ones
};

/// Same operator as svt(), tuned for repeated use inside iterative solvers.
///
/// When the threshold is at least kGramRouteRelTau·σ₁ the spectrum is taken
/// from an eigendecomposition of the smaller Gram matrix (MᵀM or MMᵀ);
/// components at or below the threshold are discarded anyway, and for the
/// kept ones the squared-condition loss is bounded by eps·(σ₁/tau)². Below
/// that ratio it falls back to the direct SVD.
Shrinkage shrink_singular_values(const DenseMatrix& m, double tau);

inline constexpr double kGramRouteRelTau = 1e-3;

/// Largest singular value.
double operator_norm(const DenseMatrix& m);

/// Largest eigenvalue of a symmetric matrix (lower triangle is read).
double largest_eigenvalue(const DenseMatrix& symmetric);

/// Sum of singular values.
double nuclear_norm(const DenseMatrix& m);

/// Minimum-norm minimizer of ‖Xβ − y‖₂. Singular values at or below
/// kPinvRelCutoff·σ₁ are treated as zero.
Vector least_squares(const DenseMatrix& x, const Vector& y);

inline constexpr double kPinvRelCutoff = 1e-10;

}  // namespace lrsparse
