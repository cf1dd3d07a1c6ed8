#pragma once

// Data-parallel inner loops used by the solvers.
//
// Every kernel exists twice: the OpenMP version the library calls, and a
// plain-loop version in kernels::serial kept as the reference for tests and
// for the kernel benchmark. The parallel versions split work over output
// elements (or fixed-width column panels), never over a reduction axis, so
// results do not depend on the thread count.

#include "lrsparse/types.hpp"

namespace lrsparse::kernels {

/// Column-panel width used by gram(); fixed so results are thread-count independent.
inline constexpr Index kGramPanel = 64;

/// out(i,j) = observed(i,j) ? values(i,j) : current(i,j)
void fill_observed(const DenseMatrix& values, const Mask& observed,
                   const DenseMatrix& current, DenseMatrix& out);

/// MᵀM (cols × cols, symmetric).
DenseMatrix gram(const DenseMatrix& m);

/// M·x
Vector mat_vec(const DenseMatrix& m, const Vector& x);

/// Mᵀ·x
Vector mat_t_vec(const DenseMatrix& m, const Vector& x);

/// Σ over observed (x − v)²
double masked_sq_residual(const DenseMatrix& x, const DenseMatrix& values,
                          const Mask& observed);

/// ‖A − B‖_F
double frobenius_diff(const DenseMatrix& a, const DenseMatrix& b);

namespace serial {

void fill_observed(const DenseMatrix& values, const Mask& observed,
                   const DenseMatrix& current, DenseMatrix& out);
DenseMatrix gram(const DenseMatrix& m);
Vector mat_vec(const DenseMatrix& m, const Vector& x);
Vector mat_t_vec(const DenseMatrix& m, const Vector& x);
double masked_sq_residual(const DenseMatrix& x, const DenseMatrix& values,
                          const Mask& observed);
double frobenius_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace serial

/// Threads OpenMP would use for a top-level parallel region.
int max_threads();

}  // namespace lrsparse::kernels
