#include "lrsparse/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "lrsparse/kernels.hpp"

namespace lrsparse {

namespace {

// Below this size the direct SVD is already cheap.
constexpr Index kGramRouteMinDim = 48;

void require_nonempty(const DenseMatrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw InvalidInput(std::string(what) + ": empty matrix");
  }
}

Shrinkage shrink_direct(const DenseMatrix& m, double tau) {
  Eigen::BDCSVD<DenseMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = dec.singularValues();
  Index keep = 0;
  while (keep < s.size() && s(keep) > tau) ++keep;
  Shrinkage out;
  out.shrunk_singular_values = s.head(keep).array() - tau;
  out.value.noalias() = dec.matrixU().leftCols(keep) *
                        out.shrunk_singular_values.asDiagonal() *
                        dec.matrixV().leftCols(keep).transpose();
  return out;
}

// Eigenpairs of the symmetric matrix `a` (lower triangle, destroyed) with
// eigenvalue above `lower`, ascending. Returns false if LAPACK fails.
// A full divide-and-conquer solve beats the ranged MRRR solver unless only a
// small fraction of the spectrum is kept, and early iterates keep most of it.
bool eig_above(DenseMatrix& a, double lower, Vector& w, DenseMatrix& z) {
  const auto n = static_cast<lapack_int>(a.rows());
  Vector all(a.rows());
  if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, all.data()) != 0) return false;
  Index first = all.size();
  while (first > 0 && all(first - 1) > lower) --first;
  w = all.tail(all.size() - first);
  z = a.rightCols(all.size() - first);
  return true;
}

}  // namespace

SvdFactors svd(const DenseMatrix& m) {
  require_nonempty(m, "svd");
  require_finite(m, "svd");
  Eigen::BDCSVD<DenseMatrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

DenseMatrix svt(const DenseMatrix& m, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("svt: tau must be non-negative");
  require_nonempty(m, "svt");
  require_finite(m, "svt");
  if (tau == 0.0) return m;
  return shrink_direct(m, tau).value;
}

Shrinkage shrink_singular_values(const DenseMatrix& m, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("svt: tau must be non-negative");
  require_nonempty(m, "svt");
  require_finite(m, "svt");
  if (tau == 0.0) {
    Eigen::BDCSVD<DenseMatrix> dec(m);
    const Vector& s = dec.singularValues();
    Index keep = 0;
    while (keep < s.size() && s(keep) > 0.0) ++keep;
    return {m, s.head(keep)};
  }

  const bool tall = m.rows() >= m.cols();
  if (std::min(m.rows(), m.cols()) < kGramRouteMinDim) return shrink_direct(m, tau);

  DenseMatrix g = tall ? kernels::gram(m) : kernels::gram(m.transpose());
  // Only the eigenpairs that survive the threshold are needed.
  Vector w;
  DenseMatrix z;
  if (!eig_above(g, tau * tau, w, z)) return shrink_direct(m, tau);
  const Index keep = w.size();
  if (keep == 0) {
    return {DenseMatrix::Zero(m.rows(), m.cols()), Vector()};
  }
  const double sigma_max = std::sqrt(w(keep - 1));
  if (tau < kGramRouteRelTau * sigma_max) return shrink_direct(m, tau);

  Shrinkage out;
  out.shrunk_singular_values.resize(keep);
  Vector factor(keep);
  for (Index i = 0; i < keep; ++i) {
    // Report in non-increasing order.
    const double sigma = std::sqrt(w(keep - 1 - i));
    out.shrunk_singular_values(i) = sigma - tau;
    factor(keep - 1 - i) = 1.0 - tau / sigma;
  }
  const DenseMatrix& basis = z;
  if (tall) {
    const DenseMatrix projected = m * basis;
    out.value.noalias() = projected * factor.asDiagonal() * basis.transpose();
  } else {
    const DenseMatrix projected = basis.transpose() * m;
    out.value.noalias() = basis * factor.asDiagonal() * projected;
  }
  return out;
}

double largest_eigenvalue(const DenseMatrix& symmetric) {
  require_nonempty(symmetric, "largest_eigenvalue");
  if (symmetric.rows() != symmetric.cols()) {
    throw InvalidInput("largest_eigenvalue: matrix must be square");
  }
  DenseMatrix a = symmetric;
  const auto n = static_cast<lapack_int>(a.rows());
  Vector w(a.rows());
  if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data()) == 0) {
    return w(w.size() - 1);
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double operator_norm(const DenseMatrix& m) {
  require_nonempty(m, "operator_norm");
  require_finite(m, "operator_norm");
  if (std::min(m.rows(), m.cols()) >= kGramRouteMinDim) {
    // σ₁² is the top Gram eigenvalue; relative accuracy is unaffected by squaring.
    const DenseMatrix g = m.rows() >= m.cols() ? kernels::gram(m) : kernels::gram(m.transpose());
    return std::sqrt(std::max(largest_eigenvalue(g), 0.0));
  }
  Eigen::BDCSVD<DenseMatrix> dec(m);
  return dec.singularValues()(0);
}

double nuclear_norm(const DenseMatrix& m) {
  require_nonempty(m, "nuclear_norm");
  require_finite(m, "nuclear_norm");
  Eigen::BDCSVD<DenseMatrix> dec(m);
  return dec.singularValues().sum();
}

Vector least_squares(const DenseMatrix& x, const Vector& y) {
  if (x.rows() != y.size()) {
    throw InvalidInput("least_squares: X rows must equal length of y");
  }
  require_nonempty(x, "least_squares");
  require_finite(x, "least_squares");
  require_finite(y, "least_squares");

  const auto m = static_cast<lapack_int>(x.rows());
  const auto n = static_cast<lapack_int>(x.cols());
  const lapack_int ldb = std::max(m, n);
  DenseMatrix a = x;
  Vector b = Vector::Zero(ldb);
  b.head(m) = y;
  Vector s(std::min(m, n));
  lapack_int rank = 0;
  const lapack_int info = LAPACKE_dgelsd(LAPACK_COL_MAJOR, m, n, 1, a.data(), m, b.data(),
                                         ldb, s.data(), kPinvRelCutoff, &rank);
  if (info != 0) {
    // dgelsd only fails when its SVD does not converge; retry through Eigen.
    Eigen::BDCSVD<DenseMatrix> dec(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    dec.setThreshold(kPinvRelCutoff);
    return dec.solve(y);
  }
  return b.head(n);
}

}  // namespace lrsparse
