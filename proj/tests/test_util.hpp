#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "lrsparse/types.hpp"

namespace lrsparse::testing {

inline std::mt19937_64 rng_for(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

inline DenseMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline Vector gaussian_vector(Index n, std::mt19937_64& rng) {
  return gaussian_matrix(n, 1, rng).col(0);
}

inline Mask bernoulli_mask(Index rows, Index cols, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Mask m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = coin(rng);
  }
  return m;
}

inline Index uniform_index(Index lo, Index hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform_real(double lo, double hi, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double max_abs(const DenseMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Singular value thresholding through Jacobi SVD; independent of the library route.
inline DenseMatrix svt_oracle(const DenseMatrix& m, double tau) {
  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = (svd.singularValues().array() - tau).max(0.0);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Vector singular_values_oracle(const DenseMatrix& m) {
  return Eigen::JacobiSVD<DenseMatrix>(m).singularValues();
}

/// Accelerated proximal gradient on ‖Xβ − y‖² + λ‖β‖₁; independent of the
/// coordinate-descent solver.
inline Vector lasso_oracle(const DenseMatrix& x, const Vector& y, double lambda,
                           int iters = 100000) {
  const double s1 = singular_values_oracle(x)(0);
  const double t = 1.0 / (2.0 * s1 * s1);
  Vector beta = Vector::Zero(x.cols());
  Vector z = beta;
  double momentum = 1.0;
  for (int k = 0; k < iters; ++k) {
    Vector next = z - t * (2.0 * x.transpose() * (x * z - y));
    for (Index j = 0; j < next.size(); ++j) {
      const double v = next(j);
      next(j) = std::copysign(std::max(std::abs(v) - t * lambda, 0.0), v);
    }
    const double m_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
    z = next + ((momentum - 1.0) / m_next) * (next - beta);
    beta = std::move(next);
    momentum = m_next;
  }
  return beta;
}

inline DenseMatrix orthonormal_columns(Index rows, Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(gaussian_matrix(rows, cols, rng));
  return qr.householderQ() * DenseMatrix::Identity(rows, cols);
}

}  // namespace lrsparse::testing
