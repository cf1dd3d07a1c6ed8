#include "lrsparse/kernels.hpp"

#include <omp.h>

#include <cmath>

namespace lrsparse::kernels {

namespace {

constexpr Index kRowChunk = 256;

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(what) + ": shape mismatch");
  }
}

void check_mask_shape(const DenseMatrix& a, const Mask& m, const char* what) {
  if (a.rows() != m.rows() || a.cols() != m.cols()) {
    throw InvalidInput(std::string(what) + ": mask shape mismatch");
  }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void fill_observed(const DenseMatrix& values, const Mask& observed,
                   const DenseMatrix& current, DenseMatrix& out) {
  check_same_shape(values, current, "fill_observed");
  check_mask_shape(values, observed, "fill_observed");
  out.resize(values.rows(), values.cols());
  const Index rows = values.rows();
  const Index cols = values.cols();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      out(i, j) = observed(i, j) ? values(i, j) : current(i, j);
    }
  }
}

DenseMatrix gram(const DenseMatrix& m) {
  const Index n = m.cols();
  DenseMatrix g(n, n);
  const Index panels = (n + kGramPanel - 1) / kGramPanel;
  // Lower triangle panel by panel, then mirrored: exact symmetry.
#pragma omp parallel for schedule(dynamic, 1)
  for (Index p = 0; p < panels; ++p) {
    const Index j0 = p * kGramPanel;
    const Index w = std::min(kGramPanel, n - j0);
    g.block(j0, j0, n - j0, w).noalias() =
        m.middleCols(j0, n - j0).transpose() * m.middleCols(j0, w);
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) g(i, j) = g(j, i);
  }
  return g;
}

Vector mat_vec(const DenseMatrix& m, const Vector& x) {
  if (m.cols() != x.size()) throw InvalidInput("mat_vec: length mismatch");
  const Index rows = m.rows();
  Vector y(rows);
  const Index chunks = (rows + kRowChunk - 1) / kRowChunk;
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    const Index len = std::min(kRowChunk, rows - r0);
    y.segment(r0, len).noalias() = m.middleRows(r0, len) * x;
  }
  return y;
}

Vector mat_t_vec(const DenseMatrix& m, const Vector& x) {
  if (m.rows() != x.size()) throw InvalidInput("mat_t_vec: length mismatch");
  const Index cols = m.cols();
  Vector y(cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    y(j) = m.col(j).dot(x);
  }
  return y;
}

double masked_sq_residual(const DenseMatrix& x, const DenseMatrix& values,
                          const Mask& observed) {
  check_same_shape(x, values, "masked_sq_residual");
  check_mask_shape(x, observed, "masked_sq_residual");
  const Index rows = x.rows();
  const Index cols = x.cols();
  Vector partial(cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < rows; ++i) {
      if (observed(i, j)) {
        const double d = x(i, j) - values(i, j);
        acc += d * d;
      }
    }
    partial(j) = acc;
  }
  double total = 0.0;
  for (Index j = 0; j < cols; ++j) total += partial(j);
  return total;
}

double frobenius_diff(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "frobenius_diff");
  const Index rows = a.rows();
  const Index cols = a.cols();
  Vector partial(cols);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < rows; ++i) {
      const double d = a(i, j) - b(i, j);
      acc += d * d;
    }
    partial(j) = acc;
  }
  double total = 0.0;
  for (Index j = 0; j < cols; ++j) total += partial(j);
  return std::sqrt(total);
}

namespace serial {

void fill_observed(const DenseMatrix& values, const Mask& observed,
                   const DenseMatrix& current, DenseMatrix& out) {
  check_same_shape(values, current, "fill_observed");
  check_mask_shape(values, observed, "fill_observed");
  out.resize(values.rows(), values.cols());
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      out(i, j) = observed(i, j) ? values(i, j) : current(i, j);
    }
  }
}

DenseMatrix gram(const DenseMatrix& m) {
  const Index n = m.cols();
  DenseMatrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < m.rows(); ++k) acc += m(k, i) * m(k, j);
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

Vector mat_vec(const DenseMatrix& m, const Vector& x) {
  if (m.cols() != x.size()) throw InvalidInput("mat_vec: length mismatch");
  Vector y = Vector::Zero(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (Index j = 0; j < m.cols(); ++j) acc += m(i, j) * x(j);
    y(i) = acc;
  }
  return y;
}

Vector mat_t_vec(const DenseMatrix& m, const Vector& x) {
  if (m.rows() != x.size()) throw InvalidInput("mat_t_vec: length mismatch");
  Vector y(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    double acc = 0.0;
    for (Index i = 0; i < m.rows(); ++i) acc += m(i, j) * x(i);
    y(j) = acc;
  }
  return y;
}

double masked_sq_residual(const DenseMatrix& x, const DenseMatrix& values,
                          const Mask& observed) {
  check_same_shape(x, values, "masked_sq_residual");
  check_mask_shape(x, observed, "masked_sq_residual");
  double total = 0.0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (!observed(i, j)) continue;
      const double d = x(i, j) - values(i, j);
      total += d * d;
    }
  }
  return total;
}

double frobenius_diff(const DenseMatrix& a, const DenseMatrix& b) {
  check_same_shape(a, b, "frobenius_diff");
  double total = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      total += d * d;
    }
  }
  return std::sqrt(total);
}

}  // namespace serial

}  // namespace lrsparse::kernels
