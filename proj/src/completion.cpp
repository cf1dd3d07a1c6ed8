#include "lrsparse/completion.hpp"

#include <algorithm>
#include <cmath>

#include "lrsparse/kernels.hpp"
#include "lrsparse/linalg.hpp"

namespace lrsparse {

MaskedMatrix::MaskedMatrix(DenseMatrix values, Mask observed)
    : values_(std::move(values)), observed_(std::move(observed)) {
  if (values_.rows() != observed_.rows() || values_.cols() != observed_.cols()) {
    throw InvalidInput("MaskedMatrix: values and mask shapes differ");
  }
  observed_count_ = 0;
  for (Index j = 0; j < values_.cols(); ++j) {
    for (Index i = 0; i < values_.rows(); ++i) {
      if (observed_(i, j)) {
        if (!std::isfinite(values_(i, j))) {
          throw InvalidInput("MaskedMatrix: non-finite observed entry");
        }
        ++observed_count_;
      } else {
        values_(i, j) = 0.0;
      }
    }
  }
}

MaskedMatrix MaskedMatrix::fully_observed(DenseMatrix values) {
  Mask all = Mask::Constant(values.rows(), values.cols(), true);
  return MaskedMatrix(std::move(values), std::move(all));
}

MaskedMatrix MaskedMatrix::select_rows(const IndexSet& rows) const {
  DenseMatrix v(static_cast<Index>(rows.size()), cols());
  Mask o(static_cast<Index>(rows.size()), cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index src = rows[r];
    if (src < 0 || src >= this->rows()) throw InvalidArgument("select_rows: index out of range");
    v.row(static_cast<Index>(r)) = values_.row(src);
    o.row(static_cast<Index>(r)) = observed_.row(src);
  }
  return MaskedMatrix(std::move(v), std::move(o));
}

void CompletionConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("completion: lambda must be a finite non-negative number");
  }
  if (max_iters < 1) throw InvalidArgument("completion: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("completion: rel_tol must be positive");
}

CompletionResult soft_impute(const MaskedMatrix& input, const CompletionConfig& cfg,
                             const DenseMatrix& warm_start) {
  cfg.validate();
  if (input.observed_count() == 0) {
    throw DegenerateInput("soft_impute: no observed entries");
  }
  if (warm_start.rows() != input.rows() || warm_start.cols() != input.cols()) {
    throw InvalidInput("soft_impute: warm start shape mismatch");
  }
  require_finite(warm_start, "soft_impute warm start");

  const double tau = cfg.lambda / 2.0;
  CompletionResult out;
  DenseMatrix current = warm_start;
  DenseMatrix filled;
  out.objective_trace.reserve(static_cast<std::size_t>(cfg.max_iters));

  for (int k = 0; k < cfg.max_iters; ++k) {
    kernels::fill_observed(input.values(), input.observed(), current, filled);
    Shrinkage step = shrink_singular_values(filled, tau);

    const double objective =
        kernels::masked_sq_residual(step.value, input.values(), input.observed()) +
        cfg.lambda * step.shrunk_singular_values.sum();
    const double change = kernels::frobenius_diff(step.value, current) /
                          std::max(1.0, current.norm());

    current = std::move(step.value);
    out.objective_trace.push_back(objective);
    out.iterations_used = k + 1;
    if (cfg.keep_iterates) out.iterates.push_back(current);

    // With a total mask the filled matrix no longer depends on the iterate,
    // so the first step already lands on the fixed point.
    if (input.is_fully_observed() || change <= cfg.rel_tol) {
      out.converged = true;
      break;
    }
  }
  out.completed = std::move(current);
  return out;
}

CompletionResult soft_impute(const MaskedMatrix& input, const CompletionConfig& cfg) {
  return soft_impute(input, cfg, DenseMatrix::Zero(input.rows(), input.cols()));
}

CompletionResult quick_complete(const MaskedMatrix& input, double lambda1) {
  return soft_impute(input, CompletionConfig::quick(lambda1));
}

double eval_objective(const DenseMatrix& x, const MaskedMatrix& input, double lambda) {
  if (x.rows() != input.rows() || x.cols() != input.cols()) {
    throw InvalidInput("eval_objective: shape mismatch");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("eval_objective: lambda must be non-negative");
  const double fit = kernels::masked_sq_residual(x, input.values(), input.observed());
  return lambda == 0.0 ? fit : fit + lambda * nuclear_norm(x);
}

}  // namespace lrsparse
