#pragma once

#include <optional>
#include <vector>

#include "lrsparse/types.hpp"

namespace lrsparse {

/// Dense value grid plus an explicit observation mask.
///
/// Unobserved positions are stored as 0 and never read as data; solvers go
/// through observed() for every access. Whatever the caller puts there
/// (including NaN) is discarded on construction.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(DenseMatrix values, Mask observed);

  static MaskedMatrix fully_observed(DenseMatrix values);

  const DenseMatrix& values() const { return values_; }
  const Mask& observed() const { return observed_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  Index observed_count() const { return observed_count_; }
  bool is_fully_observed() const { return observed_count_ == values_.size(); }

  /// Values with unobserved entries set to zero (the Hadamard-product view).
  const DenseMatrix& zero_filled() const { return values_; }

  /// Sub-matrix made of the listed rows, masks included.
  MaskedMatrix select_rows(const IndexSet& rows) const;

 private:
  DenseMatrix values_;
  Mask observed_;
  Index observed_count_ = 0;
};

enum class Budget { Quick, Accurate };

/// Soft-Impute settings. lambda weights the nuclear norm in
/// ‖P_E(X − X̂)‖² + lambda·‖X‖_*; the per-iteration threshold is lambda/2.
struct CompletionConfig {
  double lambda = 0.0;
  int max_iters = 500;
  double rel_tol = 1e-6;
  Budget budget = Budget::Accurate;
  /// Keep every iterate X₁…X_K in the result (for bound audits).
  bool keep_iterates = false;

  static constexpr int kQuickIters = 5;
  static constexpr double kQuickTol = 1e-2;
  static constexpr int kAccurateIters = 500;
  static constexpr double kAccurateTol = 1e-6;

  static CompletionConfig quick(double lambda) {
    return {lambda, kQuickIters, kQuickTol, Budget::Quick, false};
  }
  static CompletionConfig accurate(double lambda) {
    return {lambda, kAccurateIters, kAccurateTol, Budget::Accurate, false};
  }

  void validate() const;
};

struct CompletionResult {
  DenseMatrix completed;
  /// Objective after each iteration.
  std::vector<double> objective_trace;
  int iterations_used = 0;
  bool converged = false;
  std::vector<DenseMatrix> iterates;
};

/// Soft-Impute: X ← svt(P_E(X̂) + P_E⊥(X), λ/2) from X₀ = 0 until
/// ‖X_{k+1} − X_k‖_F / max(1, ‖X_k‖_F) ≤ rel_tol or max_iters.
CompletionResult soft_impute(const MaskedMatrix& input, const CompletionConfig& cfg);

/// Same, starting from `warm_start` instead of the zero matrix.
CompletionResult soft_impute(const MaskedMatrix& input, const CompletionConfig& cfg,
                             const DenseMatrix& warm_start);

/// Soft-Impute capped at the Quick budget.
CompletionResult quick_complete(const MaskedMatrix& input, double lambda1);

/// ‖P_E(X − X̂)‖² + lambda·‖X‖_*
double eval_objective(const DenseMatrix& x, const MaskedMatrix& input, double lambda);

}  // namespace lrsparse
