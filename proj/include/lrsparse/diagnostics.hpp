#pragma once

// Numerical checks of the Soft-Impute + LASSO error analysis: how far the
// k-th completion X_k is from the limit X_∞ (σ_D(k) = ‖X_k − X_∞‖₂), the
// deviation terms that feed the restricted-eigenvalue bounds, and the
// resulting l1/l2 error bounds. All logarithms are natural.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrsparse/synth.hpp"

namespace lrsparse {

struct BoundInputs {
  double sigma_d = 0.0;    // ‖X_k − X_∞‖₂
  double sigma_inf = 0.0;  // ‖X_∞‖₂
  double y_norm = 0.0;     // ‖y‖₂
  double b0 = 1.0;         // radius with ‖β‖₂ ≤ b0
  Index s = 1;
  Index m = 1;
  Index n = 2;
  double alpha1 = 1.0;  // RE curvature
  double tau = 0.0;     // RE tolerance τ(m, n)
  double lambda_k = 0.0;
  double c0 = 1.0;
};

/// ‖X_k − X_∞‖₂
double sigma_d(const DenseMatrix& x_k, const DenseMatrix& x_inf);

/// ‖y‖₂·σ_D / sqrt(log n / m)
double phi_y(const BoundInputs& in);

/// 3·σ_D·(2σ_∞ + σ_D)·b0 / sqrt(log n / m)
double phi_gamma(const BoundInputs& in);

/// max(phi_y, phi_gamma)
double phi_combined(const BoundInputs& in);

struct Deviation {
  /// ‖(X_k − X_∞)ᵀy‖_∞
  double dev_y = 0.0;
  /// ‖X_kᵀy − X_∞ᵀX_∞β‖_∞, the deviation before substituting y = X_∞β.
  double dev_y_literal = 0.0;
  /// ‖(X_kᵀX_k − X_∞ᵀX_∞)β‖_∞
  double dev_gamma = 0.0;
};

Deviation deviation_lhs(const DenseMatrix& x_k, const DenseMatrix& x_inf, const Vector& y,
                        const SparseVector& beta);

struct ReReport {
  bool holds = true;
  /// min over probes of θᵀΓθ − (α₁‖θ‖₂² − τ‖θ‖₁²), probes scaled to ‖θ‖₂ = 1.
  double worst_margin = 0.0;
  int probes_evaluated = 0;
  int violations = 0;
};

/// Sampled falsification probe of the lower restricted-eigenvalue condition
/// θᵀΓθ ≥ α₁‖θ‖₂² − τ‖θ‖₁². Evaluates every standard basis vector plus
/// `probes` random directions (Gaussian, sparse Gaussian, ±1 in rotation).
/// A pass is not a certificate.
ReReport check_lower_re(const DenseMatrix& gamma_hat, double alpha1, double tau, int probes,
                        std::uint64_t seed);

struct ErrorBounds {
  double l2_bound = 0.0;
  double l1_bound = 0.0;
  /// max(φ·sqrt(log n / m), λ_k)
  double driving_term = 0.0;
  /// √s·τ ≤ min(α₁/(128√s), φ·sqrt(log n / m))
  bool side_condition_holds = false;
};

ErrorBounds error_bounds(const BoundInputs& in);

struct AuditParams {
  /// λ_k of the per-iterate LASSO; negative selects 0.1·2‖X_∞ᵀy‖_∞.
  double lambda_k = -1.0;
  double c0 = 1.0;
  double alpha1 = 1.0;
  double tau = 0.0;
  /// b0 = b0_factor·‖β_true‖₂
  double b0_factor = 1.1;
  int re_probes = 10000;
  std::uint64_t seed = 0;
};

struct AuditStep {
  int k = 0;
  double sigma_d = 0.0;
  Deviation deviation;
  double phi_y = 0.0;
  double phi_gamma = 0.0;
  double phi_combined = 0.0;
  /// φ·sqrt(log n / m), the right-hand side of both deviation conditions.
  double deviation_bound = 0.0;
  bool deviation_chain_holds = true;   // dev_y ≤ σ_D·‖y‖₂
  bool gram_deviation_holds = true;   // dev_gamma ≤ 3σ_D(2σ_∞ + σ_D)‖β‖₂
  bool dev_y_within_bound = true;
  bool dev_gamma_within_bound = true;
  ErrorBounds bounds;
  double l2_error = 0.0;  // ‖β_k − β_true‖₂
  double l1_error = 0.0;
  bool l2_within_bound = true;
  bool l1_within_bound = true;
  /// ‖β_k‖₁ ≤ b0·√s (constraint set of the analysed estimator; not enforced).
  bool beta_in_constraint_set = true;
};

struct AuditReport {
  Index m = 0;
  Index n = 0;
  Index s = 0;
  double sigma_inf = 0.0;
  double y_norm = 0.0;
  double b0 = 0.0;
  double lambda_k = 0.0;
  double c0 = 1.0;
  double alpha1 = 1.0;
  double tau = 0.0;
  std::vector<AuditStep> steps;
  bool sigma_d_non_increasing = true;
  int sigma_d_increases = 0;
  int deviation_chain_violations = 0;
  int gram_deviation_violations = 0;
  int dev_y_bound_violations = 0;
  int dev_gamma_bound_violations = 0;
  int l2_bound_violations = 0;
  int l1_bound_violations = 0;
  ReReport re_at_limit;
};

/// Audits a Soft-Impute trace X₁…X_K (X_K stands in for X_∞) against the
/// instance's labels and true β. Throws InvalidArgument on an empty trace.
AuditReport run_bound_audit(const Instance& instance, const std::vector<DenseMatrix>& si_trace,
                            const AuditParams& params);

nlohmann::json to_json(const AuditReport& report);

}  // namespace lrsparse
