#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrsparse/completion.hpp"
#include "lrsparse/sparse.hpp"

namespace lrsparse {

enum class SparseSolver { Lasso, Imatcs };

enum class Method { TwoStep, FourStep, AugmentedFourStep };

std::string to_string(SparseSolver s);
std::string to_string(Method m);
SparseSolver parse_solver(const std::string& s);
Method parse_method(const std::string& s);

/// One finished outer iteration, as seen by PipelineParams::on_outer_iteration.
/// `completed` is the augmented matrix [X | Xβ] for the augmented method.
struct OuterIterate {
  char phase;  // 'A' or 'B'
  int iteration;
  const DenseMatrix& completed;
  const Vector& beta;
};

struct PipelineParams {
  /// Phase-A stop: ‖β_k − β_{k+1}‖₂ ≤ epsilon. Phase A only has to settle
  /// the support, so the default is coarse.
  double epsilon = 1e-1;
  /// Phase-B stop, must be below epsilon.
  double alpha_stop = 1e-4;
  /// Nuclear-norm weight of every completion step.
  double lambda1 = 0.0;
  /// l1 weight of every sparse step (LASSO scale; IMAT maps it to its threshold floor).
  double lambda2 = 0.0;
  /// Solver used for every sparse step.
  SparseSolver final_solver = SparseSolver::Imatcs;

  int max_outer_iters = 50;
  CompletionConfig quick = CompletionConfig::quick(0.0);
  CompletionConfig accurate = CompletionConfig::accurate(0.0);
  LassoConfig lasso;
  ImatConfig imat;
  double zero_tol = kDefaultZeroTol;

  std::function<void(const OuterIterate&)> on_outer_iteration;

  void validate() const;
};

struct PhaseTrace {
  int outer_iterations = 0;
  bool converged = false;
  /// ‖β_k − β_{k+1}‖₂ after each outer iteration.
  std::vector<double> beta_change;
  /// Completion objective plus sparse objective after each outer iteration.
  std::vector<double> objective;
  int completion_iterations = 0;
};

struct RecoveryResult {
  SparseVector beta_hat;
  IndexSet support_estimate;
  /// Support found at the end of Phase A (four-step variants only).
  IndexSet phase_a_support;
  std::map<std::string, double> stage_times;
  PhaseTrace phase_a;
  PhaseTrace phase_b;
  bool converged = false;

  double total_seconds() const;
};

/// Phase A ended with an empty support; `partial` holds the Phase-A state
/// (β̂ = 0 of full length) so callers can fall back.
class EmptySupportError : public std::runtime_error {
 public:
  explicit EmptySupportError(RecoveryResult partial)
      : std::runtime_error("four-step: phase A produced an empty support"),
        partial_(std::move(partial)) {}
  const RecoveryResult& partial() const { return partial_; }

 private:
  RecoveryResult partial_;
};

/// Accurate completion of the whole matrix, then one sparse solve.
RecoveryResult two_step(const MaskedMatrix& input, const Vector& y,
                        const PipelineParams& params);

/// Second half of two_step, reusing an existing accurate completion (the
/// completion does not depend on lambda2, so lambda2 sweeps can share it).
RecoveryResult two_step_from_completion(const CompletionResult& mc2, double mc2_seconds,
                                        const Vector& y, const PipelineParams& params);

/// Quick alternation to a support estimate, column restriction, accurate
/// alternation on the restricted matrix, re-embedding.
RecoveryResult four_step(const MaskedMatrix& input, const Vector& y,
                         const PipelineParams& params);

/// four_step where each completion runs on Z = [X | Xβ] with the labels as
/// the (fully observed) last column; Z's last column is reset to Xβ after
/// every sparse step.
RecoveryResult augmented_four_step(const MaskedMatrix& input, const Vector& y,
                                   const PipelineParams& params);

RecoveryResult run_pipeline(Method method, const MaskedMatrix& input, const Vector& y,
                            const PipelineParams& params);

/// Columns listed in `support` (non-empty, strictly ascending, in range).
MaskedMatrix restrict_columns(const MaskedMatrix& input, const IndexSet& support);

/// Length-n vector with beta_s scattered onto `support`, zero elsewhere.
SparseVector embed_support(const SparseVector& beta_s, const IndexSet& support, Index n);

/// Runs the configured sparse solver with lambda2.
SparseFit solve_sparse(const DenseMatrix& x, const Vector& y, const PipelineParams& params);

}  // namespace lrsparse
