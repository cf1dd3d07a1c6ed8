#include "lrsparse/pipelines.hpp"

#include <chrono>
#include <cmath>

#include "lrsparse/kernels.hpp"
#include "lrsparse/linalg.hpp"

namespace lrsparse {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      sink_[stage] += seconds_since(start);
    } else {
      auto out = f();
      sink_[stage] += seconds_since(start);
      return out;
    }
  }

 private:
  static double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
  }
  std::map<std::string, double>& sink_;
};

void check_problem(const MaskedMatrix& input, const Vector& y) {
  if (input.rows() != y.size()) {
    throw InvalidInput("pipeline: matrix rows must equal length of y");
  }
  if (input.rows() == 0 || input.cols() == 0) throw InvalidInput("pipeline: empty matrix");
  require_finite(y, "pipeline labels");
  if (input.observed_count() == 0) {
    throw DegenerateInput("pipeline: no observed entries");
  }
}

CompletionConfig with_lambda(CompletionConfig cfg, double lambda) {
  cfg.lambda = lambda;
  return cfg;
}

/// [X̂ | y] with the label column fully observed.
MaskedMatrix augment(const MaskedMatrix& input, const Vector& y) {
  const Index n = input.cols();
  DenseMatrix values(input.rows(), n + 1);
  values.leftCols(n) = input.values();
  values.col(n) = y;
  Mask observed(input.rows(), n + 1);
  observed.leftCols(n) = input.observed();
  observed.col(n).setConstant(true);
  return MaskedMatrix(std::move(values), std::move(observed));
}

struct PhaseOutcome {
  Vector beta;
  PhaseTrace trace;
};

// Block-coordinate alternation shared by both phases of both four-step
// variants: completion (warm-started) then sparse solve, until the β step
// drops to `stop`.
PhaseOutcome alternate(const MaskedMatrix& completion_input, const MaskedMatrix& design,
                       const Vector& y, const PipelineParams& params,
                       const CompletionConfig& budget, double stop, char phase,
                       bool augmented, StageTimer& timer, const std::string& mc_stage,
                       const std::string& sparse_stage) {
  const Index n = design.cols();
  PhaseOutcome out;
  Vector beta_prev =
      timer.time(phase == 'A' ? "ls_init" : "ls_init_b",
                 [&] { return least_squares(design.zero_filled(), y); });
  DenseMatrix current = DenseMatrix::Zero(completion_input.rows(), completion_input.cols());

  for (int k = 1; k <= params.max_outer_iters; ++k) {
    CompletionResult mc =
        timer.time(mc_stage, [&] { return soft_impute(completion_input, budget, current); });
    out.trace.completion_iterations += mc.iterations_used;
    current = std::move(mc.completed);

    const DenseMatrix x_part = augmented ? DenseMatrix(current.leftCols(n)) : current;
    SparseFit fit = timer.time(sparse_stage, [&] { return solve_sparse(x_part, y, params); });
    Vector beta = std::move(fit.beta.entries);

    if (augmented) current.col(n) = kernels::mat_vec(x_part, beta);

    const double change = (beta - beta_prev).norm();
    out.trace.beta_change.push_back(change);
    out.trace.objective.push_back(mc.objective_trace.back() +
                                  lasso_objective(x_part, y, beta, params.lambda2));
    out.trace.outer_iterations = k;
    if (params.on_outer_iteration) params.on_outer_iteration({phase, k, current, beta});

    beta_prev = std::move(beta);
    if (change <= stop) {
      out.trace.converged = true;
      break;
    }
  }
  out.beta = std::move(beta_prev);
  return out;
}

RecoveryResult four_step_impl(const MaskedMatrix& input, const Vector& y,
                              const PipelineParams& params, bool augmented) {
  check_problem(input, y);
  params.validate();
  const Index n = input.cols();

  RecoveryResult result;
  StageTimer timer(result.stage_times);
  const CompletionConfig quick = with_lambda(params.quick, params.lambda1);
  const CompletionConfig accurate = with_lambda(params.accurate, params.lambda1);

  const MaskedMatrix phase_a_input = augmented ? augment(input, y) : input;
  PhaseOutcome a = alternate(phase_a_input, input, y, params, quick, params.epsilon, 'A',
                             augmented, timer, "mc1", "sparse_a");
  result.phase_a = a.trace;
  result.phase_a_support = support(SparseVector{a.beta, params.zero_tol});

  if (result.phase_a_support.empty()) {
    result.beta_hat = SparseVector{Vector::Zero(n), params.zero_tol};
    result.converged = false;
    throw EmptySupportError(std::move(result));
  }

  const IndexSet& s = result.phase_a_support;
  const MaskedMatrix restricted = timer.time("restrict", [&] { return restrict_columns(input, s); });
  const MaskedMatrix phase_b_input = augmented ? augment(restricted, y) : restricted;
  PhaseOutcome b = alternate(phase_b_input, restricted, y, params, accurate, params.alpha_stop,
                             'B', augmented, timer, "mc2", "sparse_b");
  result.phase_b = b.trace;

  result.beta_hat = embed_support(SparseVector{b.beta, params.zero_tol}, s, n);
  result.support_estimate = support(result.beta_hat);
  result.converged = result.phase_a.converged && result.phase_b.converged;
  return result;
}

}  // namespace

std::string to_string(SparseSolver s) {
  return s == SparseSolver::Lasso ? "lasso" : "imat";
}

std::string to_string(Method m) {
  switch (m) {
    case Method::TwoStep: return "two-step";
    case Method::FourStep: return "four-step";
    case Method::AugmentedFourStep: return "augmented-four-step";
  }
  return "unknown";
}

SparseSolver parse_solver(const std::string& s) {
  if (s == "lasso") return SparseSolver::Lasso;
  if (s == "imat" || s == "imatcs") return SparseSolver::Imatcs;
  throw InvalidArgument("unknown solver '" + s + "' (expected lasso|imat)");
}

Method parse_method(const std::string& s) {
  if (s == "two-step" || s == "two" || s == "2") return Method::TwoStep;
  if (s == "four-step" || s == "four" || s == "4") return Method::FourStep;
  if (s == "augmented-four-step" || s == "augmented" || s == "aug") {
    return Method::AugmentedFourStep;
  }
  throw InvalidArgument("unknown method '" + s + "'");
}

void PipelineParams::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("pipeline: epsilon must be positive");
  if (!(alpha_stop > 0.0)) throw InvalidArgument("pipeline: alpha_stop must be positive");
  if (!(alpha_stop < epsilon)) throw InvalidArgument("pipeline: alpha_stop must be below epsilon");
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw InvalidArgument("pipeline: lambda1 must be a finite non-negative number");
  }
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
    throw InvalidArgument("pipeline: lambda2 must be a finite non-negative number");
  }
  if (max_outer_iters < 1) throw InvalidArgument("pipeline: max_outer_iters must be >= 1");
  with_lambda(quick, lambda1).validate();
  with_lambda(accurate, lambda1).validate();
}

double RecoveryResult::total_seconds() const {
  double total = 0.0;
  for (const auto& [stage, seconds] : stage_times) total += seconds;
  return total;
}

SparseFit solve_sparse(const DenseMatrix& x, const Vector& y, const PipelineParams& params) {
  SparseFit fit;
  if (params.final_solver == SparseSolver::Lasso) {
    LassoConfig cfg = params.lasso;
    cfg.lambda = params.lambda2;
    fit = lasso(x, y, cfg);
  } else {
    ImatConfig cfg = params.imat;
    cfg.lambda = params.lambda2;
    fit = imatcs(x, y, cfg);
  }
  fit.beta.zero_tol = params.zero_tol;
  return fit;
}

RecoveryResult two_step_from_completion(const CompletionResult& mc2, double mc2_seconds,
                                        const Vector& y, const PipelineParams& params) {
  if (mc2.completed.rows() != y.size()) {
    throw InvalidInput("two_step: matrix rows must equal length of y");
  }
  RecoveryResult result;
  StageTimer timer(result.stage_times);
  result.stage_times["mc2"] = mc2_seconds;
  SparseFit fit = timer.time("sparse", [&] { return solve_sparse(mc2.completed, y, params); });

  result.phase_a.outer_iterations = 1;
  result.phase_a.converged = mc2.converged && fit.converged;
  result.phase_a.completion_iterations = mc2.iterations_used;
  result.phase_a.objective.push_back(
      mc2.objective_trace.back() +
      lasso_objective(mc2.completed, y, fit.beta.entries, params.lambda2));
  if (params.on_outer_iteration) {
    params.on_outer_iteration({'A', 1, mc2.completed, fit.beta.entries});
  }
  result.beta_hat = std::move(fit.beta);
  result.support_estimate = support(result.beta_hat);
  result.converged = result.phase_a.converged;
  return result;
}

RecoveryResult two_step(const MaskedMatrix& input, const Vector& y,
                        const PipelineParams& params) {
  check_problem(input, y);
  params.validate();
  const auto start = Clock::now();
  const CompletionResult mc2 = soft_impute(input, with_lambda(params.accurate, params.lambda1));
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return two_step_from_completion(mc2, seconds, y, params);
}

RecoveryResult four_step(const MaskedMatrix& input, const Vector& y,
                         const PipelineParams& params) {
  return four_step_impl(input, y, params, false);
}

RecoveryResult augmented_four_step(const MaskedMatrix& input, const Vector& y,
                                   const PipelineParams& params) {
  return four_step_impl(input, y, params, true);
}

RecoveryResult run_pipeline(Method method, const MaskedMatrix& input, const Vector& y,
                            const PipelineParams& params) {
  switch (method) {
    case Method::TwoStep: return two_step(input, y, params);
    case Method::FourStep: return four_step(input, y, params);
    case Method::AugmentedFourStep: return augmented_four_step(input, y, params);
  }
  throw InvalidArgument("run_pipeline: unknown method");
}

MaskedMatrix restrict_columns(const MaskedMatrix& input, const IndexSet& support) {
  if (support.empty()) throw InvalidArgument("restrict_columns: empty support");
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= input.cols()) {
      throw InvalidArgument("restrict_columns: index out of range");
    }
    if (j > 0 && support[j] <= support[j - 1]) {
      throw InvalidArgument("restrict_columns: support must be strictly ascending");
    }
  }
  const auto k = static_cast<Index>(support.size());
  DenseMatrix values(input.rows(), k);
  Mask observed(input.rows(), k);
  for (Index j = 0; j < k; ++j) {
    values.col(j) = input.values().col(support[static_cast<std::size_t>(j)]);
    observed.col(j) = input.observed().col(support[static_cast<std::size_t>(j)]);
  }
  return MaskedMatrix(std::move(values), std::move(observed));
}

SparseVector embed_support(const SparseVector& beta_s, const IndexSet& support, Index n) {
  if (beta_s.size() != static_cast<Index>(support.size())) {
    throw InvalidArgument("embed_support: beta length must equal support size");
  }
  SparseVector out{Vector::Zero(n), beta_s.zero_tol};
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= n) {
      throw InvalidArgument("embed_support: index out of range");
    }
    out.entries(support[j]) = beta_s.entries(static_cast<Index>(j));
  }
  return out;
}

}  // namespace lrsparse
