#include "lrsparse/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "lrsparse/kernels.hpp"
#include "lrsparse/linalg.hpp"

namespace lrsparse {

namespace {

// Slack for inequalities that hold exactly in real arithmetic.
constexpr double kRoundoffRel = 1e-10;

bool leq(double lhs, double rhs) {
  return lhs <= rhs + kRoundoffRel * std::max(1.0, std::abs(rhs));
}

double log_factor(const BoundInputs& in) {
  if (in.n < 2) throw InvalidArgument("phi: need n >= 2 so that log n > 0");
  if (in.m < 1) throw InvalidArgument("phi: need m >= 1");
  return std::sqrt(std::log(static_cast<double>(in.n)) / static_cast<double>(in.m));
}

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

double sigma_d(const DenseMatrix& x_k, const DenseMatrix& x_inf) {
  check_same_shape(x_k, x_inf, "sigma_d");
  return operator_norm(x_k - x_inf);
}

double phi_y(const BoundInputs& in) {
  return in.y_norm * in.sigma_d / log_factor(in);
}

double phi_gamma(const BoundInputs& in) {
  return 3.0 * in.sigma_d * (2.0 * in.sigma_inf + in.sigma_d) * in.b0 / log_factor(in);
}

double phi_combined(const BoundInputs& in) {
  return std::max(phi_y(in), phi_gamma(in));
}

Deviation deviation_lhs(const DenseMatrix& x_k, const DenseMatrix& x_inf, const Vector& y,
                        const SparseVector& beta) {
  check_same_shape(x_k, x_inf, "deviation_lhs");
  if (x_k.rows() != y.size()) throw InvalidInput("deviation_lhs: y length mismatch");
  if (x_k.cols() != beta.size()) throw InvalidInput("deviation_lhs: beta length mismatch");

  Deviation d;
  const DenseMatrix diff = x_k - x_inf;
  d.dev_y = kernels::mat_t_vec(diff, y).lpNorm<Eigen::Infinity>();
  const Vector limit_fit = kernels::mat_t_vec(x_inf, kernels::mat_vec(x_inf, beta.entries));
  d.dev_y_literal = (kernels::mat_t_vec(x_k, y) - limit_fit).lpNorm<Eigen::Infinity>();
  const Vector current_fit = kernels::mat_t_vec(x_k, kernels::mat_vec(x_k, beta.entries));
  d.dev_gamma = (current_fit - limit_fit).lpNorm<Eigen::Infinity>();
  return d;
}

ReReport check_lower_re(const DenseMatrix& gamma_hat, double alpha1, double tau, int probes,
                        std::uint64_t seed) {
  if (gamma_hat.rows() != gamma_hat.cols() || gamma_hat.rows() == 0) {
    throw InvalidInput("check_lower_re: gamma_hat must be square and non-empty");
  }
  if (!(alpha1 >= 0.0) || !(tau >= 0.0)) {
    throw InvalidArgument("check_lower_re: alpha1 and tau must be non-negative");
  }
  if (probes < 0) throw InvalidArgument("check_lower_re: probes must be >= 0");

  const Index n = gamma_hat.rows();
  const DenseMatrix gamma = 0.5 * (gamma_hat + gamma_hat.transpose());
  const double tol = kRoundoffRel * (1.0 + gamma.norm() + alpha1 + tau * static_cast<double>(n));

  ReReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  auto evaluate = [&](Vector theta) {
    const double norm = theta.norm();
    if (norm == 0.0) return;
    theta /= norm;
    const double l1 = theta.lpNorm<1>();
    const double margin = theta.dot(gamma * theta) - (alpha1 - tau * l1 * l1);
    report.worst_margin = std::min(report.worst_margin, margin);
    ++report.probes_evaluated;
    if (margin < -tol) ++report.violations;
  };

  for (Index i = 0; i < n; ++i) evaluate(Vector::Unit(n, i));

  auto rng = make_stream(seed, "re_probe");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Index> coord(0, n - 1);
  std::uniform_int_distribution<Index> sparsity(1, std::max<Index>(1, std::min<Index>(n, 10)));
  std::bernoulli_distribution coin(0.5);
  for (int p = 0; p < probes; ++p) {
    Vector theta = Vector::Zero(n);
    switch (p % 3) {
      case 0:
        for (Index i = 0; i < n; ++i) theta(i) = normal(rng);
        break;
      case 1: {
        const Index k = sparsity(rng);
        for (Index j = 0; j < k; ++j) theta(coord(rng)) = normal(rng);
        break;
      }
      default:
        for (Index i = 0; i < n; ++i) theta(i) = coin(rng) ? 1.0 : -1.0;
        break;
    }
    evaluate(std::move(theta));
  }
  report.holds = report.violations == 0;
  return report;
}

ErrorBounds error_bounds(const BoundInputs& in) {
  if (!(in.alpha1 > 0.0)) throw InvalidArgument("error_bounds: alpha1 must be positive");
  if (in.s < 0) throw InvalidArgument("error_bounds: s must be non-negative");
  const double deviation = phi_combined(in) * log_factor(in);
  const double sqrt_s = std::sqrt(static_cast<double>(in.s));

  ErrorBounds b;
  b.driving_term = std::max(deviation, in.lambda_k);
  b.l2_bound = in.c0 * sqrt_s / in.alpha1 * b.driving_term;
  b.l1_bound = 8.0 * in.c0 * static_cast<double>(in.s) / in.alpha1 * b.driving_term;
  const double side_rhs = in.s > 0 ? std::min(in.alpha1 / (128.0 * sqrt_s), deviation) : deviation;
  b.side_condition_holds = sqrt_s * in.tau <= side_rhs;
  return b;
}

AuditReport run_bound_audit(const Instance& instance, const std::vector<DenseMatrix>& si_trace,
                            const AuditParams& params) {
  if (si_trace.empty()) throw InvalidArgument("run_bound_audit: empty Soft-Impute trace");
  const Index m = instance.x_true.rows();
  const Index n = instance.x_true.cols();
  for (const auto& x : si_trace) {
    if (x.rows() != m || x.cols() != n) {
      throw InvalidInput("run_bound_audit: trace matrices must match the instance shape");
    }
  }
  if (n < 2) throw InvalidArgument("run_bound_audit: need n >= 2");

  const DenseMatrix& x_inf = si_trace.back();
  const Vector& y = instance.y;
  const SparseVector& beta = instance.beta_true;
  const double beta_norm = beta.entries.norm();

  AuditReport report;
  report.m = m;
  report.n = n;
  report.s = static_cast<Index>(support(beta).size());
  report.sigma_inf = operator_norm(x_inf);
  report.y_norm = y.norm();
  report.b0 = params.b0_factor * beta_norm;
  report.lambda_k = params.lambda_k >= 0.0 ? params.lambda_k
                                           : 0.1 * lasso_lambda_max(x_inf, y);
  report.c0 = params.c0;
  report.alpha1 = params.alpha1;
  report.tau = params.tau;

  BoundInputs in;
  in.sigma_inf = report.sigma_inf;
  in.y_norm = report.y_norm;
  in.b0 = report.b0;
  in.s = report.s;
  in.m = m;
  in.n = n;
  in.alpha1 = params.alpha1;
  in.tau = params.tau;
  in.lambda_k = report.lambda_k;
  in.c0 = params.c0;
  const double constraint_radius = report.b0 * std::sqrt(static_cast<double>(report.s));

  LassoConfig lasso_cfg;
  lasso_cfg.lambda = report.lambda_k;

  double previous_sigma = std::numeric_limits<double>::infinity();
  const double sigma_scale = 1.0;
  for (std::size_t k = 0; k < si_trace.size(); ++k) {
    const DenseMatrix& x_k = si_trace[k];
    AuditStep step;
    step.k = static_cast<int>(k) + 1;
    step.sigma_d = sigma_d(x_k, x_inf);
    in.sigma_d = step.sigma_d;
    step.deviation = deviation_lhs(x_k, x_inf, y, beta);
    step.phi_y = phi_y(in);
    step.phi_gamma = phi_gamma(in);
    step.phi_combined = std::max(step.phi_y, step.phi_gamma);
    step.deviation_bound = step.phi_combined * log_factor(in);

    step.deviation_chain_holds = leq(step.deviation.dev_y, step.sigma_d * report.y_norm);
    step.gram_deviation_holds = leq(step.deviation.dev_gamma,
                          3.0 * step.sigma_d * (2.0 * report.sigma_inf + step.sigma_d) * beta_norm);
    step.dev_y_within_bound = leq(step.deviation.dev_y, step.deviation_bound);
    step.dev_gamma_within_bound = leq(step.deviation.dev_gamma, step.deviation_bound);

    if (params.alpha1 > 0.0) step.bounds = error_bounds(in);
    const Vector beta_k = lasso(x_k, y, lasso_cfg).beta.entries;
    step.l2_error = (beta_k - beta.entries).norm();
    step.l1_error = (beta_k - beta.entries).lpNorm<1>();
    if (params.alpha1 > 0.0) {
      step.l2_within_bound = step.l2_error <= step.bounds.l2_bound;
      step.l1_within_bound = step.l1_error <= step.bounds.l1_bound;
    }
    step.beta_in_constraint_set = beta_k.lpNorm<1>() <= constraint_radius;

    if (k > 0 && step.sigma_d > previous_sigma + kRoundoffRel * std::max(sigma_scale, previous_sigma)) {
      ++report.sigma_d_increases;
    }
    previous_sigma = step.sigma_d;
    report.deviation_chain_violations += step.deviation_chain_holds ? 0 : 1;
    report.gram_deviation_violations += step.gram_deviation_holds ? 0 : 1;
    report.dev_y_bound_violations += step.dev_y_within_bound ? 0 : 1;
    report.dev_gamma_bound_violations += step.dev_gamma_within_bound ? 0 : 1;
    report.l2_bound_violations += step.l2_within_bound ? 0 : 1;
    report.l1_bound_violations += step.l1_within_bound ? 0 : 1;
    report.steps.push_back(step);
  }
  report.sigma_d_non_increasing = report.sigma_d_increases == 0;
  report.re_at_limit = check_lower_re(kernels::gram(x_inf), params.alpha1, params.tau,
                                      params.re_probes, params.seed);
  return report;
}

nlohmann::json to_json(const AuditReport& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({
        {"k", s.k},
        {"sigma_d", s.sigma_d},
        {"dev_y", s.deviation.dev_y},
        {"dev_y_literal", s.deviation.dev_y_literal},
        {"dev_gamma", s.deviation.dev_gamma},
        {"phi_y", s.phi_y},
        {"phi_gamma", s.phi_gamma},
        {"phi_combined", s.phi_combined},
        {"deviation_bound", s.deviation_bound},
        {"deviation_chain_holds", s.deviation_chain_holds},
        {"gram_deviation_holds", s.gram_deviation_holds},
        {"dev_y_within_bound", s.dev_y_within_bound},
        {"dev_gamma_within_bound", s.dev_gamma_within_bound},
        {"l2_bound", s.bounds.l2_bound},
        {"l1_bound", s.bounds.l1_bound},
        {"side_condition_holds", s.bounds.side_condition_holds},
        {"l2_error", s.l2_error},
        {"l1_error", s.l1_error},
        {"l2_within_bound", s.l2_within_bound},
        {"l1_within_bound", s.l1_within_bound},
        {"beta_in_constraint_set", s.beta_in_constraint_set},
    });
  }
  return {
      {"m", r.m},
      {"n", r.n},
      {"s", r.s},
      {"sigma_inf", r.sigma_inf},
      {"y_norm", r.y_norm},
      {"b0", r.b0},
      {"lambda_k", r.lambda_k},
      {"c0", r.c0},
      {"alpha1", r.alpha1},
      {"tau", r.tau},
      {"sigma_d_non_increasing", r.sigma_d_non_increasing},
      {"sigma_d_increases", r.sigma_d_increases},
      {"deviation_chain_violations", r.deviation_chain_violations},
      {"gram_deviation_violations", r.gram_deviation_violations},
      {"dev_y_bound_violations", r.dev_y_bound_violations},
      {"dev_gamma_bound_violations", r.dev_gamma_bound_violations},
      {"l2_bound_violations", r.l2_bound_violations},
      {"l1_bound_violations", r.l1_bound_violations},
      {"re_at_limit",
       {{"holds", r.re_at_limit.holds},
        {"worst_margin", r.re_at_limit.worst_margin},
        {"probes_evaluated", r.re_at_limit.probes_evaluated},
        {"violations", r.re_at_limit.violations}}},
      {"steps", steps},
  };
}

}  // namespace lrsparse
