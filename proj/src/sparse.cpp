#include "lrsparse/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "lrsparse/kernels.hpp"
#include "lrsparse/linalg.hpp"

namespace lrsparse {

namespace {

void check_dims(const DenseMatrix& x, const Vector& y, const char* what) {
  if (x.rows() != y.size()) {
    throw InvalidInput(std::string(what) + ": X rows must equal length of y");
  }
  if (x.cols() == 0) throw InvalidInput(std::string(what) + ": X has no columns");
  require_finite(x, what);
  require_finite(y, what);
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

IndexSet support(const SparseVector& beta) {
  IndexSet s;
  for (Index i = 0; i < beta.entries.size(); ++i) {
    if (std::abs(beta.entries(i)) > beta.zero_tol) s.push_back(i);
  }
  return s;
}

void LassoConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("lasso: lambda must be a finite non-negative number");
  }
  if (max_sweeps < 1) throw InvalidArgument("lasso: max_sweeps must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("lasso: rel_tol must be positive");
}

void ImatConfig::validate() const {
  if (!(decay > 0.0 && decay < 1.0)) throw InvalidArgument("imatcs: decay must lie in (0,1)");
  if (!(tau_min >= 0.0)) throw InvalidArgument("imatcs: tau_min must be non-negative");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("imatcs: lambda must be a finite non-negative number");
  }
  if (max_iters < 1) throw InvalidArgument("imatcs: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("imatcs: rel_tol must be positive");
  if (!std::isfinite(step) || !std::isfinite(tau0)) {
    throw InvalidArgument("imatcs: step and tau0 must be finite");
  }
}

double imat_threshold(double tau0, double decay, double tau_min, int k) {
  return std::max(tau0 * std::pow(decay, k), tau_min);
}

double lasso_objective(const DenseMatrix& x, const Vector& y, const Vector& beta,
                       double lambda) {
  return (x * beta - y).squaredNorm() + lambda * beta.lpNorm<1>();
}

double lasso_lambda_max(const DenseMatrix& x, const Vector& y) {
  check_dims(x, y, "lasso_lambda_max");
  return 2.0 * kernels::mat_t_vec(x, y).lpNorm<Eigen::Infinity>();
}

SparseFit lasso(const DenseMatrix& x, const Vector& y, const LassoConfig& cfg) {
  check_dims(x, y, "lasso");
  cfg.validate();

  const Index n = x.cols();
  const DenseMatrix g = kernels::gram(x);
  const Vector c = kernels::mat_t_vec(x, y);
  // grad holds Xᵀ(y − Xβ); coordinate j minimizes
  // d_j·b² − 2b·(grad_j + d_j·β_j) + λ|b|  =>  b = S(z_j, λ/2) / d_j.
  Vector grad = c;
  Vector beta = Vector::Zero(n);
  const double half_lambda = cfg.lambda / 2.0;

  SparseFit fit;
  auto sweep = [&]() {
    double max_move = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double d = g(j, j);
      if (d <= 0.0) continue;  // all-zero column stays at 0
      const double z = grad(j) + d * beta(j);
      const double updated = soft_threshold(z, half_lambda) / d;
      const double move = updated - beta(j);
      if (move != 0.0) {
        grad.noalias() -= g.col(j) * move;
        beta(j) = updated;
        max_move = std::max(max_move, std::abs(move));
      }
    }
    return max_move;
  };

  bool refreshed = false;
  for (int s = 0; s < cfg.max_sweeps; ++s) {
    const double move = sweep();
    fit.iterations = s + 1;
    const double scale = beta.lpNorm<Eigen::Infinity>();
    if (move <= cfg.rel_tol * scale) {
      if (refreshed) {
        fit.converged = true;
        break;
      }
      // Drop accumulated update error and confirm with one more sweep.
      grad = c - g * beta;
      refreshed = true;
    } else {
      refreshed = false;
    }
  }

  fit.beta.entries = std::move(beta);
  return fit;
}

SparseFit imatcs(const DenseMatrix& x, const Vector& y, const ImatConfig& cfg) {
  check_dims(x, y, "imatcs");
  cfg.validate();

  SparseFit fit;
  const Index n = x.cols();
  // Work in covariance form: Xᵀ(y − Xβ) = c − Gβ, and Gβ only touches the
  // active columns.
  const DenseMatrix g = kernels::gram(x);
  const Vector c = kernels::mat_t_vec(x, y);
  const double norm_sq = largest_eigenvalue(g);
  double step = cfg.step;
  if (step <= 0.0) step = norm_sq > 0.0 ? 1.0 / norm_sq : 1.0;
  if (step * norm_sq >= 2.0) {
    fit.warning = "imatcs: step * ||X||^2 >= 2, iteration may diverge";
  }
  double tau0 = cfg.tau0;
  if (tau0 <= 0.0) tau0 = step * c.lpNorm<Eigen::Infinity>();
  const double floor = std::max(cfg.tau_min, step * cfg.lambda / 2.0);

  Vector beta = Vector::Zero(n);
  double change = 0.0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    const double tau = imat_threshold(tau0, cfg.decay, floor, k);
    Vector fitted = Vector::Zero(n);
    for (Index j = 0; j < n; ++j) {
      if (beta(j) != 0.0) fitted.noalias() += g.col(j) * beta(j);
    }
    const Vector proposal = beta + step * (c - fitted);

    Vector next = Vector::Zero(n);
    Index active = 0;
    for (Index i = 0; i < n; ++i) {
      if (std::abs(proposal(i)) > tau) {
        next(i) = proposal(i);
        ++active;
      }
    }
    if (!next.allFinite()) {
      fit.warning = "imatcs: iterate became non-finite; returning the last finite one";
      break;
    }
    const double next_norm = next.norm();
    change = (next - beta).norm() / std::max(next_norm, 1e-300);
    if (next_norm == 0.0 && beta.isZero(0.0)) change = 0.0;

    beta = std::move(next);
    fit.iterations = k + 1;
    fit.support_sizes.push_back(active);
    fit.thresholds.push_back(tau);
    // A stationary iterate only counts once the threshold stopped moving.
    if (change <= cfg.rel_tol && tau <= floor) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged && fit.iterations == cfg.max_iters && change <= cfg.rel_tol) {
    fit.converged = true;
  }
  fit.beta.entries = std::move(beta);
  return fit;
}

}  // namespace lrsparse
