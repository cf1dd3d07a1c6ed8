#include <gtest/gtest.h>

#include <cmath>

#include "lrsparse/linalg.hpp"
#include "lrsparse/sparse.hpp"
#include "lrsparse/synth.hpp"
#include "test_util.hpp"

namespace lrsparse {
namespace {

using testing::gaussian_matrix;
using testing::gaussian_vector;
using testing::rng_for;
using testing::uniform_index;
using testing::uniform_real;
using testing::lasso_oracle;
using testing::orthonormal_columns;

TEST(Support, Examples) {
  Vector b(4);
  b << 0, 3, 0, -1;
  EXPECT_EQ(support({b, 1e-8}), (IndexSet{1, 3}));
  EXPECT_TRUE(support({Vector::Zero(5), 1e-8}).empty());
  Vector c(2);
  c << 1e-12, 5;
  EXPECT_EQ(support({c, 1e-8}), (IndexSet{1}));
}

TEST(Lasso, IdentityDesignSoftThresholdsAtHalfLambda) {
  Vector y(2);
  y << 3, 0.5;
  const SparseFit fit = lasso(DenseMatrix::Identity(2, 2), y, {2.0});
  EXPECT_NEAR(fit.beta.entries(0), 2.0, 1e-12);
  EXPECT_EQ(fit.beta.entries(1), 0.0);
  EXPECT_TRUE(fit.converged);
}

TEST(Lasso, AboveCriticalLambdaIsZero) {
  auto rng = rng_for(60);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix x = gaussian_matrix(uniform_index(2, 30, rng), uniform_index(1, 12, rng), rng);
    const Vector y = gaussian_vector(x.rows(), rng);
    const double lmax = lasso_lambda_max(x, y);
    EXPECT_NEAR(lmax, 2.0 * (x.transpose() * y).cwiseAbs().maxCoeff(), 1e-12 * (1 + lmax));
    EXPECT_TRUE(lasso(x, y, {lmax * uniform_real(1.0, 3.0, rng)}).beta.entries.isZero(0.0));
  }
}

TEST(Lasso, DimensionMismatch) {
  EXPECT_THROW(lasso(DenseMatrix::Ones(3, 2), Vector::Ones(2), {1.0}), InvalidInput);
  EXPECT_THROW(imatcs(DenseMatrix::Ones(3, 2), Vector::Ones(2), {}), InvalidInput);
}

TEST(Lasso, ZeroColumnGetsZeroCoefficient) {
  DenseMatrix x(3, 2);
  x << 1, 0, 2, 0, 3, 0;
  Vector y(3);
  y << 1, 2, 3;
  const SparseFit fit = lasso(x, y, {0.0});
  EXPECT_NEAR(fit.beta.entries(0), 1.0, 1e-10);
  EXPECT_EQ(fit.beta.entries(1), 0.0);
}

TEST(Lasso, MatchesProximalGradientOracle) {
  auto rng = rng_for(61);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix x = gaussian_matrix(20, 8, rng);
    const Vector y = gaussian_vector(20, rng);
    const Vector ref = lasso_oracle(x, y, 1.0);
    const double got = lasso_objective(x, y, lasso(x, y, {1.0}).beta.entries, 1.0);
    EXPECT_LE(std::abs(got - lasso_objective(x, y, ref, 1.0)), 1e-6);
  }
}

TEST(LassoProperty, KktConditions) {
  auto rng = rng_for(62);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix x = gaussian_matrix(uniform_index(5, 40, rng), uniform_index(1, 25, rng), rng);
    const Vector y = gaussian_vector(x.rows(), rng);
    const double lambda = uniform_real(0.0, 1.0, rng) * lasso_lambda_max(x, y);
    const SparseFit fit = lasso(x, y, {lambda});
    const Vector& b = fit.beta.entries;
    const Vector grad = 2.0 * x.transpose() * (x * b - y);
    const double scale = 1.0 + lambda + 2.0 * x.norm() * y.norm();
    for (Index j = 0; j < b.size(); ++j) {
      if (b(j) != 0.0) {
        EXPECT_LE(std::abs(grad(j) + lambda * (b(j) > 0 ? 1.0 : -1.0)), 1e-4 * scale);
      } else {
        EXPECT_LE(std::abs(grad(j)), lambda + 1e-4 * scale);
      }
    }
  }
}

TEST(LassoProperty, ObjectiveBeatsZeroAndLeastSquares) {
  auto rng = rng_for(63);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix x = gaussian_matrix(uniform_index(2, 40, rng), uniform_index(1, 25, rng), rng);
    const Vector y = gaussian_vector(x.rows(), rng);
    const double lambda = uniform_real(0.0, 1.5, rng) * lasso_lambda_max(x, y);
    const double obj = lasso_objective(x, y, lasso(x, y, {lambda}).beta.entries, lambda);
    const double slack = 1e-9 * (1 + y.squaredNorm());
    EXPECT_LE(obj, lasso_objective(x, y, Vector::Zero(x.cols()), lambda) + slack);
    EXPECT_LE(obj, lasso_objective(x, y, least_squares(x, y), lambda) + slack);
  }
}

TEST(LassoProperty, ZeroLambdaReproducesLeastSquares) {
  auto rng = rng_for(64);
  for (int trial = 0; trial < 100; ++trial) {
    const Index cols = uniform_index(1, 10, rng);
    const DenseMatrix x = gaussian_matrix(cols + uniform_index(5, 30, rng), cols, rng);
    const Vector y = gaussian_vector(x.rows(), rng);
    const Vector ls = least_squares(x, y);
    EXPECT_LE((lasso(x, y, {0.0}).beta.entries - ls).cwiseAbs().maxCoeff(), 1e-6 * (1 + ls.norm()));
  }
}

TEST(Lasso, ConfigValidation) {
  EXPECT_THROW(lasso(DenseMatrix::Ones(2, 2), Vector::Ones(2), {-1.0}), InvalidArgument);
  LassoConfig c{1.0};
  c.max_sweeps = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Imatcs, ZeroLabelsGiveZero) {
  auto rng = rng_for(65);
  const SparseFit fit = imatcs(gaussian_matrix(10, 6, rng), Vector::Zero(10), {});
  EXPECT_TRUE(fit.beta.entries.isZero(0.0));
}

TEST(Imatcs, IdentityDesignFollowsThresholdRecursion) {
  auto rng = rng_for(66);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = uniform_index(1, 20, rng);
    const Vector y = gaussian_vector(n, rng);
    ImatConfig cfg;
    cfg.step = 1.0;
    cfg.tau0 = uniform_real(0.5, 3.0, rng);
    cfg.decay = uniform_real(0.3, 0.95, rng);
    cfg.max_iters = static_cast<int>(uniform_index(1, 30, rng));
    cfg.rel_tol = 1e-300;

    // β ← H(β + (y − β), τ_i) for i = 0 … k−1.
    Vector want = Vector::Zero(n);
    for (int i = 0; i < cfg.max_iters; ++i) {
      const double tau = cfg.tau0 * std::pow(cfg.decay, i);
      const Vector proposal = want + (y - want);
      for (Index j = 0; j < n; ++j) want(j) = std::abs(proposal(j)) > tau ? proposal(j) : 0.0;
    }
    const SparseFit fit = imatcs(DenseMatrix::Identity(n, n), y, cfg);
    EXPECT_EQ(fit.iterations, cfg.max_iters);
    EXPECT_LE((fit.beta.entries - want).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Imatcs, RecoversSparseSignalOnOrthonormalDesign) {
  auto rng = rng_for(67);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = uniform_index(20, 60, rng);
    const Index n = uniform_index(4, m, rng);
    const Index s = uniform_index(1, std::min(n, m / 4), rng);
    const DenseMatrix x = orthonormal_columns(m, n, rng);
    const SparseVector beta = gen_sparse_beta(n, s, 1000 + trial);
    const SparseFit fit = imatcs(x, x * beta.entries, {});
    EXPECT_LE((fit.beta.entries - beta.entries).norm(), 1e-4);
    EXPECT_EQ(support(fit.beta), support(beta));
  }
}

TEST(ImatcsProperty, ThresholdsDecreaseAndSupportGrowsBelowSignal) {
  auto rng = rng_for(68);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = uniform_index(12, 50, rng);
    const Index n = uniform_index(3, m, rng);
    const Index s = uniform_index(1, std::max<Index>(1, std::min(n, m / 4)), rng);
    const DenseMatrix x = orthonormal_columns(m, n, rng);
    const SparseVector beta = gen_sparse_beta(n, s, 2000 + trial);
    const SparseFit fit = imatcs(x, x * beta.entries, {});
    ASSERT_EQ(fit.thresholds.size(), fit.support_sizes.size());
    const double smallest = beta.entries.cwiseAbs().redux([](double a, double b) {
      if (a == 0.0) return b;
      if (b == 0.0) return a;
      return std::min(a, b);
    });
    for (std::size_t k = 1; k < fit.thresholds.size(); ++k) {
      EXPECT_LT(fit.thresholds[k], fit.thresholds[k - 1]);
      if (fit.thresholds[k - 1] < smallest) {
        EXPECT_GE(fit.support_sizes[k], fit.support_sizes[k - 1]);
      }
    }
  }
}

TEST(Imatcs, ThresholdSchedule) {
  EXPECT_DOUBLE_EQ(imat_threshold(2.0, 0.5, 0.0, 0), 2.0);
  EXPECT_DOUBLE_EQ(imat_threshold(2.0, 0.5, 0.0, 3), 0.25);
  EXPECT_DOUBLE_EQ(imat_threshold(2.0, 0.5, 0.3, 3), 0.3);
}

TEST(Imatcs, WarnsOnLargeStep) {
  auto rng = rng_for(69);
  const DenseMatrix x = gaussian_matrix(10, 5, rng);
  const double norm = operator_norm(x);
  ImatConfig cfg;
  cfg.step = 2.5 / (norm * norm);
  cfg.max_iters = 5;
  EXPECT_TRUE(imatcs(x, gaussian_vector(10, rng), cfg).warning.has_value());
  cfg.step = 0.5 / (norm * norm);
  EXPECT_FALSE(imatcs(x, gaussian_vector(10, rng), cfg).warning.has_value());
}

TEST(Imatcs, LambdaAboveCriticalGivesZero) {
  auto rng = rng_for(70);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix x = gaussian_matrix(uniform_index(2, 30, rng), uniform_index(1, 12, rng), rng);
    const Vector y = gaussian_vector(x.rows(), rng);
    ImatConfig cfg;
    cfg.lambda = lasso_lambda_max(x, y) * uniform_real(1.0, 2.0, rng);
    EXPECT_TRUE(imatcs(x, y, cfg).beta.entries.isZero(0.0));
  }
}

TEST(Imatcs, ConfigValidation) {
  ImatConfig c;
  c.decay = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = ImatConfig{};
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

}  // namespace
}  // namespace lrsparse
