#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lrsparse/completion.hpp"
#include "lrsparse/linalg.hpp"
#include "test_util.hpp"

namespace lrsparse {
namespace {

using testing::bernoulli_mask;
using testing::gaussian_matrix;
using testing::max_abs;
using testing::rng_for;
using testing::uniform_index;
using testing::uniform_real;

DenseMatrix low_rank(Index rows, Index cols, Index rank, std::mt19937_64& rng) {
  return gaussian_matrix(rows, rank, rng) * gaussian_matrix(rank, cols, rng);
}

TEST(MaskedMatrix, ShapeMismatchRejected) {
  EXPECT_THROW(MaskedMatrix(DenseMatrix::Ones(2, 3), Mask::Constant(3, 2, true)), InvalidInput);
}

TEST(MaskedMatrix, NonFiniteObservedRejected) {
  DenseMatrix v = DenseMatrix::Ones(2, 2);
  v(0, 1) = std::numeric_limits<double>::quiet_NaN();
  Mask obs = Mask::Constant(2, 2, true);
  EXPECT_THROW(MaskedMatrix(v, obs), InvalidInput);
  obs(0, 1) = false;
  const MaskedMatrix ok(v, obs);
  EXPECT_EQ(ok.values()(0, 1), 0.0);
  EXPECT_EQ(ok.observed_count(), 3);
}

TEST(MaskedMatrix, SelectRowsKeepsMask) {
  auto rng = rng_for(40);
  const DenseMatrix v = gaussian_matrix(6, 4, rng);
  const Mask obs = bernoulli_mask(6, 4, 0.5, rng);
  const MaskedMatrix mm(v, obs);
  const MaskedMatrix sub = mm.select_rows({1, 4});
  ASSERT_EQ(sub.rows(), 2);
  for (Index j = 0; j < 4; ++j) {
    EXPECT_EQ(sub.observed()(0, j), obs(1, j));
    EXPECT_EQ(sub.observed()(1, j), obs(4, j));
    EXPECT_EQ(sub.values()(1, j), obs(4, j) ? v(4, j) : 0.0);
  }
  EXPECT_THROW(mm.select_rows({7}), InvalidArgument);
}

TEST(CompletionConfig, Validation) {
  EXPECT_THROW(CompletionConfig::accurate(-1.0).validate(), InvalidArgument);
  CompletionConfig c = CompletionConfig::quick(1.0);
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = CompletionConfig::quick(1.0);
  c.rel_tol = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(SoftImpute, FullyObservedZeroLambdaReturnsInputInOneIteration) {
  auto rng = rng_for(41);
  const DenseMatrix m = gaussian_matrix(9, 6, rng);
  const CompletionResult r = soft_impute(MaskedMatrix::fully_observed(m), CompletionConfig::accurate(0.0));
  EXPECT_EQ(r.iterations_used, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(max_abs(r.completed - m), 0.0);
}

TEST(SoftImpute, EmptyMaskIsDegenerate) {
  const MaskedMatrix none(DenseMatrix::Ones(3, 3), Mask::Constant(3, 3, false));
  EXPECT_THROW(soft_impute(none, CompletionConfig::accurate(1.0)), DegenerateInput);
}

TEST(SoftImpute, NegativeLambdaRejected) {
  const MaskedMatrix m = MaskedMatrix::fully_observed(DenseMatrix::Ones(3, 3));
  EXPECT_THROW(soft_impute(m, CompletionConfig::accurate(-0.5)), InvalidArgument);
}

TEST(SoftImpute, FullyObservedEqualsSvtAtHalfLambda) {
  auto rng = rng_for(42);
  for (int trial = 0; trial < 50; ++trial) {
    const DenseMatrix m = gaussian_matrix(uniform_index(2, 70, rng), uniform_index(2, 70, rng), rng);
    const double lambda = uniform_real(0.0, 2.0, rng) * testing::singular_values_oracle(m)(0);
    const CompletionResult r = soft_impute(MaskedMatrix::fully_observed(m), CompletionConfig::accurate(lambda));
    EXPECT_LE(max_abs(r.completed - testing::svt_oracle(m, lambda / 2)), 1e-6);
  }
}

TEST(SoftImpute, RecoversRankOneWithHiddenEntries) {
  auto rng = rng_for(43);
  const DenseMatrix truth = low_rank(60, 40, 1, rng);
  const MaskedMatrix input(truth, bernoulli_mask(60, 40, 0.7, rng));
  // λ/2 a few percent of σ₁: bias stays small while spurious directions are cut.
  const double s1 = testing::singular_values_oracle(truth)(0);
  CompletionConfig cfg = CompletionConfig::accurate(0.04 * s1);
  cfg.max_iters = 5000;
  cfg.rel_tol = 1e-9;
  const CompletionResult r = soft_impute(input, cfg);
  EXPECT_LE((r.completed - truth).norm() / truth.norm(), 0.05);
}

TEST(SoftImpute, WarmStartShapeChecked) {
  const MaskedMatrix m = MaskedMatrix::fully_observed(DenseMatrix::Ones(3, 3));
  EXPECT_THROW(soft_impute(m, CompletionConfig::accurate(0.1), DenseMatrix::Zero(2, 3)), InvalidInput);
}

TEST(SoftImpute, KeepsIterates) {
  auto rng = rng_for(44);
  const MaskedMatrix input(low_rank(20, 15, 2, rng), bernoulli_mask(20, 15, 0.6, rng));
  CompletionConfig cfg = CompletionConfig::accurate(0.5);
  cfg.keep_iterates = true;
  cfg.max_iters = 30;
  const CompletionResult r = soft_impute(input, cfg);
  ASSERT_EQ(static_cast<int>(r.iterates.size()), r.iterations_used);
  EXPECT_EQ(max_abs(r.iterates.back() - r.completed), 0.0);
}

TEST(QuickComplete, FullyObservedZeroLambda) {
  auto rng = rng_for(45);
  const DenseMatrix m = gaussian_matrix(5, 8, rng);
  EXPECT_EQ(max_abs(quick_complete(MaskedMatrix::fully_observed(m), 0.0).completed - m), 0.0);
}

TEST(QuickComplete, AtMostFiveIterationsAndDescends) {
  auto rng = rng_for(46);
  for (int trial = 0; trial < 20; ++trial) {
    const MaskedMatrix input(low_rank(200, 100, 5, rng), bernoulli_mask(200, 100, 0.5, rng));
    const double lambda = uniform_real(0.01, 5.0, rng);
    const CompletionResult r = quick_complete(input, lambda);
    EXPECT_LE(r.iterations_used, CompletionConfig::kQuickIters);
    EXPECT_LE(r.objective_trace.size(), 5u);
    EXPECT_LE(r.objective_trace.back(), eval_objective(DenseMatrix::Zero(200, 100), input, lambda));
    EXPECT_LE(r.objective_trace.back(), r.objective_trace.front() * (1 + 1e-12));
  }
}

TEST(EvalObjective, FullyObservedAtInput) {
  auto rng = rng_for(47);
  const DenseMatrix m = gaussian_matrix(6, 4, rng);
  EXPECT_NEAR(eval_objective(m, MaskedMatrix::fully_observed(m), 0.7), 0.7 * nuclear_norm(m), 1e-12);
}

TEST(EvalObjective, ZeroMatrixGivesObservedEnergy) {
  auto rng = rng_for(48);
  const DenseMatrix v = gaussian_matrix(6, 4, rng);
  const Mask obs = bernoulli_mask(6, 4, 0.5, rng);
  double want = 0.0;
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 4; ++j) want += obs(i, j) ? v(i, j) * v(i, j) : 0.0;
  }
  EXPECT_NEAR(eval_objective(DenseMatrix::Zero(6, 4), MaskedMatrix(v, obs), 3.0), want, 1e-12);
}

TEST(EvalObjective, MatchesBruteForce) {
  auto rng = rng_for(49);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = uniform_index(1, 15, rng);
    const Index cols = uniform_index(1, 15, rng);
    const DenseMatrix x = gaussian_matrix(rows, cols, rng);
    const DenseMatrix v = gaussian_matrix(rows, cols, rng);
    const Mask obs = bernoulli_mask(rows, cols, 0.5, rng);
    const double lambda = uniform_real(0.0, 2.0, rng);
    double fit = 0.0;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (obs(i, j)) fit += (x(i, j) - v(i, j)) * (x(i, j) - v(i, j));
      }
    }
    const double want = fit + lambda * testing::singular_values_oracle(x).sum();
    EXPECT_NEAR(eval_objective(x, MaskedMatrix(v, obs), lambda), want, 1e-10 * (1 + want));
  }
}

TEST(EvalObjective, ShapeMismatch) {
  const MaskedMatrix m = MaskedMatrix::fully_observed(DenseMatrix::Ones(3, 3));
  EXPECT_THROW(eval_objective(DenseMatrix::Ones(2, 3), m, 1.0), InvalidInput);
}

TEST(SoftImputeProperty, ObjectiveNonIncreasing) {
  auto rng = rng_for(50);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = uniform_index(3, 60, rng);
    const Index cols = uniform_index(3, 60, rng);
    const Index rank = uniform_index(1, std::min<Index>(5, std::min(rows, cols)), rng);
    const MaskedMatrix input(low_rank(rows, cols, rank, rng),
                             bernoulli_mask(rows, cols, uniform_real(0.2, 0.9, rng), rng));
    if (input.observed_count() == 0) continue;
    CompletionConfig cfg = CompletionConfig::accurate(uniform_real(0.01, 3.0, rng));
    cfg.max_iters = 60;
    const CompletionResult r = soft_impute(input, cfg);
    const double scale = 1.0 + r.objective_trace.front();
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1] + 1e-9 * scale);
    }
    // The objective reported per step is the objective of the iterate.
    EXPECT_NEAR(r.objective_trace.back(), eval_objective(r.completed, input, cfg.lambda), 1e-8 * scale);
    EXPECT_LE(r.objective_trace.back(), eval_objective(DenseMatrix::Zero(rows, cols), input, cfg.lambda));
  }
}

TEST(SoftImputeProperty, UnobservedEntriesNeverMatter) {
  auto rng = rng_for(51);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = uniform_index(2, 30, rng);
    const Index cols = uniform_index(2, 30, rng);
    const DenseMatrix v = low_rank(rows, cols, 2, rng);
    const Mask obs = bernoulli_mask(rows, cols, 0.6, rng);
    if (!obs.any()) continue;
    DenseMatrix garbage = v;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (!obs(i, j)) garbage(i, j) = (i + j) % 2 ? 1e6 : std::numeric_limits<double>::quiet_NaN();
      }
    }
    CompletionConfig cfg = CompletionConfig::accurate(0.3);
    cfg.max_iters = 25;
    const CompletionResult a = soft_impute(MaskedMatrix(v, obs), cfg);
    const CompletionResult b = soft_impute(MaskedMatrix(garbage, obs), cfg);
    EXPECT_EQ(max_abs(a.completed - b.completed), 0.0);
  }
}

TEST(SoftImputeProperty, ShrinkingLambdaApproachesInput) {
  auto rng = rng_for(52);
  for (int trial = 0; trial < 100; ++trial) {
    const DenseMatrix m = gaussian_matrix(uniform_index(2, 30, rng), uniform_index(2, 30, rng), rng);
    const MaskedMatrix input = MaskedMatrix::fully_observed(m);
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {4.0, 2.0, 1.0, 0.5, 0.1, 0.01, 0.0}) {
      const double gap = (soft_impute(input, CompletionConfig::accurate(lambda)).completed - m).norm();
      EXPECT_LE(gap, previous * (1 + 1e-12) + 1e-12);
      previous = gap;
    }
    EXPECT_LE(previous, 1e-12);
  }
}

TEST(SoftImputeProperty, AccurateBeatsQuick) {
  auto rng = rng_for(53);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = uniform_index(5, 40, rng);
    const Index cols = uniform_index(5, 40, rng);
    const MaskedMatrix input(low_rank(rows, cols, 3, rng), bernoulli_mask(rows, cols, 0.5, rng));
    if (input.observed_count() == 0) continue;
    const double lambda = uniform_real(0.05, 2.0, rng);
    const double quick = quick_complete(input, lambda).objective_trace.back();
    const double accurate = soft_impute(input, CompletionConfig::accurate(lambda)).objective_trace.back();
    EXPECT_LE(accurate, quick * (1 + 1e-9));
  }
}

TEST(SoftImputeProperty, Deterministic) {
  auto rng = rng_for(54);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = uniform_index(48, 70, rng);
    const Index cols = uniform_index(48, 70, rng);
    const MaskedMatrix input(low_rank(rows, cols, 4, rng), bernoulli_mask(rows, cols, 0.5, rng));
    CompletionConfig cfg = CompletionConfig::accurate(0.5);
    cfg.max_iters = 5;
    const CompletionResult a = soft_impute(input, cfg);
    const CompletionResult b = soft_impute(input, cfg);
    EXPECT_EQ(max_abs(a.completed - b.completed), 0.0);
    EXPECT_EQ(a.objective_trace, b.objective_trace);
  }
}

}  // namespace
}  // namespace lrsparse
