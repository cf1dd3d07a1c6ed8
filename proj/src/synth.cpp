#include "lrsparse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lrsparse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

DenseMatrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

DenseMatrix orthonormal_columns(const DenseMatrix& g) {
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  return qr.householderQ() * DenseMatrix::Identity(g.rows(), g.cols());
}

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::string_view purpose) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ hash_tag(purpose));
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
  return std::mt19937_64(seq);
}

void ExperimentSpec::validate() const {
  if (m < 1 || n < 1) throw InvalidArgument("spec: m and n must be positive");
  if (r < 0 || r > std::min(m, n)) throw InvalidArgument("spec: need 0 <= r <= min(m, n)");
  if (s < 0 || s > n) throw InvalidArgument("spec: need 0 <= s <= n");
  if (!(alpha_obs > 0.0 && alpha_obs <= 1.0)) {
    throw InvalidArgument("spec: alpha_obs must lie in (0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InvalidArgument("spec: noise_sigma must be finite and non-negative");
  }
}

DenseMatrix gen_low_rank(Index m, Index n, Index r, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InvalidArgument("gen_low_rank: m and n must be positive");
  if (r < 0 || r > std::min(m, n)) {
    throw InvalidArgument("gen_low_rank: rank exceeds min(m, n)");
  }
  if (r == 0) return DenseMatrix::Zero(m, n);
  auto rng = make_stream(seed, "low_rank");
  const DenseMatrix u = orthonormal_columns(gaussian(m, r, rng));
  const DenseMatrix v = orthonormal_columns(gaussian(n, r, rng));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector sigma(r);
  for (Index i = 0; i < r; ++i) sigma(i) = std::abs(normal(rng));
  return u * sigma.asDiagonal() * v.transpose();
}

MaskedMatrix apply_bernoulli_mask(const DenseMatrix& m, double alpha_obs, std::uint64_t seed) {
  if (!(alpha_obs >= 0.0 && alpha_obs <= 1.0)) {
    throw InvalidArgument("apply_bernoulli_mask: alpha_obs must lie in [0, 1]");
  }
  auto rng = make_stream(seed, "mask");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Mask observed(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) observed(i, j) = uniform(rng) < alpha_obs;
  }
  return MaskedMatrix(m, std::move(observed));
}

SparseVector gen_sparse_beta(Index n, Index s, std::uint64_t seed) {
  if (n < 0 || s < 0) throw InvalidArgument("gen_sparse_beta: negative size");
  if (s > n) throw InvalidArgument("gen_sparse_beta: s exceeds n");
  auto rng = make_stream(seed, "beta");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Partial Fisher-Yates: the first s slots are a uniform s-subset.
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  SparseVector beta{Vector::Zero(n), kDefaultZeroTol};
  for (Index i = 0; i < s; ++i) {
    double v = 0.0;
    do {
      v = normal(rng);
    } while (std::abs(v) < kMinNonzeroMagnitude);
    beta.entries(idx[static_cast<std::size_t>(i)]) = v;
  }
  return beta;
}

Vector gen_labels(const DenseMatrix& x, const SparseVector& beta, double noise_sigma,
                  std::uint64_t seed) {
  if (x.cols() != beta.size()) throw InvalidInput("gen_labels: X cols must equal length of beta");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("gen_labels: noise_sigma must be >= 0");
  Vector y = x * beta.entries;
  if (noise_sigma > 0.0) {
    auto rng = make_stream(seed, "noise");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < y.size(); ++i) y(i) += noise_sigma * normal(rng);
  }
  return y;
}

std::pair<IndexSet, IndexSet> split_train_test(Index m, std::uint64_t seed) {
  if (m < 5) throw InvalidArgument("split_train_test: need at least 5 rows");
  auto rng = make_stream(seed, "split");
  IndexSet perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = m - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  const auto n_train = static_cast<std::size_t>((4 * m + 2) / 5);  // round(4m/5)
  IndexSet train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  IndexSet test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

Instance generate_instance(const ExperimentSpec& spec) {
  spec.validate();
  Instance inst;
  inst.spec = spec;
  inst.x_true = gen_low_rank(spec.m, spec.n, spec.r, spec.seed);
  inst.masked = apply_bernoulli_mask(inst.x_true, spec.alpha_obs, spec.seed);
  inst.beta_true = gen_sparse_beta(spec.n, spec.s, spec.seed);
  inst.y = gen_labels(inst.x_true, inst.beta_true, spec.noise_sigma, spec.seed);
  std::tie(inst.train_rows, inst.test_rows) = split_train_test(spec.m, spec.seed);
  return inst;
}

}  // namespace lrsparse
