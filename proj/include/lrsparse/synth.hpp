#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string_view>
#include <utility>

#include "lrsparse/completion.hpp"
#include "lrsparse/sparse.hpp"

namespace lrsparse {

/// Independent generator for (seed, purpose): adding a new purpose never
/// shifts the draws of an existing one.
std::mt19937_64 make_stream(std::uint64_t seed, std::string_view purpose);

struct ExperimentSpec {
  Index m = 500;
  Index n = 200;
  Index r = 40;
  Index s = 15;
  double alpha_obs = 0.5;
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Instance {
  ExperimentSpec spec;
  DenseMatrix x_true;
  MaskedMatrix masked;
  SparseVector beta_true;
  Vector y;
  IndexSet train_rows;
  IndexSet test_rows;
};

/// U·diag(|g|)·Vᵀ with U, V orthonormalized Gaussian matrices; rank r.
DenseMatrix gen_low_rank(Index m, Index n, Index r, std::uint64_t seed);

/// Each entry observed independently with probability alpha_obs.
MaskedMatrix apply_bernoulli_mask(const DenseMatrix& m, double alpha_obs, std::uint64_t seed);

/// Exactly s non-zeros at uniform positions; values N(0,1) redrawn until |v| ≥ 0.1.
SparseVector gen_sparse_beta(Index n, Index s, std::uint64_t seed);

inline constexpr double kMinNonzeroMagnitude = 0.1;

/// X·β + noise_sigma·g, g ~ N(0, I_m).
Vector gen_labels(const DenseMatrix& x, const SparseVector& beta, double noise_sigma,
                  std::uint64_t seed);

/// Random partition of {0,…,m−1}; round(4m/5) training rows. Both lists ascending.
std::pair<IndexSet, IndexSet> split_train_test(Index m, std::uint64_t seed);

Instance generate_instance(const ExperimentSpec& spec);

/// Writes header.json, x_true.csv, mask.csv, beta.csv and y.csv into `dir`
/// (created if needed).
void write_instance(const Instance& inst, const std::filesystem::path& dir);
Instance read_instance(const std::filesystem::path& dir);

}  // namespace lrsparse
