#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrsparse/pipelines.hpp"
#include "lrsparse/synth.hpp"

namespace lrsparse {

/// sqrt(mean((pred − truth)²)). Throws InvalidInput on empty or mismatched input.
double rmse(const Vector& pred, const Vector& truth);

/// F1 score of an estimated support against the true one; 1 when both are empty.
double support_f1(const IndexSet& estimate, const IndexSet& truth);

struct RunRecord {
  std::string method;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::map<std::string, double> train_seconds_per_stage;
  double total_seconds = 0.0;
  double test_rmse = 0.0;
  bool converged = false;
  double support_f1 = 0.0;
  /// Empty on success; otherwise a short tag ("empty_support", or the message).
  std::string error;
  int workers = 1;

  /// Fitted coefficients (zero when the pipeline failed). Not serialized.
  Vector beta_hat;
};

/// Training view of an instance: train rows of the masked matrix and labels.
struct TrainingData {
  MaskedMatrix x;
  Vector y;
};

TrainingData training_data(const Instance& instance);

struct RunOptions {
  /// Predict from test rows completed by Soft-Impute instead of X_true rows.
  bool impute_test = false;
  int workers = 1;
};

/// Fits `method` on the training rows and scores it on the test rows.
/// Pipeline failures are recorded, never thrown; the record then predicts
/// with β̂ = 0.
RunRecord run_method(const Instance& instance, Method method, const PipelineParams& params,
                     const RunOptions& options = {});

struct CvPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  RunRecord record;
  bool ok() const { return record.error.empty(); }
};

struct CvResult {
  std::string method;
  std::vector<CvPoint> curve;
  std::size_t best = 0;

  const CvPoint& best_point() const { return curve.at(best); }
};

class AllFailedError : public std::runtime_error {
 public:
  explicit AllFailedError(std::vector<CvPoint> points)
      : std::runtime_error("cross-validation: every grid point failed"),
        points_(std::move(points)) {}
  const std::vector<CvPoint>& points() const { return points_; }

 private:
  std::vector<CvPoint> points_;
};

/// Test RMSE for every (λ₁, λ₂) in the grid product; best is the lowest
/// RMSE among successful points, ties going to larger λ₂ then larger λ₁.
/// TwoStep shares one completion per λ₁, computed along a descending λ₁ path
/// with warm starts.
CvResult cross_validate(const Instance& instance, Method method,
                        const std::vector<double>& lambda1_grid,
                        const std::vector<double>& lambda2_grid, const PipelineParams& base,
                        const RunOptions& options = {});

CvResult cross_validate(const ExperimentSpec& spec, Method method,
                        const std::vector<double>& lambda1_grid,
                        const std::vector<double>& lambda2_grid, const PipelineParams& base,
                        const RunOptions& options = {});

/// Largest useful penalties for the training data: λ₁ = 2σ₁(P_E X̂) zeroes
/// every completion, λ₂ = 2‖X̂ᵀy‖_∞ (zero-filled X̂) zeroes the LASSO.
std::pair<double, double> lambda_max(const TrainingData& data);

/// `points` values from hi·lo_ratio to hi, evenly spaced in log.
std::vector<double> log_grid(double hi, double lo_ratio, int points);

/// A λ grid either in absolute units or as fractions of lambda_max.
struct LambdaGrid {
  std::vector<double> values;
  bool relative = true;

  std::vector<double> resolve(double max_value) const;
};

inline constexpr int kDefaultGridPoints = 15;
/// Default single-run penalties, as fractions of lambda_max.
inline constexpr double kDefaultLambda1Fraction = 0.05;
inline constexpr double kDefaultLambda2Fraction = 0.1;

LambdaGrid default_lambda1_grid();
LambdaGrid default_lambda2_grid();

struct BenchConfig {
  std::vector<std::pair<Index, Index>> sizes;
  /// Rank per size; non-positive selects min(m, n)/5.
  Index rank = 0;
  Index sparsity = 15;
  double alpha_obs = 0.5;
  double noise_sigma = 1.0;
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  LambdaGrid lambda1_grid{{kDefaultLambda1Fraction}, true};
  LambdaGrid lambda2_grid{{kDefaultLambda2Fraction}, true};
  PipelineParams params;
  bool impute_test = false;
  int workers = 1;

  void validate() const;
};

/// Base of the default seed list: kDefaultSeedBase, kDefaultSeedBase + 1, ...
inline constexpr std::uint64_t kDefaultSeedBase = 1000;
std::vector<std::uint64_t> default_seeds(int count = 20);

/// Sizes used by `bench` when none are given.
std::vector<std::pair<Index, Index>> default_sizes();

struct CurvePoint {
  double lambda1 = 0.0;  // mean over seeds (relative grids resolve per instance)
  double lambda2 = 0.0;
  std::size_t lambda1_index = 0;
  std::size_t lambda2_index = 0;
  double mean_rmse = 0.0;
  int runs = 0;
};

struct BenchmarkReport {
  std::vector<RunRecord> records;
  /// "method@mxn" → mean test RMSE per grid point over seeds (failed runs included).
  std::map<std::string, std::vector<CurvePoint>> cv_curves;
};

BenchmarkReport run_benchmark(const BenchConfig& cfg);

nlohmann::json to_json(const RunRecord& r);
nlohmann::json to_json(const BenchmarkReport& report);
nlohmann::json to_json(const CvResult& cv);

/// Header row plus one line per record; columns mirror the JSON record fields.
std::string to_csv(const std::vector<RunRecord>& records);
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "method", "m", "n", "seed", "lambda1", "lambda2", "train_seconds_per_stage",
      "total_seconds", "test_rmse", "converged", "support_f1", "error", "workers"};
  return cols;
}

/// Writes text to `path` (parent directories created); throws on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lrsparse
