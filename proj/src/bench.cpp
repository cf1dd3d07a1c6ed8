#include "lrsparse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lrsparse/linalg.hpp"

namespace lrsparse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

DenseMatrix rows_of(const DenseMatrix& m, const IndexSet& rows) {
  DenseMatrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Vector entries_of(const Vector& v, const IndexSet& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

// Features used for prediction on the test rows.
DenseMatrix test_features(const Instance& instance, const PipelineParams& params,
                          const RunOptions& options) {
  if (!options.impute_test) return rows_of(instance.x_true, instance.test_rows);
  // Feature entries only; labels never enter the completion.
  CompletionConfig cfg = params.accurate;
  cfg.lambda = params.lambda1;
  return rows_of(soft_impute(instance.masked, cfg).completed, instance.test_rows);
}

void score(RunRecord& rec, const DenseMatrix& x_test, const Vector& y_test) {
  rec.test_rmse = rmse(x_test * rec.beta_hat, y_test);
}

RunRecord blank_record(const Instance& instance, Method method, const PipelineParams& params,
                       const RunOptions& options) {
  RunRecord rec;
  rec.method = to_string(method);
  rec.m = instance.spec.m;
  rec.n = instance.spec.n;
  rec.seed = instance.spec.seed;
  rec.lambda1 = params.lambda1;
  rec.lambda2 = params.lambda2;
  rec.workers = options.workers;
  rec.beta_hat = Vector::Zero(instance.spec.n);
  return rec;
}

void fill_from_result(RunRecord& rec, const RecoveryResult& result, const IndexSet& truth) {
  rec.train_seconds_per_stage = result.stage_times;
  rec.total_seconds = result.total_seconds();
  rec.converged = result.converged;
  rec.beta_hat = result.beta_hat.entries;
  rec.support_f1 = support_f1(result.support_estimate, truth);
}

// Runs `fit` and turns every pipeline failure into a zero-β̂ record.
template <typename Fit>
void guarded_fit(RunRecord& rec, const IndexSet& truth, Fit&& fit) {
  const auto start = Clock::now();
  try {
    fill_from_result(rec, fit(), truth);
  } catch (const EmptySupportError& e) {
    fill_from_result(rec, e.partial(), truth);
    rec.total_seconds = std::max(rec.total_seconds, seconds_since(start));
    rec.converged = false;
    rec.error = "empty_support";
  } catch (const std::exception& e) {
    rec.beta_hat.setZero();
    rec.support_f1 = support_f1({}, truth);
    rec.total_seconds = seconds_since(start);
    rec.converged = false;
    rec.error = e.what();
    if (rec.error.empty()) rec.error = "error";
  }
}

bool better(const CvPoint& a, const CvPoint& b) {
  const double ra = a.record.test_rmse;
  const double rb = b.record.test_rmse;
  if (ra != rb) return ra < rb;
  if (a.lambda2 != b.lambda2) return a.lambda2 > b.lambda2;
  return a.lambda1 > b.lambda1;
}

std::vector<CvPoint> cv_points(const Instance& instance, Method method,
                               const std::vector<double>& lambda1_grid,
                               const std::vector<double>& lambda2_grid,
                               const PipelineParams& base, const RunOptions& options) {
  if (lambda1_grid.empty() || lambda2_grid.empty()) {
    throw InvalidArgument("cross_validate: lambda grids must be non-empty");
  }
  std::vector<CvPoint> points;
  points.reserve(lambda1_grid.size() * lambda2_grid.size());

  if (method != Method::TwoStep) {
    for (double l1 : lambda1_grid) {
      for (double l2 : lambda2_grid) {
        PipelineParams p = base;
        p.lambda1 = l1;
        p.lambda2 = l2;
        points.push_back({l1, l2, run_method(instance, method, p, options)});
      }
    }
    return points;
  }

  // TwoStep: the completion ignores λ₂; walk λ₁ downwards and warm-start.
  const TrainingData train = training_data(instance);
  const IndexSet truth = support(instance.beta_true);
  const Vector y_test = entries_of(instance.y, instance.test_rows);
  std::vector<std::size_t> order(lambda1_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lambda1_grid[a] > lambda1_grid[b];
  });

  std::vector<std::vector<CvPoint>> by_l1(lambda1_grid.size());
  DenseMatrix warm = DenseMatrix::Zero(train.x.rows(), train.x.cols());
  for (std::size_t idx : order) {
    PipelineParams p = base;
    p.lambda1 = lambda1_grid[idx];
    std::optional<CompletionResult> mc2;
    double mc2_seconds = 0.0;
    std::string completion_error;
    try {
      p.validate();
      CompletionConfig cfg = p.accurate;
      cfg.lambda = p.lambda1;
      const auto start = Clock::now();
      mc2 = soft_impute(train.x, cfg, warm);
      mc2_seconds = seconds_since(start);
      warm = mc2->completed;
    } catch (const std::exception& e) {
      completion_error = e.what();
    }
    const DenseMatrix x_test = test_features(instance, p, options);
    for (double l2 : lambda2_grid) {
      p.lambda2 = l2;
      RunRecord rec = blank_record(instance, method, p, options);
      if (mc2) {
        guarded_fit(rec, truth, [&] { return two_step_from_completion(*mc2, mc2_seconds, train.y, p); });
      } else {
        rec.error = completion_error;
        rec.support_f1 = support_f1({}, truth);
      }
      score(rec, x_test, y_test);
      by_l1[idx].push_back({p.lambda1, l2, std::move(rec)});
    }
  }
  for (auto& row : by_l1) {
    for (auto& pt : row) points.push_back(std::move(pt));
  }
  return points;
}

std::string format_stages(const std::map<std::string, double>& stages) {
  std::ostringstream out;
  out << std::setprecision(9);
  bool first = true;
  for (const auto& [name, secs] : stages) {
    if (!first) out << ';';
    first = false;
    out << name << '=' << secs;
  }
  return out.str();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

double rmse(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size()) throw InvalidInput("rmse: length mismatch");
  if (pred.size() == 0) throw InvalidInput("rmse: empty input");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double support_f1(const IndexSet& estimate, const IndexSet& truth) {
  if (estimate.empty() && truth.empty()) return 1.0;
  if (estimate.empty() || truth.empty()) return 0.0;
  IndexSet common;
  std::set_intersection(estimate.begin(), estimate.end(), truth.begin(), truth.end(),
                        std::back_inserter(common));
  const double tp = static_cast<double>(common.size());
  return 2.0 * tp / static_cast<double>(estimate.size() + truth.size());
}

TrainingData training_data(const Instance& instance) {
  return {instance.masked.select_rows(instance.train_rows),
          entries_of(instance.y, instance.train_rows)};
}

RunRecord run_method(const Instance& instance, Method method, const PipelineParams& params,
                     const RunOptions& options) {
  RunRecord rec = blank_record(instance, method, params, options);
  const IndexSet truth = support(instance.beta_true);
  {
    const TrainingData train = training_data(instance);
    guarded_fit(rec, truth, [&] { return run_pipeline(method, train.x, train.y, params); });
  }
  const Vector y_test = entries_of(instance.y, instance.test_rows);
  score(rec, test_features(instance, params, options), y_test);
  return rec;
}

CvResult cross_validate(const Instance& instance, Method method,
                        const std::vector<double>& lambda1_grid,
                        const std::vector<double>& lambda2_grid, const PipelineParams& base,
                        const RunOptions& options) {
  CvResult cv;
  cv.method = to_string(method);
  cv.curve = cv_points(instance, method, lambda1_grid, lambda2_grid, base, options);
  bool found = false;
  for (std::size_t i = 0; i < cv.curve.size(); ++i) {
    if (!cv.curve[i].ok()) continue;
    if (!found || better(cv.curve[i], cv.curve[cv.best])) cv.best = i;
    found = true;
  }
  if (!found) throw AllFailedError(std::move(cv.curve));
  return cv;
}

CvResult cross_validate(const ExperimentSpec& spec, Method method,
                        const std::vector<double>& lambda1_grid,
                        const std::vector<double>& lambda2_grid, const PipelineParams& base,
                        const RunOptions& options) {
  return cross_validate(generate_instance(spec), method, lambda1_grid, lambda2_grid, base,
                        options);
}

std::pair<double, double> lambda_max(const TrainingData& data) {
  const DenseMatrix& x = data.x.zero_filled();
  return {2.0 * operator_norm(x), lasso_lambda_max(x, data.y)};
}

std::vector<double> log_grid(double hi, double lo_ratio, int points) {
  if (!(hi > 0.0) || !(lo_ratio > 0.0 && lo_ratio <= 1.0) || points < 1) {
    throw InvalidArgument("log_grid: need hi > 0, 0 < lo_ratio <= 1, points >= 1");
  }
  if (points == 1) return {hi};
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = std::log(lo_ratio) / (points - 1);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = hi * std::exp(step * (points - 1 - i));
  }
  return grid;
}

std::vector<double> LambdaGrid::resolve(double max_value) const {
  if (values.empty()) throw InvalidArgument("lambda grid must be non-empty");
  std::vector<double> out = values;
  if (relative) {
    for (double& v : out) v *= max_value;
  }
  return out;
}

LambdaGrid default_lambda1_grid() {
  return {log_grid(0.5, 1e-3, kDefaultGridPoints), true};
}

LambdaGrid default_lambda2_grid() {
  return {log_grid(1.0, 1e-3, kDefaultGridPoints), true};
}

void BenchConfig::validate() const {
  if (sizes.empty()) throw InvalidArgument("bench: sizes must be non-empty");
  if (seeds.empty()) throw InvalidArgument("bench: seeds must be non-empty");
  if (methods.empty()) throw InvalidArgument("bench: methods must be non-empty");
  if (lambda1_grid.values.empty() || lambda2_grid.values.empty()) {
    throw InvalidArgument("bench: lambda grids must be non-empty");
  }
  for (double v : lambda1_grid.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("bench: bad lambda1 value");
  }
  for (double v : lambda2_grid.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("bench: bad lambda2 value");
  }
  if (workers < 1) throw InvalidArgument("bench: workers must be >= 1");
  for (const auto& [m, n] : sizes) {
    ExperimentSpec spec;
    spec.m = m;
    spec.n = n;
    spec.r = rank > 0 ? rank : std::min(m, n) / 5;
    spec.s = sparsity;
    spec.alpha_obs = alpha_obs;
    spec.noise_sigma = noise_sigma;
    spec.validate();
  }
}

std::vector<std::uint64_t> default_seeds(int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(kDefaultSeedBase + static_cast<std::uint64_t>(i));
  return seeds;
}

std::vector<std::pair<Index, Index>> default_sizes() {
  return {{500, 200}, {2000, 200}, {2000, 500}, {1000, 200}, {3000, 500}};
}

BenchmarkReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  struct Task {
    std::size_t size_index;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    for (auto seed : cfg.seeds) tasks.push_back({si, seed});
  }
  // One slot per task and method; filled in parallel, read in order.
  std::vector<std::vector<CvResult>> results(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  const RunOptions options{cfg.impute_test, cfg.workers};

#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    try {
      const auto [m, n] = cfg.sizes[tasks[t].size_index];
      ExperimentSpec spec;
      spec.m = m;
      spec.n = n;
      spec.r = cfg.rank > 0 ? cfg.rank : std::min(m, n) / 5;
      spec.s = cfg.sparsity;
      spec.alpha_obs = cfg.alpha_obs;
      spec.noise_sigma = cfg.noise_sigma;
      spec.seed = tasks[t].seed;
      const Instance instance = generate_instance(spec);
      const auto [l1max, l2max] = lambda_max(training_data(instance));
      const auto grid1 = cfg.lambda1_grid.resolve(l1max);
      const auto grid2 = cfg.lambda2_grid.resolve(l2max);
      for (Method method : cfg.methods) {
        try {
          results[t].push_back(
              cross_validate(instance, method, grid1, grid2, cfg.params, options));
        } catch (const AllFailedError& e) {
          CvResult cv;
          cv.method = to_string(method);
          cv.curve = e.points();
          results[t].push_back(std::move(cv));
        }
      }
    } catch (...) {
      failures[t] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  BenchmarkReport report;
  const std::size_t n1 = cfg.lambda1_grid.values.size();
  const std::size_t n2 = cfg.lambda2_grid.values.size();
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto [m, n] = cfg.sizes[tasks[t].size_index];
    for (const auto& cv : results[t]) {
      const std::string key = cv.method + "@" + std::to_string(m) + "x" + std::to_string(n);
      auto& curve = report.cv_curves[key];
      if (curve.empty()) {
        curve.resize(n1 * n2);
        for (std::size_t i = 0; i < n1 * n2; ++i) {
          curve[i].lambda1_index = i / n2;
          curve[i].lambda2_index = i % n2;
        }
      }
      for (std::size_t i = 0; i < cv.curve.size(); ++i) {
        auto& pt = curve[i];
        pt.lambda1 += cv.curve[i].lambda1;
        pt.lambda2 += cv.curve[i].lambda2;
        pt.mean_rmse += cv.curve[i].record.test_rmse;
        ++pt.runs;
        report.records.push_back(cv.curve[i].record);
      }
    }
  }
  for (auto& [key, curve] : report.cv_curves) {
    for (auto& pt : curve) {
      if (pt.runs == 0) continue;
      pt.lambda1 /= pt.runs;
      pt.lambda2 /= pt.runs;
      pt.mean_rmse /= pt.runs;
    }
  }
  return report;
}

nlohmann::json to_json(const RunRecord& r) {
  return {
      {"method", r.method},
      {"m", r.m},
      {"n", r.n},
      {"seed", r.seed},
      {"lambda1", r.lambda1},
      {"lambda2", r.lambda2},
      {"train_seconds_per_stage", r.train_seconds_per_stage},
      {"total_seconds", r.total_seconds},
      {"test_rmse", r.test_rmse},
      {"converged", r.converged},
      {"support_f1", r.support_f1},
      {"error", r.error},
      {"workers", r.workers},
  };
}

nlohmann::json to_json(const BenchmarkReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) records.push_back(to_json(r));
  nlohmann::json curves = nlohmann::json::object();
  for (const auto& [key, curve] : report.cv_curves) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : curve) {
      pts.push_back({{"lambda1_index", p.lambda1_index},
                     {"lambda2_index", p.lambda2_index},
                     {"lambda1", p.lambda1},
                     {"lambda2", p.lambda2},
                     {"mean_rmse", p.mean_rmse},
                     {"runs", p.runs}});
    }
    curves[key] = pts;
  }
  return {{"records", records}, {"cv_curves", curves}};
}

nlohmann::json to_json(const CvResult& cv) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : cv.curve) curve.push_back(to_json(p.record));
  const auto& best = cv.curve.at(cv.best);
  return {{"method", cv.method},
          {"best", {{"lambda1", best.lambda1},
                    {"lambda2", best.lambda2},
                    {"test_rmse", best.record.test_rmse}}},
          {"curve", curve}};
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << std::setprecision(17);
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << csv_quote(r.method) << ',' << r.m << ',' << r.n << ',' << r.seed << ',' << r.lambda1
        << ',' << r.lambda2 << ',' << csv_quote(format_stages(r.train_seconds_per_stage)) << ','
        << r.total_seconds << ',' << r.test_rmse << ',' << (r.converged ? "true" : "false")
        << ',' << r.support_f1 << ',' << csv_quote(r.error) << ',' << r.workers << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace lrsparse
