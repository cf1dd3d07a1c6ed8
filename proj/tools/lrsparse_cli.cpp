// lrsparse: generate synthetic instances, run the pipelines, sweep λ grids
// and audit Soft-Impute traces.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrsparse/bench.hpp"
#include "lrsparse/diagnostics.hpp"

namespace {

using namespace lrsparse;

constexpr int kExitInvalid = 2;
constexpr int kExitAllFailed = 3;

struct SpecFlags {
  Index m = 500;
  Index n = 200;
  Index rank = -1;  // min(m, n)/5
  Index sparsity = 15;
  double alpha_obs = 0.5;
  double noise_sigma = 1.0;
  std::uint64_t seed = kDefaultSeedBase;
  std::string instance_dir;

  ExperimentSpec spec() const {
    ExperimentSpec s;
    s.m = m;
    s.n = n;
    s.r = rank >= 0 ? rank : std::min(m, n) / 5;
    s.s = sparsity;
    s.alpha_obs = alpha_obs;
    s.noise_sigma = noise_sigma;
    s.seed = seed;
    return s;
  }

  Instance load() const {
    if (!instance_dir.empty()) return read_instance(instance_dir);
    return generate_instance(spec());
  }
};

void add_spec_flags(CLI::App* app, SpecFlags& f, bool with_seed = true) {
  app->add_option("--m", f.m, "Rows")->check(CLI::PositiveNumber);
  app->add_option("--n", f.n, "Columns")->check(CLI::PositiveNumber);
  app->add_option("--rank", f.rank, "Rank of X (default min(m,n)/5)");
  app->add_option("--sparsity", f.sparsity, "Non-zeros in beta");
  app->add_option("--alpha-obs", f.alpha_obs, "Observation probability");
  app->add_option("--noise-sigma", f.noise_sigma, "Label noise std-dev");
  if (with_seed) app->add_option("--seed", f.seed, "Instance seed");
}

struct SolveFlags {
  std::string solver = "imat";
  double epsilon = PipelineParams{}.epsilon;
  double alpha_stop = PipelineParams{}.alpha_stop;
  bool impute_test = false;

  PipelineParams params() const {
    PipelineParams p;
    p.final_solver = parse_solver(solver);
    p.epsilon = epsilon;
    p.alpha_stop = alpha_stop;
    return p;
  }
};

void add_solve_flags(CLI::App* app, SolveFlags& f) {
  app->add_option("--solver", f.solver, "Sparse solver")
      ->check(CLI::IsMember({"lasso", "imat", "imatcs"}));
  app->add_option("--epsilon", f.epsilon, "Phase-A stopping tolerance on beta");
  app->add_option("--alpha", f.alpha_stop, "Phase-B stopping tolerance on beta");
  app->add_flag("--impute-test", f.impute_test, "Predict from completed test rows");
}

struct OutputFlags {
  std::string out;
  std::string format = "json";
};

void add_output_flags(CLI::App* app, OutputFlags& f) {
  app->add_option("--out", f.out, "Output file (default stdout)");
  app->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void emit(const OutputFlags& f, const nlohmann::json& json, const std::string& csv) {
  const std::string text = f.format == "csv" ? csv : json.dump(2) + "\n";
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text(f.out, text);
  }
}

std::vector<double> grid_or_default(const std::vector<double>& given, bool relative,
                                    const LambdaGrid& fallback, double max_value) {
  if (given.empty()) return fallback.resolve(max_value);
  return LambdaGrid{given, relative}.resolve(max_value);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse regression with missing features: low-rank completion plus sparse recovery"};
  app.require_subcommand(1);

  // generate
  SpecFlags gen_spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic instance to a directory");
  add_spec_flags(gen, gen_spec);
  gen->add_option("--out", gen_out, "Output directory")->required();

  // run
  SpecFlags run_spec;
  SolveFlags run_solve;
  OutputFlags run_output;
  std::string run_method_name = "four-step";
  std::optional<double> run_lambda1;
  std::optional<double> run_lambda2;
  auto* run = app.add_subcommand("run", "Fit one method on one instance");
  add_spec_flags(run, run_spec);
  run->add_option("--instance", run_spec.instance_dir, "Read the instance from a directory");
  run->add_option("--method", run_method_name, "two-step | four-step | augmented-four-step");
  run->add_option("--lambda1", run_lambda1, "Completion penalty (default: fraction of max)");
  run->add_option("--lambda2", run_lambda2, "Sparse penalty (default: fraction of max)");
  add_solve_flags(run, run_solve);
  add_output_flags(run, run_output);

  // cv
  SpecFlags cv_spec;
  SolveFlags cv_solve;
  OutputFlags cv_output;
  std::string cv_method_name = "four-step";
  std::vector<double> cv_grid1;
  std::vector<double> cv_grid2;
  bool cv_relative = false;
  auto* cv = app.add_subcommand("cv", "Cross-validate both penalties on one instance");
  add_spec_flags(cv, cv_spec);
  cv->add_option("--instance", cv_spec.instance_dir, "Read the instance from a directory");
  cv->add_option("--method", cv_method_name, "two-step | four-step | augmented-four-step");
  cv->add_option("--lambda1-grid", cv_grid1, "Completion penalties")->delimiter(',');
  cv->add_option("--lambda2-grid", cv_grid2, "Sparse penalties")->delimiter(',');
  cv->add_flag("--relative-grid", cv_relative, "Grid values are fractions of the largest penalty");
  add_solve_flags(cv, cv_solve);
  add_output_flags(cv, cv_output);

  // bench
  SpecFlags bench_spec;
  SolveFlags bench_solve;
  OutputFlags bench_output;
  std::vector<std::string> bench_sizes;
  std::vector<std::uint64_t> bench_seeds;
  int bench_num_seeds = 20;
  std::vector<std::string> bench_methods{"two-step", "four-step", "augmented-four-step"};
  std::vector<double> bench_grid1;
  std::vector<double> bench_grid2;
  bool bench_relative = false;
  int bench_workers = 1;
  auto* bench = app.add_subcommand("bench", "Sweep methods over sizes and seeds");
  add_spec_flags(bench, bench_spec, false);
  bench->add_option("--sizes", bench_sizes, "Sizes as MxN (default: five benchmark sizes)")
      ->delimiter(',');
  bench->add_option("--seeds", bench_seeds, "Seeds")->delimiter(',');
  bench->add_option("--num-seeds", bench_num_seeds,
                    "Consecutive seeds from the default base when --seeds is absent")
      ->check(CLI::PositiveNumber);
  bench->add_option("--method", bench_methods, "Methods")->delimiter(',');
  bench->add_option("--lambda1-grid", bench_grid1, "Completion penalties")->delimiter(',');
  bench->add_option("--lambda2-grid", bench_grid2, "Sparse penalties")->delimiter(',');
  bench->add_flag("--relative-grid", bench_relative,
                  "Grid values are fractions of the largest penalty");
  bench->add_option("--workers", bench_workers, "Parallel tasks")->check(CLI::PositiveNumber);
  add_solve_flags(bench, bench_solve);
  add_output_flags(bench, bench_output);

  // diagnose
  SpecFlags diag_spec;
  diag_spec.m = 100;
  diag_spec.n = 60;
  diag_spec.rank = 3;
  diag_spec.sparsity = 5;
  diag_spec.noise_sigma = 0.0;
  double diag_lambda1 = 0.1;
  int diag_iters = 200;
  AuditParams audit;
  std::string diag_out;
  auto* diag = app.add_subcommand("diagnose", "Audit a Soft-Impute trace against the error bounds");
  add_spec_flags(diag, diag_spec);
  diag->add_option("--instance", diag_spec.instance_dir, "Read the instance from a directory");
  diag->add_option("--lambda1", diag_lambda1, "Completion penalty");
  diag->add_option("--iters", diag_iters, "Soft-Impute iterations")->check(CLI::PositiveNumber);
  diag->add_option("--lambda-k", audit.lambda_k, "LASSO penalty per iterate (default: 0.1 of max)");
  diag->add_option("--alpha1", audit.alpha1, "RE curvature");
  diag->add_option("--tau", audit.tau, "RE tolerance");
  diag->add_option("--c0", audit.c0, "Bound constant");
  diag->add_option("--out", diag_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*gen) {
      write_instance(gen_spec.load(), gen_out);
      std::cerr << "wrote " << gen_out << "\n";
    } else if (*run) {
      const Instance inst = run_spec.load();
      PipelineParams p = run_solve.params();
      const auto [l1max, l2max] = lambda_max(training_data(inst));
      p.lambda1 = run_lambda1.value_or(kDefaultLambda1Fraction * l1max);
      p.lambda2 = run_lambda2.value_or(kDefaultLambda2Fraction * l2max);
      p.validate();
      const RunRecord rec =
          run_method(inst, parse_method(run_method_name), p, {run_solve.impute_test, 1});
      emit(run_output, to_json(rec), to_csv({rec}));
    } else if (*cv) {
      const Instance inst = cv_spec.load();
      const auto [l1max, l2max] = lambda_max(training_data(inst));
      const auto grid1 = grid_or_default(cv_grid1, cv_relative, default_lambda1_grid(), l1max);
      const auto grid2 = grid_or_default(cv_grid2, cv_relative, default_lambda2_grid(), l2max);
      const CvResult result = cross_validate(inst, parse_method(cv_method_name), grid1, grid2,
                                             cv_solve.params(), {cv_solve.impute_test, 1});
      std::vector<RunRecord> records;
      for (const auto& pt : result.curve) records.push_back(pt.record);
      emit(cv_output, to_json(result), to_csv(records));
    } else if (*bench) {
      BenchConfig cfg;
      for (const auto& s : bench_sizes) {
        const auto x = s.find('x');
        if (x == std::string::npos) throw InvalidArgument("bad size '" + s + "', expected MxN");
        cfg.sizes.emplace_back(std::stol(s.substr(0, x)), std::stol(s.substr(x + 1)));
      }
      if (cfg.sizes.empty()) cfg.sizes = default_sizes();
      cfg.seeds = bench_seeds.empty() ? default_seeds(bench_num_seeds) : bench_seeds;
      for (const auto& m : bench_methods) cfg.methods.push_back(parse_method(m));
      cfg.rank = bench_spec.rank;
      cfg.sparsity = bench_spec.sparsity;
      cfg.alpha_obs = bench_spec.alpha_obs;
      cfg.noise_sigma = bench_spec.noise_sigma;
      if (!bench_grid1.empty()) cfg.lambda1_grid = {bench_grid1, bench_relative};
      if (!bench_grid2.empty()) cfg.lambda2_grid = {bench_grid2, bench_relative};
      cfg.params = bench_solve.params();
      cfg.impute_test = bench_solve.impute_test;
      cfg.workers = bench_workers;
      const BenchmarkReport report = run_benchmark(cfg);
      emit(bench_output, to_json(report), to_csv(report.records));
      bool any_ok = false;
      for (const auto& r : report.records) any_ok = any_ok || r.error.empty();
      if (!any_ok) {
        std::cerr << "error: every run failed\n";
        return kExitAllFailed;
      }
    } else if (*diag) {
      const Instance inst = diag_spec.load();
      CompletionConfig cfg = CompletionConfig::accurate(diag_lambda1);
      cfg.max_iters = diag_iters;
      cfg.keep_iterates = true;
      audit.seed = inst.spec.seed;
      const CompletionResult si = soft_impute(inst.masked, cfg);
      const AuditReport report = run_bound_audit(inst, si.iterates, audit);
      const std::string text = to_json(report).dump(2) + "\n";
      if (diag_out.empty()) {
        std::cout << text;
      } else {
        write_text(diag_out, text);
      }
    }
  } catch (const AllFailedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& pt : e.points()) {
      std::cerr << "  lambda1=" << pt.lambda1 << " lambda2=" << pt.lambda2 << ": "
                << pt.record.error << "\n";
    }
    return kExitAllFailed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
