#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lrsparse/synth.hpp"

namespace lrsparse {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatName = "lrsparse-instance";
constexpr int kFormatVersion = 1;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, bool skip_header) {
  auto in = open_in(p);
  std::vector<std::vector<double>> rows;
  std::string line;
  if (skip_header) std::getline(in, line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidInput(p.string() + ": unparsable cell '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

DenseMatrix to_matrix(const std::vector<std::vector<double>>& rows, Index m, Index n,
                      const fs::path& p) {
  if (static_cast<Index>(rows.size()) != m) {
    throw InvalidInput(p.string() + ": expected " + std::to_string(m) + " rows");
  }
  DenseMatrix out(m, n);
  for (Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n) {
      throw InvalidInput(p.string() + ": row " + std::to_string(i) + " has wrong width");
    }
    for (Index j = 0; j < n; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

void write_column(const fs::path& p, const char* name, const Vector& v) {
  auto out = open_out(p);
  out << name << '\n';
  for (Index i = 0; i < v.size(); ++i) out << v(i) << '\n';
}

}  // namespace

void write_instance(const Instance& inst, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& spec = inst.spec;
  nlohmann::json header = {
      {"format", kFormatName},      {"version", kFormatVersion},
      {"m", spec.m},                {"n", spec.n},
      {"rank", spec.r},             {"sparsity", spec.s},
      {"alpha_obs", spec.alpha_obs}, {"noise_sigma", spec.noise_sigma},
      {"seed", spec.seed},          {"train_rows", inst.train_rows},
      {"test_rows", inst.test_rows},
  };
  open_out(dir / "header.json") << header.dump(2) << '\n';

  {
    auto out = open_out(dir / "x_true.csv");
    for (Index i = 0; i < inst.x_true.rows(); ++i) {
      for (Index j = 0; j < inst.x_true.cols(); ++j) {
        if (j) out << ',';
        out << inst.x_true(i, j);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "mask.csv");
    const Mask& obs = inst.masked.observed();
    for (Index i = 0; i < obs.rows(); ++i) {
      for (Index j = 0; j < obs.cols(); ++j) {
        if (j) out << ',';
        out << (obs(i, j) ? '1' : '0');
      }
      out << '\n';
    }
  }
  write_column(dir / "beta.csv", "beta", inst.beta_true.entries);
  write_column(dir / "y.csv", "y", inst.y);
}

Instance read_instance(const fs::path& dir) {
  nlohmann::json header;
  {
    auto in = open_in(dir / "header.json");
    try {
      in >> header;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("header.json: " + std::string(e.what()));
    }
  }
  if (header.value("format", std::string{}) != kFormatName) {
    throw InvalidInput("header.json: not an lrsparse instance");
  }

  Instance inst;
  auto& spec = inst.spec;
  try {
    spec.m = header.at("m").get<Index>();
    spec.n = header.at("n").get<Index>();
    spec.r = header.at("rank").get<Index>();
    spec.s = header.at("sparsity").get<Index>();
    spec.alpha_obs = header.at("alpha_obs").get<double>();
    spec.noise_sigma = header.at("noise_sigma").get<double>();
    spec.seed = header.at("seed").get<std::uint64_t>();
    inst.train_rows = header.at("train_rows").get<IndexSet>();
    inst.test_rows = header.at("test_rows").get<IndexSet>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("header.json: " + std::string(e.what()));
  }
  spec.validate();

  inst.x_true = to_matrix(read_csv(dir / "x_true.csv", false), spec.m, spec.n, dir / "x_true.csv");
  const DenseMatrix mask_values =
      to_matrix(read_csv(dir / "mask.csv", false), spec.m, spec.n, dir / "mask.csv");
  Mask observed = mask_values.array() != 0.0;
  inst.masked = MaskedMatrix(inst.x_true, std::move(observed));

  const DenseMatrix beta = to_matrix(read_csv(dir / "beta.csv", true), spec.n, 1, dir / "beta.csv");
  inst.beta_true = SparseVector{beta.col(0), kDefaultZeroTol};
  const DenseMatrix y = to_matrix(read_csv(dir / "y.csv", true), spec.m, 1, dir / "y.csv");
  inst.y = y.col(0);

  IndexSet all = inst.train_rows;
  all.insert(all.end(), inst.test_rows.begin(), inst.test_rows.end());
  std::sort(all.begin(), all.end());
  for (Index i = 0; i < spec.m; ++i) {
    if (static_cast<Index>(all.size()) != spec.m || all[static_cast<std::size_t>(i)] != i) {
      throw InvalidInput("header.json: train/test rows must partition 0..m-1");
    }
  }
  return inst;
}

}  // namespace lrsparse
