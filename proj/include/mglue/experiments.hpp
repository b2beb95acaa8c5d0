#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mglue/blocks.hpp"

namespace mglue {

/// Flat experiment configuration. Every field has a default; set() rejects
/// unknown keys and malformed values with ParameterError.
struct ExperimentConfig {
  std::string experiment;
  double alpha = 0.5;
  double beta = 2.0;
  double d = 1.0;
  BlockKind block = BlockKind::circle;
  std::size_t k = 3;
  bool random_arms = false;
  std::size_t n_max = 1000;
  std::size_t replicas = 20;
  std::uint64_t seed = 1;
  std::string out = ".";
  double tolerance = -1;  // < 0: the experiment's own tolerance
  int threads = 0;        // 0: OpenMP default
  std::size_t i = 2;
  double s = 1.5;
  double epsilon = 0.02;
  double gamma = 3.0;
  double eta = 0.5;
  std::size_t n0 = 10;
  std::size_t k_max = 2;
  std::size_t n_factor = 16;
  double r_lo = 1e-3;
  double r_hi = 1e-1;
  std::size_t r_count = 12;
  std::size_t samples = 10000;
  double theta = 0.5;
  std::size_t horizon = 10000;
  double C = 4.0;

  void set(const std::string& key, const std::string& value);
  /// key=value lines; '#' starts a comment.
  void load_file(const std::string& path);
  std::vector<std::pair<std::string, std::string>> entries() const;
  static const std::vector<std::string>& keys();
  double tol(double fallback) const { return tolerance >= 0 ? tolerance : fallback; }
};

/// Defaults of a named experiment (its acceptance settings).
ExperimentConfig defaults_for(const std::string& experiment);

enum class Relation { abs, le, ge, info };
std::string to_string(Relation r);

/// One checked quantity. pass follows from value, target, tolerance and
/// relation: abs |v - t| <= tol, le v <= t + tol, ge v >= t - tol; info
/// rows are diagnostics and always pass.
struct ResultRow {
  std::string experiment;
  long long replica = -1;  // -1 for aggregates
  std::string key;
  double value = 0;
  double target = 0;
  double tolerance = 0;
  Relation relation = Relation::info;
  bool pass = true;
  std::string metadata;
};

bool evaluate(Relation rel, double value, double target, double tol);

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::vector<std::string> files;
  bool passed() const;
};

const std::vector<std::string>& experiment_names();

/// Runs the named experiment, writes its CSVs (and SVG for layout) into
/// cfg.out plus <experiment>_results.csv.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace mglue
