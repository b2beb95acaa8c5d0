// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line each. Exit status is 0 when the set of failing criteria
// equals the --expect-fail set.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mglue/analytic.hpp"
#include "mglue/experiments.hpp"

using namespace mglue;

namespace {

struct Criterion {
  int id;
  std::string experiment;
  double budget_s;  // wall-clock budget of the whole experiment
  std::string what;
};

const std::vector<Criterion> criteria{
    {1, "dimension-formula", 1.0, "dimension formula value"},
    {2, "fi-iterate", 1.0, "f_i recursion against the closed form"},
    {3, "fi-closed-form", 1.0, "hand-derived intermediates"},
    {4, "gamma-optimum", 1.0, "gamma-bar optimality"},
    {5, "dimension-surface", 1.0, "dimension surface properties"},
    {6, "coupling", 10.0, "marked-point coupling identity"},
    {7, "urn", 30.0, "urn martingale and moment bound"},
    {8, "monotone", 10.0, "monotone coupling"},
    {9, "net-fragment", 30.0, "nets and fragments"},
    {10, "scaling", 600.0, "scaling regressions"},
    {11, "leaf-measure", 600.0, "leaf-measure suite"},
    {12, "box-count", 60.0, "estimator calibration"},
    {13, "determinism", 60.0, "thread-count determinism"},
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = "acceptance_out";
  std::vector<int> expect_fail, only;
  app.add_option("--out", out);
  app.add_option("--expect-fail", expect_fail);
  app.add_option("--only", only);
  CLI11_PARSE(app, argc, argv);

  std::set<int> failed;
  const std::set<int> chosen(only.begin(), only.end());
  for (const auto& c : criteria) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    ExperimentConfig cfg = defaults_for(c.experiment);
    cfg.out = (std::filesystem::path(out) / c.experiment).string();
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    try {
      const ExperimentResult r = run_experiment(cfg);
      std::size_t bad = 0;
      for (const auto& row : r.rows)
        if (!row.pass) {
          if (bad++ == 0) detail = " first failure: " + row.key;
        }
      ok = bad == 0;
      if (bad) detail += " (" + std::to_string(bad) + " rows)";
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string(" error: ") + e.what();
    }
    const double dt = seconds_since(t0);
    if (dt > c.budget_s) {
      ok = false;
      detail += " over budget";
    }
    if (c.id == 1) {
      // the formula itself has a 1 ms budget
      const auto t1 = std::chrono::steady_clock::now();
      volatile double v = 0;
      for (int i = 0; i < 1000; ++i) v = v + dim_formula({0.6, 1.5, 1.0});
      const double per_call = seconds_since(t1) / 1000;
      if (per_call > 1e-3) {
        ok = false;
        detail += " dim_formula over 1 ms";
      }
    }
    std::printf("%s criterion %d: %s (%.2fs, budget %.0fs)%s\n", ok ? "PASS" : "FAIL", c.id,
                c.what.c_str(), dt, c.budget_s, detail.c_str());
    std::fflush(stdout);
    if (!ok) failed.insert(c.id);
  }
  std::set<int> expected;
  for (int id : expect_fail)
    if (chosen.empty() || chosen.count(id)) expected.insert(id);
  for (int id : expected)
    if (!failed.count(id)) std::printf("note: criterion %d was expected to fail but passed\n", id);
  for (int id : failed)
    if (!expected.count(id)) std::printf("note: criterion %d failed unexpectedly\n", id);
  return failed == expected ? 0 : 1;
}
