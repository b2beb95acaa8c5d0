#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mglue/csv.hpp"
#include "mglue/errors.hpp"
#include "mglue/experiments.hpp"
#include "mglue/parallel.hpp"

using namespace mglue;

namespace {

std::string names_line() {
  std::string s;
  for (const auto& n : experiment_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random gluing of power-law weighted metric blocks: experiments and checks"};
  std::string experiment;
  std::string config_file;
  bool list = false;
  app.add_option("experiment", experiment, "one of: " + names_line());
  app.add_option("--config", config_file, "flat key=value file");
  app.add_flag("--list", list, "list experiments and config keys");
  std::map<std::string, std::string> overrides;
  for (const auto& key : ExperimentConfig::keys()) {
    if (key == "experiment") continue;
    app.add_option("--" + key, overrides[key]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (list) {
    std::cout << "experiments: " << names_line() << "\nkeys:";
    for (const auto& k : ExperimentConfig::keys()) std::cout << ' ' << k;
    std::cout << '\n';
    return 0;
  }
  try {
    if (experiment.empty()) throw ParameterError("missing experiment name");
    ExperimentConfig cfg = defaults_for(experiment);
    if (const char* env = std::getenv("METRIC_GLUE_OUT")) cfg.out = env;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& [k, v] : overrides)
      if (app.count("--" + k)) cfg.set(k, v);
    cfg.experiment = experiment;
    set_threads(cfg.threads);
    const ExperimentResult r = run_experiment(cfg);
    for (const auto& row : r.rows) {
      std::cout << (row.pass ? "PASS " : "FAIL ") << row.key << " value=" << fmt(row.value);
      if (row.relation != Relation::info)
        std::cout << " target=" << fmt(row.target) << " tol=" << fmt(row.tolerance) << " (" << to_string(row.relation) << ")";
      if (!row.metadata.empty()) std::cout << " [" << row.metadata << "]";
      std::cout << '\n';
    }
    for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
    return r.passed() ? 0 : 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
