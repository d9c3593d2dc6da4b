// ncx — scenario runner and acceptance-suite checker for noncommutative
// ergodic optimization on finite-dimensional C*-dynamical systems.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ncx/acceptance.hpp"
#include "ncx/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"noncommutative ergodic optimization toolkit"};
  app.require_subcommand(1);

  // ncx run
  auto* run_cmd = app.add_subcommand("run", "execute a scenario file");
  std::string scenario_path, out_path, format = "text";
  long k_max = -1;
  double tol = -1;
  long long seed = -1;
  bool parallel = false;
  run_cmd->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  run_cmd->add_option("--k-max", k_max, "override schedule depth");
  run_cmd->add_option("--tol", tol, "override convergence tolerance");
  run_cmd->add_option("--seed", seed, "override the randomization seed");
  run_cmd->add_option("--out", out_path, "write the report to a file");
  run_cmd->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "text"}));
  run_cmd->add_flag("--parallel", parallel, "run independent tasks in parallel");

  // ncx check
  auto* check_cmd = app.add_subcommand("check", "run an acceptance suite");
  std::string suite = "all";
  check_cmd->add_option("--suite", suite, "suite to run")
      ->check(CLI::IsMember({"gauge-oracle", "jordan", "quotient", "uergodic",
                             "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ncx::Scenario sc = ncx::load_scenario(scenario_path);
      ncx::RunOptions opts;
      if (k_max >= 0) opts.k_max = k_max;
      if (tol >= 0) opts.tol = tol;
      if (seed >= 0) opts.seed = static_cast<unsigned long long>(seed);
      opts.parallel = parallel;
      ncx::Report rep = ncx::run(sc, opts);
      std::string body =
          format == "json" ? rep.json.dump(2) + "\n" : rep.text();
      if (out_path.empty()) {
        std::cout << body;
      } else {
        std::ofstream out(out_path);
        if (!out) throw ncx::Error("cannot write " + out_path);
        out << body;
      }
      return rep.all_ok ? 0 : 1;
    }
    if (*check_cmd) {
      bool all_ok = true;
      for (const ncx::CriterionResult& r :
           ncx::run_acceptance_suite(suite)) {
        std::printf("[%s] criterion %d: %s — %s\n",
                    r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str());
        all_ok = all_ok && r.passed;
      }
      std::printf("%s\n", all_ok ? "all criteria passed" : "FAILURES present");
      return all_ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
