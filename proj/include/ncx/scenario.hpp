#pragma once

// Scenario-file driven batch runner: JSON scenarios describing one system
// plus a task list, executed fail-soft into machine- and human-readable
// reports.

#include <optional>
#include <string>

#include "json.hpp"
#include "ncx/gauge.hpp"
#include "ncx/systems.hpp"

namespace ncx {

using Json = nlohmann::ordered_json;

struct Scenario {
  GroupAction action;
  FolnerSchedule schedule;
  std::vector<Json> tasks;
  long k_max = 100000;
  double tol = 1e-6;
  double opt_tol = 1e-8;
  unsigned long long seed = 12345;
};

/// Parse and fully validate a scenario document. Errors carry the JSON
/// path of the offending field.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Named example systems:
///   cyclic_shift {"n"}, permutation {"perm"}, ad_unitary {"n","u"},
///   pauli_z2z2 {}, block_swap {"n"}, identity {"n"},
///   lattice_product {"first","second"} (nested builtin specs).
GroupAction builtin_system(const std::string& name, const Json& params);

struct RunOptions {
  std::optional<long> k_max;
  std::optional<double> tol;
  std::optional<unsigned long long> seed;
  bool parallel = false;
};

struct Report {
  Json json;
  bool all_ok = true;

  /// Fixed-layout summary table.
  std::string text() const;
};

/// Execute the tasks in order (or in parallel when requested). Per-task
/// errors are captured into the report without aborting later tasks;
/// ConsistencyError aborts the run with a falsification notice.
Report run(const Scenario& scenario, const RunOptions& opts = {});

// ---- serialization helpers (shared with the CLI and tests) -----------------

/// Complex scalar as [re, im]; matrices as row-major nested arrays.
Mat parse_matrix(const Json& j, const std::string& path);
Json matrix_json(const Mat& m);
Element parse_element(const Algebra& alg, const Json& j,
                      const std::string& path);
Json element_json(const Element& x);

}  // namespace ncx
