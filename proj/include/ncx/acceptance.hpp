#pragma once

// Randomized acceptance suites: each criterion is a self-contained
// pass/fail check of a core identity against an independent oracle.

#include <string>
#include <vector>

#include "ncx/gauge.hpp"

namespace ncx {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // worst-case numbers observed
};

/// Suites: "gauge-oracle" (criterion 1), "jordan" (3), "quotient" (4),
/// "uergodic" (5, 6), "all" (1–9).
std::vector<CriterionResult> run_acceptance_suite(const std::string& suite,
                                                  unsigned long long seed = 2026);

CriterionResult criterion_gauge_oracle(unsigned long long seed);
CriterionResult criterion_orbit_oracle(unsigned long long seed);
CriterionResult criterion_jordan(unsigned long long seed);
CriterionResult criterion_quotient(unsigned long long seed);
CriterionResult criterion_unique_ergodicity(unsigned long long seed);
CriterionResult criterion_model_bidirectional(unsigned long long seed);
CriterionResult criterion_krylov_bogolyubov(unsigned long long seed);
CriterionResult criterion_exposing(unsigned long long seed);
CriterionResult criterion_projector_crosscheck(unsigned long long seed);

}  // namespace ncx
