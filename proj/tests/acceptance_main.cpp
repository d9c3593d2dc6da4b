// Acceptance gate: runs every criterion and prints one pass/fail line each.

#include <cstdio>

#include "ncx/acceptance.hpp"

int main() {
  bool all_ok = true;
  for (const ncx::CriterionResult& r : ncx::run_acceptance_suite("all")) {
    std::printf("[%s] criterion %d: %s — %s\n", r.passed ? "PASS" : "FAIL",
                r.id, r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && r.passed;
  }
  std::printf("%s\n", all_ok ? "ACCEPTANCE: all criteria passed"
                             : "ACCEPTANCE: FAILURES present");
  return all_ok ? 0 : 1;
}
