#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "ncx/scenario.hpp"

using namespace ncx;

namespace {

Report run_text(const std::string& text, RunOptions opts = {}) {
  return run(parse_scenario(text), opts);
}

}  // namespace

TEST_CASE("minimal builtin scenario: gauge of the cyclic shift") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
    "tasks": [{"type": "gauge",
               "a": {"blocks": [[[[3,0]]], [[[1,0]]], [[[2,0]]]]},
               "k_max": 3000, "tol": 1e-12}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  const Json& r = rep.json["tasks"][0]["result"];
  CHECK(r["estimate"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r["oracle_gap"].get<double>() < 1e-9);
}

TEST_CASE("explicit action: non-unitary generator rejected with its index") {
  const char* doc = R"({
    "algebra": {"blocks": [2]},
    "action": {"group": {"type": "Z"},
               "generators": [{"unitaries": [[[[1,0],[0,0]],[[0,0],[2,0]]]]}]},
    "tasks": [{"type": "strict_ergodicity"}]
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(doc),
                       doctest::Contains("generators[0]"), Error);
}

TEST_CASE("explicit lattice action: non-commuting generators are rejected") {
  // Ad(X) and Ad(diag(1,i)) do not commute as maps.
  const char* doc = R"({
    "algebra": {"blocks": [2]},
    "action": {"group": {"type": "Z^d", "params": {"d": 2}},
               "generators": [
                 {"unitaries": [[[[0,0],[1,0]],[[1,0],[0,0]]]]},
                 {"unitaries": [[[[1,0],[0,0]],[[0,0],[0,1]]]]}]},
    "tasks": [{"type": "strict_ergodicity"}]
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("residual"),
                       Error);
}

TEST_CASE("pauli scenario: unique ergodicity plus gauge oracle") {
  const char* doc = R"({
    "action": {"builtin": "pauli_z2z2"},
    "tasks": [{"type": "unique_ergodicity"},
              {"type": "gauge",
               "a": {"blocks": [[[[0.5,0],[0.1,0]],[[0.1,0],[0.7,0]]]]}}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  CHECK(rep.json["tasks"][0]["result"]["unique"].get<bool>());
  // Γ = tr(a)/2 = 0.6 exactly at k = 1 on the full-group schedule.
  CHECK(rep.json["tasks"][1]["result"]["estimate"].get<double>() ==
        doctest::Approx(0.6).epsilon(1e-10));
  CHECK(rep.json["tasks"][1]["result"]["k_used"].get<long>() == 1);
}

TEST_CASE("subadditivity task on the cyclic shift passes") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
    "tasks": [{"type": "subadditivity_check",
               "a": {"blocks": [[[[3,0]]], [[[1,0]]], [[[2,0]]]]},
               "k_max": 12}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  CHECK(rep.json["tasks"][0]["result"]["ok"].get<bool>());
}

TEST_CASE("fail-soft: an infeasible task fails, later tasks still run") {
  // Annihilating the unit is infeasible; the SG task after it must still run.
  const char* doc = R"({
    "action": {"builtin": "permutation", "params": {"perm": [1, 0, 3, 2]}},
    "tasks": [
      {"type": "m_max",
       "a": {"blocks": [[[[1,0]]], [[[0,0]]], [[[0.2,0]]], [[[0.4,0]]]]},
       "body": {"type": "AnnSet",
                "elements": [{"blocks": [[[[1,0]]], [[[1,0]]], [[[1,0]]], [[[1,0]]]]}]}},
      {"type": "m_max",
       "a": {"blocks": [[[[1,0]]], [[[0,0]]], [[[0.2,0]]], [[[0.4,0]]]]},
       "body": {"type": "SG"}}]
  })";
  Report rep = run_text(doc);
  CHECK_FALSE(rep.all_ok);
  CHECK_FALSE(rep.json["tasks"][0]["ok"].get<bool>());
  CHECK(rep.json["tasks"][1]["ok"].get<bool>());
  CHECK(rep.json["tasks"][1]["result"]["value"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-8));
  CHECK(rep.json["summary"]["passed"].get<long>() == 1);
  CHECK(rep.json["summary"]["failed"].get<long>() == 1);
}

TEST_CASE("determinism: identical scenario and seed give identical reports") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 4}},
    "seed": 99,
    "tasks": [
      {"type": "m_max", "a": "random_hermitian", "body": {"type": "SG"}},
      {"type": "kb", "k": 16, "seed_state": "random"},
      {"type": "unique_ergodicity"}]
  })";
  Report a = run_text(doc);
  Report b = run_text(doc);
  CHECK(a.json.dump() == b.json.dump());
  // And the parallel path agrees with the serial one.
  RunOptions par;
  par.parallel = true;
  Report c = run_text(doc, par);
  CHECK(a.json["tasks"].dump() == c.json["tasks"].dump());
}

TEST_CASE("option overrides land in the environment stamp") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
    "tolerances": {"k_max": 50, "tol": 0.001},
    "seed": 7,
    "tasks": [{"type": "strict_ergodicity"}]
  })";
  RunOptions opts;
  opts.k_max = 123;
  opts.seed = 11;
  Report rep = run(parse_scenario(doc), opts);
  CHECK(rep.json["environment"]["k_max"].get<long>() == 123);
  CHECK(rep.json["environment"]["seed"].get<long>() == 11);
  CHECK(rep.json["environment"]["tol"].get<double>() ==
        doctest::Approx(0.001));
}

TEST_CASE("unknown builtin and unknown task type are rejected") {
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({"action": {"builtin": "nope"}, "tasks": []})"),
      doctest::Contains("nope"), Error);
  CHECK_THROWS_WITH_AS(
      parse_scenario(R"({
        "action": {"builtin": "cyclic_shift", "params": {"n": 2}},
        "tasks": [{"type": "frobnicate"}]})"),
      doctest::Contains("frobnicate"), Error);
}

TEST_CASE("quotient check task") {
  const char* doc = R"({
    "action": {"builtin": "permutation", "params": {"perm": [1, 0, 3, 2]}},
    "tasks": [{"type": "quotient_check", "kernel_blocks": [2, 3],
               "a": {"blocks": [[[[1,0]]], [[[0,0]]], [[[0.2,0]]], [[[0.4,0]]]]}}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  const Json& r = rep.json["tasks"][0]["result"];
  CHECK(r["quotient_value"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r["gap"].get<double>() < 1e-8);
}

TEST_CASE("model_check task: builtin ambient with kernel embedding") {
  const char* doc = R"({
    "action": {"builtin": "permutation", "params": {"perm": [1, 0, 3, 2]}},
    "tasks": [{"type": "model_check",
               "ambient": {"action": {"builtin": "permutation",
                                      "params": {"perm": [1, 0]}}},
               "embedding": [0, 1, null, null],
               "rho": {"blocks": [[[[0.5,0]]], [[[0.5,0]]]]},
               "elements": [
                 {"blocks": [[[[1,0]]], [[[0,0]]], [[[0.2,0]]], [[[0.4,0]]]]}]}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  const Json& r = rep.json["tasks"][0]["result"];
  CHECK_FALSE(r["faithful"].get<bool>());
  CHECK(r["cor38_ok"].get<bool>());
  CHECK(r["rows"][0]["gauge"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("folner_defect task reports the 1/k decay") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
    "tasks": [{"type": "folner_defect", "k": [10]}]
  })";
  Report rep = run_text(doc);
  CHECK(rep.all_ok);
  const Json& row = rep.json["tasks"][0]["result"]["rows"][0];
  CHECK(row["max_defect"].get<double>() == doctest::Approx(0.2));
}

TEST_CASE("text report: one line per task plus the pass count") {
  const char* doc = R"({
    "action": {"builtin": "cyclic_shift", "params": {"n": 3}},
    "tasks": [{"type": "strict_ergodicity"},
              {"type": "unique_ergodicity"}]
  })";
  Report rep = run_text(doc);
  std::string text = rep.text();
  CHECK(text.find("strict_ergodicity") != std::string::npos);
  CHECK(text.find("unique_ergodicity") != std::string::npos);
  CHECK(text.find("2/2 passed") != std::string::npos);
  CHECK(text.find("FAIL") == std::string::npos);
}

TEST_CASE("example scenario files parse and pass") {
  for (const char* path : {"scenarios/cyclic_gauge.json",
                           "scenarios/pauli_model.json"}) {
    Scenario sc = load_scenario(path);
    Report rep = run(sc);
    CHECK(rep.all_ok);
  }
}
