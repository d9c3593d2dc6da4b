#include "ncx/scenario.hpp"

#include <fstream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ncx/optimize.hpp"

namespace ncx {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(path + ": " + msg);
}

const Json& field(const Json& j, const std::string& key,
                  const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path, "missing required field \"" + key + "\"");
  return *it;
}

long as_long(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> as_int_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(static_cast<int>(
        as_long(j[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

Complex parse_complex(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(path, "expected a complex scalar as [re, im]");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

GroupWord parse_word(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a word as an array of [gen, exp]");
  GroupWord w;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const Json& l = j[i];
    if (!l.is_array() || l.size() != 2)
      fail(p, "expected a letter as [generator, exponent]");
    Letter letter;
    letter.generator = static_cast<int>(as_long(l[0], p + "[0]"));
    letter.exponent = static_cast<int>(as_long(l[1], p + "[1]"));
    if (letter.exponent != 1 && letter.exponent != -1)
      fail(p + "[1]", "letter exponent must be ±1");
    w.push_back(letter);
  }
  return w;
}

FiniteGroupTable parse_finite_table(const Json& params,
                                    const std::string& path) {
  if (params.contains("name")) {
    std::string name = as_string(params["name"], path + ".name");
    if (name == "cyclic")
      return cyclic_group_table(
          static_cast<int>(as_long(field(params, "n", path), path + ".n")));
    if (name == "dihedral")
      return dihedral_group_table(
          static_cast<int>(as_long(field(params, "n", path), path + ".n")));
    if (name == "product")
      return product_group_table(
          parse_finite_table(field(params, "first", path), path + ".first"),
          parse_finite_table(field(params, "second", path), path + ".second"));
    fail(path + ".name", "unknown group table \"" + name + "\"");
  }
  std::vector<std::string> labels;
  const Json& jt = field(params, "table", path);
  if (!jt.is_array()) fail(path + ".table", "expected a multiplication table");
  std::vector<std::vector<int>> mul;
  for (size_t i = 0; i < jt.size(); ++i)
    mul.push_back(as_int_list(jt[i], path + ".table[" + std::to_string(i) + "]"));
  if (params.contains("labels")) {
    for (const auto& l : params["labels"])
      labels.push_back(as_string(l, path + ".labels"));
  } else {
    for (size_t i = 0; i < mul.size(); ++i)
      labels.push_back("g" + std::to_string(i));
  }
  try {
    return FiniteGroupTable(std::move(labels), std::move(mul));
  } catch (const Error& e) {
    fail(path + ".table", e.what());
  }
}

GroupSpec parse_group(const Json& j, const std::string& path) {
  std::string type = as_string(field(j, "type", path), path + ".type");
  Json params = j.value("params", Json::object());
  if (type == "Z") return GroupSpec::integers();
  if (type == "Z^d")
    return GroupSpec::lattice(
        static_cast<int>(as_long(field(params, "d", path + ".params"),
                                 path + ".params.d")));
  if (type == "finite")
    return GroupSpec::finite(parse_finite_table(params, path + ".params"));
  if (type == "free") {
    std::vector<std::string> gens;
    const Json& g = field(params, "generators", path + ".params");
    if (!g.is_array()) fail(path + ".params.generators", "expected an array");
    for (const auto& s : g)
      gens.push_back(as_string(s, path + ".params.generators"));
    return GroupSpec::free_words(std::move(gens));
  }
  fail(path + ".type", "unknown group type \"" + type + "\"");
}

Automorphism parse_automorphism(const Algebra& alg, const Json& j,
                                const std::string& path) {
  if (!j.is_object()) fail(path, "expected {\"perm\":..., \"unitaries\":...}");
  std::vector<int> perm;
  if (j.contains("perm")) {
    perm = as_int_list(j["perm"], path + ".perm");
  } else {
    perm.resize(static_cast<size_t>(alg.num_blocks()));
    for (int i = 0; i < alg.num_blocks(); ++i) perm[static_cast<size_t>(i)] = i;
  }
  std::vector<Mat> u;
  if (j.contains("unitaries")) {
    const Json& ju = j["unitaries"];
    if (!ju.is_array()) fail(path + ".unitaries", "expected an array");
    for (size_t i = 0; i < ju.size(); ++i)
      u.push_back(parse_matrix(ju[i],
                               path + ".unitaries[" + std::to_string(i) + "]"));
  } else {
    for (int n : alg.block_dims) u.push_back(Mat::Identity(n, n));
  }
  try {
    return Automorphism(alg, std::move(perm), std::move(u));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

FolnerSchedule parse_schedule(const Json& j, const GroupSpec& group,
                              const std::string& path) {
  if (j.is_null()) return default_schedule(group);
  Side side = Side::Right;
  if (j.contains("side")) {
    std::string s = as_string(j["side"], path + ".side");
    if (s == "left")
      side = Side::Left;
    else if (s == "right")
      side = Side::Right;
    else
      fail(path + ".side", "expected \"left\" or \"right\"");
  }
  std::string kind = j.contains("kind")
                         ? as_string(j["kind"], path + ".kind")
                         : std::string();
  if (kind.empty()) {
    FolnerSchedule d = default_schedule(group, side);
    return d;
  }
  if (kind == "interval") return FolnerSchedule::interval(side);
  if (kind == "box") return FolnerSchedule::box(side);
  if (kind == "full") return FolnerSchedule::full_group(side);
  if (kind == "explicit") {
    const Json& js = field(j, "sets", path);
    if (!js.is_array() || js.empty())
      fail(path + ".sets", "expected a nonempty array of word sets");
    std::vector<std::vector<GroupWord>> sets;
    for (size_t i = 0; i < js.size(); ++i) {
      const std::string p = path + ".sets[" + std::to_string(i) + "]";
      if (!js[i].is_array() || js[i].empty())
        fail(p, "expected a nonempty array of words");
      std::vector<GroupWord> F;
      for (size_t w = 0; w < js[i].size(); ++w)
        F.push_back(parse_word(js[i][w], p + "[" + std::to_string(w) + "]"));
      sets.push_back(std::move(F));
    }
    return FolnerSchedule::explicit_sets_of(std::move(sets), side);
  }
  fail(path + ".kind", "unknown schedule kind \"" + kind + "\"");
}

GroupAction parse_action(const Json& j, const std::optional<Algebra>& declared,
                         const std::string& path) {
  if (!j.is_object()) fail(path, "expected an action object");
  if (j.contains("builtin")) {
    GroupAction act = builtin_system(
        as_string(j["builtin"], path + ".builtin"),
        j.value("params", Json::object()));
    if (declared && declared->block_dims != act.algebra.block_dims)
      fail(path, "declared algebra blocks do not match the builtin system");
    return act;
  }
  if (!declared)
    fail(path, "explicit actions require a top-level \"algebra\" object");
  GroupSpec group = parse_group(field(j, "group", path), path + ".group");
  const Json& jg = field(j, "generators", path);
  if (!jg.is_array()) fail(path + ".generators", "expected an array");
  std::vector<Automorphism> gens;
  for (size_t i = 0; i < jg.size(); ++i)
    gens.push_back(parse_automorphism(
        *declared, jg[i], path + ".generators[" + std::to_string(i) + "]"));
  try {
    return GroupAction(std::move(group), *declared, std::move(gens));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

}  // namespace

Mat parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty matrix");
  size_t rows = j.size();
  size_t cols = 0;
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array())
      fail(path + "[" + std::to_string(r) + "]", "expected a matrix row");
    if (r == 0)
      cols = j[r].size();
    else if (j[r].size() != cols)
      fail(path + "[" + std::to_string(r) + "]", "ragged matrix rows");
  }
  if (cols == 0) fail(path, "expected a nonempty matrix");
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_complex(j[r][c], path + "[" + std::to_string(r) + "][" +
                                     std::to_string(c) + "]");
  return m;
}

Json matrix_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Element parse_element(const Algebra& alg, const Json& j,
                      const std::string& path) {
  const Json* blocks = &j;
  std::string p = path;
  if (j.is_object()) {
    blocks = &field(j, "blocks", path);
    p = path + ".blocks";
  }
  if (!blocks->is_array()) fail(p, "expected an array of matrix blocks");
  if (static_cast<int>(blocks->size()) != alg.num_blocks())
    fail(p, "expected " + std::to_string(alg.num_blocks()) +
                " blocks, got " + std::to_string(blocks->size()));
  std::vector<Mat> mats;
  for (size_t i = 0; i < blocks->size(); ++i) {
    Mat m = parse_matrix((*blocks)[i], p + "[" + std::to_string(i) + "]");
    int n = alg.block_dims[i];
    if (m.rows() != n || m.cols() != n)
      fail(p + "[" + std::to_string(i) + "]",
           "block must be " + std::to_string(n) + "x" + std::to_string(n));
    mats.push_back(std::move(m));
  }
  return Element(alg, std::move(mats));
}

Json element_json(const Element& x) {
  Json blocks = Json::array();
  for (const Mat& m : x.blocks()) blocks.push_back(matrix_json(m));
  return Json{{"blocks", std::move(blocks)}};
}

GroupAction builtin_system(const std::string& name, const Json& params) {
  const std::string path = "action.params";
  if (name == "cyclic_shift")
    return cyclic_shift_system(
        static_cast<int>(as_long(field(params, "n", path), path + ".n")));
  if (name == "permutation")
    return permutation_system(
        as_int_list(field(params, "perm", path), path + ".perm"));
  if (name == "ad_unitary") {
    int n = static_cast<int>(as_long(field(params, "n", path), path + ".n"));
    Mat u = parse_matrix(field(params, "u", path), path + ".u");
    if (u.rows() != n || u.cols() != n)
      fail(path + ".u", "expected an " + std::to_string(n) + "x" +
                            std::to_string(n) + " unitary");
    return ad_unitary_system(n, u);
  }
  if (name == "pauli_z2z2") return pauli_z2z2_system();
  if (name == "block_swap")
    return block_swap_system(
        static_cast<int>(as_long(field(params, "n", path), path + ".n")));
  if (name == "identity")
    return identity_system(
        static_cast<int>(as_long(field(params, "n", path), path + ".n")));
  if (name == "lattice_product") {
    const Json& f = field(params, "first", path);
    const Json& s = field(params, "second", path);
    GroupAction a = parse_action(f, std::nullopt, path + ".first");
    GroupAction b = parse_action(s, std::nullopt, path + ".second");
    return lattice_product_system(a, b);
  }
  fail("action.builtin", "unknown builtin system \"" + name + "\"");
}

Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error("scenario: expected a JSON object");

  Scenario sc;
  std::optional<Algebra> declared;
  if (doc.contains("algebra")) {
    const Json& ja = doc["algebra"];
    std::vector<int> blocks =
        as_int_list(field(ja, "blocks", "algebra"), "algebra.blocks");
    try {
      declared = Algebra(blocks);
    } catch (const Error& e) {
      fail("algebra.blocks", e.what());
    }
  }
  sc.action = parse_action(field(doc, "action", "scenario"), declared, "action");
  sc.schedule = parse_schedule(doc.value("schedule", Json()), sc.action.group,
                               "schedule");
  // Exercise the schedule once so malformed explicit sets fail at parse time.
  folner_sets(sc.schedule, sc.action.group, 1);

  if (doc.contains("tolerances")) {
    const Json& jt = doc["tolerances"];
    if (!jt.is_object()) fail("tolerances", "expected an object");
    if (jt.contains("k_max")) sc.k_max = as_long(jt["k_max"], "tolerances.k_max");
    if (jt.contains("tol")) sc.tol = as_double(jt["tol"], "tolerances.tol");
    if (jt.contains("opt_tol"))
      sc.opt_tol = as_double(jt["opt_tol"], "tolerances.opt_tol");
  }
  if (doc.contains("seed"))
    sc.seed = static_cast<unsigned long long>(as_long(doc["seed"], "seed"));

  const Json& jt = field(doc, "tasks", "scenario");
  if (!jt.is_array()) fail("tasks", "expected an array");
  static const std::vector<std::string> kTaskTypes = {
      "gauge",          "m_max",
      "maximizing_face", "jordan",
      "kb",             "unique_ergodicity",
      "strict_ergodicity", "exposing_observable",
      "quotient_check", "model_check",
      "commutator_decay", "subadditivity_check",
      "folner_defect"};
  for (size_t i = 0; i < jt.size(); ++i) {
    const std::string p = "tasks[" + std::to_string(i) + "]";
    std::string type = as_string(field(jt[i], "type", p), p + ".type");
    if (std::find(kTaskTypes.begin(), kTaskTypes.end(), type) ==
        kTaskTypes.end())
      fail(p + ".type", "unknown task type \"" + type + "\"");
    sc.tasks.push_back(jt[i]);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

// ---- task execution ---------------------------------------------------------

namespace {

struct TaskContext {
  const Scenario& sc;
  long k_max;
  double tol;
  double opt_tol;
  unsigned long long seed;
  size_t index;
};

/// Element named by the task field: explicit blocks, or the seeded random
/// draws "random_hermitian" / "random_positive".
Element task_element(const TaskContext& ctx, const Json& j,
                     const std::string& path) {
  if (j.is_string()) {
    std::string kind = j.get<std::string>();
    Rng rng(ctx.seed + 0x9e3779b97f4a7c15ULL * (ctx.index + 1));
    if (kind == "random_hermitian")
      return random_hermitian(ctx.sc.action.algebra, rng);
    if (kind == "random_positive")
      return random_positive(ctx.sc.action.algebra, rng);
    fail(path, "unknown element spec \"" + kind + "\"");
  }
  return parse_element(ctx.sc.action.algebra, j, path);
}

ConvexBodySpec parse_body(const TaskContext& ctx, const Json& j,
                          const std::string& path) {
  std::string type = as_string(field(j, "type", path), path + ".type");
  if (type == "SG") return ConvexBodySpec::sg();
  if (type == "TG") return ConvexBodySpec::tg();
  if (type == "AnnIdeal")
    return ConvexBodySpec::ann_ideal(
        as_int_list(field(j, "blocks", path), path + ".blocks"));
  if (type == "AnnSet") {
    const Json& je = field(j, "elements", path);
    if (!je.is_array()) fail(path + ".elements", "expected an array");
    std::vector<Element> elems;
    for (size_t i = 0; i < je.size(); ++i)
      elems.push_back(task_element(
          ctx, je[i], path + ".elements[" + std::to_string(i) + "]"));
    return ConvexBodySpec::ann_set(std::move(elems));
  }
  if (type == "Intersection") {
    const Json& jf = field(j, "factors", path);
    if (!jf.is_array()) fail(path + ".factors", "expected an array");
    std::vector<ConvexBodySpec> parts;
    for (size_t i = 0; i < jf.size(); ++i)
      parts.push_back(parse_body(
          ctx, jf[i], path + ".factors[" + std::to_string(i) + "]"));
    return ConvexBodySpec::intersection(std::move(parts));
  }
  fail(path + ".type", "unknown convex body \"" + type + "\"");
}

State task_state(const TaskContext& ctx, const Json& j,
                 const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "normalized_trace")
    return State::normalized_trace(ctx.sc.action.algebra);
  if (j.is_string() && j.get<std::string>() == "random") {
    Rng rng(ctx.seed + 0xd1b54a32d192ed03ULL * (ctx.index + 1));
    return random_state(ctx.sc.action.algebra, rng);
  }
  Element d = task_element(ctx, j, path);
  try {
    return State(HermitianFunctional(ctx.sc.action.algebra, d.blocks()));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Json run_gauge(const TaskContext& ctx, const Json& task) {
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  GaugeOptions opts;
  opts.k_max = task.value("k_max", ctx.k_max);
  opts.tol = task.value("tol", ctx.tol);
  GaugeResult r = gauge(ctx.sc.action, ctx.sc.schedule, a, opts);
  Json out{{"estimate", r.estimate},
           {"converged", r.converged},
           {"k_used", r.k_used},
           {"k_max", opts.k_max},
           {"tolerance", opts.tol}};
  if (r.oracle_value) {
    out["oracle_value"] = *r.oracle_value;
    out["oracle_gap"] = *r.oracle_gap;
  }
  if (task.value("emit_trace", false)) {
    Json tr = Json::array();
    for (auto [k, v] : r.trace) tr.push_back(Json::array({k, v}));
    out["trace"] = std::move(tr);
  }
  return out;
}

Json run_m_max(const TaskContext& ctx, const Json& task) {
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  ConvexBodySpec body =
      parse_body(ctx, field(task, "body", "task"), "task.body");
  MaxOptions opts;
  opts.tol = task.value("tol", ctx.opt_tol);
  opts.seed = static_cast<unsigned>(ctx.seed);
  OptimizationResult r = m_max(ctx.sc.action, a, body, opts);
  Json out{{"value", r.value},
           {"method", r.method},
           {"feasible", r.feasible},
           {"invariance_defect", r.invariance_defect},
           {"constraint_defect", r.constraint_defect},
           {"pair_defect", r.pair_defect},
           {"tolerance", opts.tol}};
  if (r.upper_bound) out["upper_bound"] = *r.upper_bound;
  if (r.feasible && task.value("emit_maximizer", false))
    out["maximizer"] = element_json(r.maximizer.functional().density_element());
  if (!r.feasible) out["ok"] = false;
  return out;
}

Json run_maximizing_face(const TaskContext& ctx, const Json& task) {
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  FaceDescriptor f = maximizing_face(ctx.sc.action, a);
  return Json{{"affine_dim", f.affine_dim},
              {"projector_rank",
               static_cast<long>(std::lround(f.projector.trace().real()))},
              {"projector", element_json(f.projector)}};
}

Json run_jordan(const TaskContext& ctx, const Json& task) {
  Element d = task_element(ctx, field(task, "phi", "task"), "task.phi");
  HermitianFunctional phi(ctx.sc.action.algebra, d.blocks());
  auto [pos, neg] = jordan_decompose(phi);
  double recon_res = operator_norm(pos.density_element() -
                                   neg.density_element() -
                                   phi.density_element());
  // tr(d⁺ d⁻) = 0 iff the supports are orthogonal.
  double ortho =
      (pos.density_element() * neg.density_element()).trace().real();
  return Json{{"norm", functional_norm(phi)},
              {"positive_norm", functional_norm(pos)},
              {"negative_norm", functional_norm(neg)},
              {"reconstruction_residual", recon_res},
              {"orthogonality_residual", std::abs(ortho)},
              {"norm_additive",
               std::abs(functional_norm(phi) - functional_norm(pos) -
                        functional_norm(neg)) <= 1e-9}};
}

Json run_kb(const TaskContext& ctx, const Json& task) {
  long k = task.value("k", std::min<long>(ctx.k_max, 100));
  State seed_state =
      task.contains("seed_state")
          ? task_state(ctx, task["seed_state"], "task.seed_state")
          : State::normalized_trace(ctx.sc.action.algebra);
  KBResult r = krylov_bogolyubov(ctx.sc.action, seed_state, ctx.sc.schedule, k);
  return Json{{"k", k},
              {"set_size", r.set_size},
              {"defect", r.defect},
              {"folner_bound", r.folner_bound},
              {"bound_ok", r.defect <= r.folner_bound + 1e-9},
              {"state", element_json(r.state.functional().density_element())}};
}

Json run_unique_ergodicity(const TaskContext& ctx, const Json& task) {
  UniqueErgodicityOptions opts;
  opts.k_max = task.value("k_max", std::min<long>(ctx.k_max, 10000));
  opts.tol = task.value("tol", 1e-3);
  UniqueErgodicityReport r =
      unique_ergodicity(ctx.sc.action, ctx.sc.schedule, opts);
  Json out{{"unique", r.structural_unique},
           {"empirical_max_residual", r.empirical_max_residual},
           {"k_used", r.k_used},
           {"tolerance", opts.tol},
           {"schedule", r.schedule_description},
           {"schedule_defect", r.schedule_defect}};
  if (r.strictly_ergodic) out["strictly_ergodic"] = *r.strictly_ergodic;
  if (r.unique_state)
    out["unique_state"] =
        element_json(r.unique_state->functional().density_element());
  return out;
}

Json run_strict_ergodicity(const TaskContext& ctx, const Json&) {
  return Json{{"strictly_ergodic", strict_ergodicity(ctx.sc.action)}};
}

Json run_exposing_observable(const TaskContext& ctx, const Json& task) {
  State phi = task_state(ctx, field(task, "state", "task"), "task.state");
  Element a = exposing_observable(ctx.sc.action, phi);
  OptimizationResult r = m_max(ctx.sc.action, a, ConvexBodySpec::sg());
  return Json{{"observable", element_json(a)},
              {"value", r.value},
              {"pairing", pair(phi.functional(), a).real()}};
}

Json run_quotient_check(const TaskContext& ctx, const Json& task) {
  std::vector<int> kernel = as_int_list(
      field(task, "kernel_blocks", "task"), "task.kernel_blocks");
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  QuotientReport r = quotient_correspondence_check(ctx.sc.action, kernel, a);
  double tol = task.value("tol", 1e-8);
  return Json{{"quotient_value", r.quotient_value},
              {"constrained_value", r.constrained_value},
              {"gap", r.gap},
              {"tolerance", tol},
              {"ok", r.gap <= tol}};
}

Json run_model_check(const TaskContext& ctx, const Json& task) {
  const Json& ja = field(task, "ambient", "task");
  std::optional<Algebra> amb_alg;
  if (ja.contains("algebra"))
    amb_alg = Algebra(as_int_list(field(ja["algebra"], "blocks",
                                        "task.ambient.algebra"),
                                  "task.ambient.algebra.blocks"));
  GroupAction ambient = parse_action(field(ja, "action", "task.ambient"),
                                     amb_alg, "task.ambient.action");
  const Json& je = field(task, "embedding", "task");
  if (!je.is_array()) fail("task.embedding", "expected an array");
  std::vector<std::optional<int>> emb;
  for (size_t i = 0; i < je.size(); ++i) {
    if (je[i].is_null())
      emb.push_back(std::nullopt);
    else
      emb.push_back(static_cast<int>(
          as_long(je[i], "task.embedding[" + std::to_string(i) + "]")));
  }
  Element rho_d =
      parse_element(ambient.algebra, field(task, "rho", "task"), "task.rho");
  State rho(HermitianFunctional(ambient.algebra, rho_d.blocks()));
  CStarModel model(ctx.sc.action, ambient, std::move(emb), rho);

  std::vector<Element> elems;
  if (task.contains("elements")) {
    const Json& jel = task["elements"];
    if (!jel.is_array()) fail("task.elements", "expected an array");
    for (size_t i = 0; i < jel.size(); ++i)
      elems.push_back(task_element(
          ctx, jel[i], "task.elements[" + std::to_string(i) + "]"));
  } else {
    Rng rng(ctx.seed + 17 * (ctx.index + 1));
    int count = static_cast<int>(task.value("random_count", 4L));
    for (int i = 0; i < count; ++i) {
      Element h = random_hermitian(ctx.sc.action.algebra, rng);
      elems.push_back(h + Element::unit(ctx.sc.action.algebra) *
                              Complex(operator_norm(h), 0));
    }
  }
  ModelCheckOptions opts;
  opts.k_max = task.value("k_max", std::min<long>(ctx.k_max, 20000));
  ModelVerdict v = model_check(model, elems, opts);
  Json rows = Json::array();
  for (const ModelElementRow& r : v.rows)
    rows.push_back(Json{{"gauge", r.gauge_value},
                        {"rho", r.rho_value},
                        {"ann", r.ann_value},
                        {"gap_iii", r.gap_iii},
                        {"gap_cor38", r.gap_cor38}});
  return Json{{"rows", std::move(rows)},
              {"condition_iii", v.condition_iii},
              {"simplex_proxy", v.simplex_proxy},
              {"cor38_ok", v.cor38_ok},
              {"unique_confirmed", v.unique_confirmed},
              {"faithful", model.faithful()}};
}

Json run_commutator_decay(const TaskContext& ctx, const Json& task) {
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  Element b = task_element(ctx, field(task, "b", "task"), "task.b");
  std::vector<GroupWord> words;
  if (task.contains("words")) {
    const Json& jw = task["words"];
    if (!jw.is_array()) fail("task.words", "expected an array of words");
    for (size_t i = 0; i < jw.size(); ++i)
      words.push_back(
          parse_word(jw[i], "task.words[" + std::to_string(i) + "]"));
  } else {
    if (ctx.sc.action.group.kind != GroupSpec::Kind::Integers)
      fail("task.words", "required for non-Z groups");
    long n = task.value("count", 16L);
    GroupWord w;
    for (long i = 0; i < n; ++i) {
      w.push_back({0, 1});
      words.push_back(w);
    }
  }
  std::vector<double> decay = commutator_decay(ctx.sc.action, words, a, b);
  return Json{{"norms", decay}};
}

Json run_subadditivity(const TaskContext& ctx, const Json& task) {
  Element a = task_element(ctx, field(task, "a", "task"), "task.a");
  std::vector<std::pair<long, long>> pairs;
  if (task.contains("pairs")) {
    const Json& jp = task["pairs"];
    if (!jp.is_array()) fail("task.pairs", "expected an array of [k, l]");
    for (size_t i = 0; i < jp.size(); ++i) {
      std::vector<int> kl =
          as_int_list(jp[i], "task.pairs[" + std::to_string(i) + "]");
      if (kl.size() != 2)
        fail("task.pairs[" + std::to_string(i) + "]", "expected [k, l]");
      pairs.emplace_back(kl[0], kl[1]);
    }
  } else {
    long kmax = task.value("k_max", 32L);
    for (long k = 1; k <= kmax; ++k)
      for (long l = k; k + l <= kmax; ++l) pairs.emplace_back(k, l);
  }
  bool ok = subadditivity_check(ctx.sc.action, a, pairs);
  return Json{{"pairs_checked", static_cast<long>(pairs.size())}, {"ok", ok}};
}

Json run_folner_defect(const TaskContext& ctx, const Json& task) {
  std::vector<long> ks;
  if (task.contains("k")) {
    if (task["k"].is_array())
      for (const auto& v : task["k"]) ks.push_back(as_long(v, "task.k"));
    else
      ks.push_back(as_long(task["k"], "task.k"));
  } else {
    ks = {1, 4, 16, 64};
  }
  Json rows = Json::array();
  for (long k : ks) {
    std::vector<GroupWord> F = folner_sets(ctx.sc.schedule,
                                           ctx.sc.action.group, k);
    double worst = 0;
    Json per = Json::array();
    for (int g = 0; g < static_cast<int>(ctx.sc.action.generators.size());
         ++g) {
      double d = folner_defect(F, {{g, 1}}, ctx.sc.schedule.side,
                               ctx.sc.action.group);
      per.push_back(d);
      worst = std::max(worst, d);
    }
    rows.push_back(Json{{"k", k},
                        {"set_size", static_cast<long>(F.size())},
                        {"defects", std::move(per)},
                        {"max_defect", worst}});
  }
  return Json{{"rows", std::move(rows)}};
}

Json run_task(const TaskContext& ctx, const Json& task) {
  std::string type = task.at("type").get<std::string>();
  if (type == "gauge") return run_gauge(ctx, task);
  if (type == "m_max") return run_m_max(ctx, task);
  if (type == "maximizing_face") return run_maximizing_face(ctx, task);
  if (type == "jordan") return run_jordan(ctx, task);
  if (type == "kb") return run_kb(ctx, task);
  if (type == "unique_ergodicity") return run_unique_ergodicity(ctx, task);
  if (type == "strict_ergodicity") return run_strict_ergodicity(ctx, task);
  if (type == "exposing_observable") return run_exposing_observable(ctx, task);
  if (type == "quotient_check") return run_quotient_check(ctx, task);
  if (type == "model_check") return run_model_check(ctx, task);
  if (type == "commutator_decay") return run_commutator_decay(ctx, task);
  if (type == "subadditivity_check") return run_subadditivity(ctx, task);
  if (type == "folner_defect") return run_folner_defect(ctx, task);
  throw Error("run: unknown task type \"" + type + "\"");
}

}  // namespace

Report run(const Scenario& scenario, const RunOptions& opts) {
  long k_max = opts.k_max.value_or(scenario.k_max);
  double tol = opts.tol.value_or(scenario.tol);
  unsigned long long seed = opts.seed.value_or(scenario.seed);

  Report rep;
  size_t n = scenario.tasks.size();
  std::vector<Json> records(n);
  std::vector<std::string> aborts(n);

  auto exec = [&](size_t i) {
    const Json& task = scenario.tasks[i];
    TaskContext ctx{scenario, k_max, tol, scenario.opt_tol, seed, i};
    Json rec{{"index", static_cast<long>(i)},
             {"type", task.at("type").get<std::string>()}};
    try {
      Json result = run_task(ctx, task);
      bool ok = result.value("ok", true);
      rec["ok"] = ok;
      rec["result"] = std::move(result);
    } catch (const ConsistencyError& e) {
      aborts[i] = e.what();
      rec["ok"] = false;
      rec["error"] = e.what();
    } catch (const std::exception& e) {
      rec["ok"] = false;
      rec["error"] = e.what();
    }
    records[i] = std::move(rec);
  };

  if (opts.parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < static_cast<long>(n); ++i)
      exec(static_cast<size_t>(i));
  } else {
    for (size_t i = 0; i < n; ++i) exec(i);
  }

  for (size_t i = 0; i < n; ++i)
    if (!aborts[i].empty())
      throw ConsistencyError("run aborted — falsification notice: " +
                             aborts[i]);

  long passed = 0;
  Json tasks = Json::array();
  for (size_t i = 0; i < n; ++i) {
    if (records[i].value("ok", false)) ++passed;
    tasks.push_back(std::move(records[i]));
  }
  rep.all_ok = passed == static_cast<long>(n);
  rep.json = Json{
      {"environment",
       Json{{"seed", seed},
            {"k_max", k_max},
            {"tol", tol},
            {"opt_tol", scenario.opt_tol},
            {"parallel", opts.parallel}}},
      {"tasks", std::move(tasks)},
      {"summary", Json{{"total", static_cast<long>(n)},
                       {"passed", passed},
                       {"failed", static_cast<long>(n) - passed},
                       {"all_ok", rep.all_ok}}}};
  return rep;
}

std::string Report::text() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-22s %-6s %s\n", "#", "task",
                "status", "headline");
  out << line;
  out << std::string(72, '-') << "\n";
  for (const Json& t : json.at("tasks")) {
    std::string headline;
    if (t.contains("error")) {
      headline = t["error"].get<std::string>();
    } else if (t.contains("result")) {
      const Json& r = t["result"];
      std::ostringstream h;
      for (const char* key : {"estimate", "value", "unique",
                              "strictly_ergodic", "defect", "gap",
                              "affine_dim", "norm", "condition_iii",
                              "max_defect", "pairs_checked"})
        if (r.contains(key)) {
          h << key << "=" << r[key].dump() << " ";
          break;
        }
      headline = h.str();
    }
    if (headline.size() > 60) headline = headline.substr(0, 57) + "...";
    std::snprintf(line, sizeof line, "%-4ld %-22s %-6s %s\n",
                  t.at("index").get<long>(),
                  t.at("type").get<std::string>().c_str(),
                  t.at("ok").get<bool>() ? "ok" : "FAIL", headline.c_str());
    out << line;
  }
  out << std::string(72, '-') << "\n";
  const Json& s = json.at("summary");
  std::snprintf(line, sizeof line, "%ld/%ld passed\n",
                s.at("passed").get<long>(), s.at("total").get<long>());
  out << line;
  return out.str();
}

}  // namespace ncx
