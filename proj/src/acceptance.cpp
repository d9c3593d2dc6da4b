#include "ncx/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ncx/optimize.hpp"
#include "ncx/systems.hpp"

namespace ncx {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

/// Shared worst-case accumulator for parallel criterion loops.
struct Worst {
  std::mutex mu;
  double value = 0;
  std::string note;

  void update(double v, const std::string& n) {
    std::lock_guard<std::mutex> lock(mu);
    if (v > value) {
      value = v;
      note = n;
    }
  }
};

State tracial_state(const Algebra& alg, Rng& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w;
  double total = 0;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    w.push_back(u(rng));
    total += w.back();
  }
  std::vector<Mat> d;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    int n = alg.block_dims[static_cast<size_t>(i)];
    d.push_back((w[static_cast<size_t>(i)] / (total * n) *
                 Mat::Identity(n, n))
                    .eval());
  }
  return State(HermitianFunctional(alg, std::move(d)));
}

}  // namespace

CriterionResult criterion_gauge_oracle(unsigned long long seed) {
  CriterionResult res{1, "gauge matches the spectral oracle max-eig E(a)"};
  struct Case {
    int kind;  // 0 = Z, 1 = Z^2, 2 = finite
    unsigned long long seed;
  };
  std::vector<Case> cases;
  for (int i = 0; i < 40; ++i) cases.push_back({0, seed + 1000 + i});
  for (int i = 0; i < 30; ++i) cases.push_back({1, seed + 2000 + i});
  for (int i = 0; i < 30; ++i) cases.push_back({2, seed + 3000 + i});

  Worst worst_cont, worst_fin;
  std::atomic<bool> ok{true};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long ci = 0; ci < static_cast<long>(cases.size()); ++ci) {
    const Case& c = cases[static_cast<size_t>(ci)];
    Rng rng(c.seed);
    GroupAction action = c.kind == 0   ? random_z_system(rng, 48, true)
                         : c.kind == 1 ? random_z2_system(rng, 48, true)
                                       : random_finite_system(rng, 48);
    Element a = random_positive(action.algebra, rng);
    GaugeOptions opts;
    opts.k_max = c.kind == 2 ? 1 : 100000;
    opts.tol = 1e-12;  // never stop early; the bound is on the final gap
    GaugeResult g = gauge(action, default_schedule(action.group), a, opts);
    if (!g.oracle_gap) {
      ok = false;
      continue;
    }
    double tol = c.kind == 2 ? 1e-10 : 1e-3;
    std::string note = (c.kind == 0   ? "Z seed="
                        : c.kind == 1 ? "Z^2 seed="
                                      : "finite seed=") +
                       std::to_string(c.seed);
    (c.kind == 2 ? worst_fin : worst_cont).update(*g.oracle_gap, note);
    if (*g.oracle_gap > tol) ok = false;
  }

  res.passed = ok;
  res.detail = "worst |estimate - oracle|: Z/Z^2 " + fmt(worst_cont.value) +
               " (tol 1e-3, " + worst_cont.note + "), finite " +
               fmt(worst_fin.value) + " (tol 1e-10)";
  return res;
}

CriterionResult criterion_orbit_oracle(unsigned long long seed) {
  CriterionResult res{2, "commutative/tracial orbit oracles"};
  double worst_sg = 0, worst_tg = 0;
  bool ok = true;

  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(seed + 4000 + trial);
    // Diagonal permutation system: S^G oracle = max orbit average.
    GroupAction act = random_diagonal_permutation_system(rng, 12);
    Element a = random_hermitian(act.algebra, rng);
    double oracle = -1e300;
    for (const std::vector<int>& orbit : block_orbits(act)) {
      double s = 0;
      for (int i : orbit) s += a.block(i)(0, 0).real();
      oracle = std::max(oracle, s / static_cast<double>(orbit.size()));
    }
    OptimizationResult r = m_max(act, a, ConvexBodySpec::sg());
    worst_sg = std::max(worst_sg, std::abs(r.value - oracle));

    // Block algebra with a permutation action: T^G oracle = max over orbits
    // of (Σ tr a_i) / (Σ n_i).
    std::uniform_int_distribution<int> bd(1, 3), nb(2, 5);
    int dim = bd(rng), m = nb(rng);
    Algebra alg(std::vector<int>(static_cast<size_t>(m), dim));
    std::vector<int> perm(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) perm[static_cast<size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    GroupAction bact(GroupSpec::integers(), alg,
                     {Automorphism::permutation(alg, perm)});
    Element b = random_hermitian(alg, rng);
    double toracle = -1e300;
    for (const std::vector<int>& orbit : block_orbits(bact)) {
      double s = 0, d = 0;
      for (int i : orbit) {
        s += b.block(i).trace().real();
        d += alg.block_dims[static_cast<size_t>(i)];
      }
      toracle = std::max(toracle, s / d);
    }
    OptimizationResult t = m_max(bact, b, ConvexBodySpec::tg());
    worst_tg = std::max(worst_tg, std::abs(t.value - toracle));
  }
  ok = worst_sg <= 1e-10 && worst_tg <= 1e-10;
  res.passed = ok;
  res.detail = "worst |m_max - orbit oracle|: SG " + fmt(worst_sg) + ", TG " +
               fmt(worst_tg) + " (tol 1e-10)";
  return res;
}

CriterionResult criterion_jordan(unsigned long long seed) {
  CriterionResult res{3, "Jordan decomposition suite"};
  double worst_recon = 0, worst_norm = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng(seed + 5000 + trial);
    Algebra alg = random_algebra(rng, 32);
    HermitianFunctional phi = random_functional(alg, rng);
    auto [pos, neg] = jordan_decompose(phi);
    worst_recon = std::max(
        worst_recon, operator_norm(pos.density_element() -
                                   neg.density_element() -
                                   phi.density_element()));
    worst_norm = std::max(
        worst_norm, std::abs(functional_norm(phi) - functional_norm(pos) -
                             functional_norm(neg)));
  }
  bool tracial_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(seed + 6000 + trial);
    Algebra alg = random_algebra(rng, 32);
    HermitianFunctional phi = random_tracial_functional(alg, rng);
    auto [pos, neg] = jordan_decompose(phi);
    if (!is_tracial(pos, 1e-9) || !is_tracial(neg, 1e-9)) tracial_ok = false;
  }
  res.passed = worst_recon <= 1e-10 && worst_norm <= 1e-10 && tracial_ok;
  res.detail = "worst reconstruction " + fmt(worst_recon) +
               ", worst norm additivity " + fmt(worst_norm) +
               " (tol 1e-10); tracial parts " +
               (tracial_ok ? "tracial at 1e-9" : "NOT tracial");
  return res;
}

CriterionResult criterion_quotient(unsigned long long seed) {
  CriterionResult res{4, "quotient correspondence"};
  Worst worst;
  std::atomic<bool> ok{true};
  std::atomic<long> nonsurjective{0};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long trial = 0; trial < 60; ++trial) {
    Rng rng(seed + 7000 + static_cast<unsigned long long>(trial));
    GroupAction act = trial % 3 == 2 ? random_finite_system(rng, 48)
                                     : random_z_system(rng, 48, true);
    std::vector<std::vector<int>> orbits = block_orbits(act);
    // Drop a random proper (possibly empty) subset of orbits.
    std::vector<int> kernel;
    if (orbits.size() > 1) {
      std::uniform_int_distribution<int> coin(0, 1);
      std::vector<size_t> dropped;
      for (size_t i = 0; i + 1 < orbits.size(); ++i)
        if (coin(rng)) dropped.push_back(i);
      if (dropped.empty() && trial % 2 == 0) dropped.push_back(0);
      for (size_t i : dropped)
        for (int b : orbits[i]) kernel.push_back(b);
    }
    if (!kernel.empty()) ++nonsurjective;
    Element a = random_hermitian(act.algebra, rng);
    QuotientReport r = quotient_correspondence_check(act, kernel, a);
    worst.update(r.gap, "trial " + std::to_string(trial) + " |kernel|=" +
                            std::to_string(kernel.size()));
    if (r.gap > 1e-8) ok = false;
  }
  res.passed = ok && nonsurjective >= 15;
  res.detail = "worst gap " + fmt(worst.value) + " (tol 1e-8, " + worst.note +
               "); " + std::to_string(nonsurjective.load()) +
               "/60 runs had a nontrivial kernel";
  return res;
}

CriterionResult criterion_unique_ergodicity(unsigned long long seed) {
  CriterionResult res{5, "unique ergodicity equivalence"};
  double worst_unique_residual = 0;
  double worst_nonunique_residual = 1e300;
  bool ok = true;
  std::string err;

  auto expect_unique = [&](const GroupAction& act, long k_max) {
    try {
      UniqueErgodicityOptions o;
      o.k_max = k_max;
      UniqueErgodicityReport r =
          unique_ergodicity(act, default_schedule(act.group), o);
      if (!r.structural_unique) ok = false;
      if (act.group.kind == GroupSpec::Kind::Finite &&
          r.empirical_max_residual > 1e-12)
        ok = false;
      worst_unique_residual =
          std::max(worst_unique_residual, r.empirical_max_residual);
    } catch (const std::exception& e) {
      ok = false;
      err = e.what();
    }
  };
  auto expect_not_unique = [&](const GroupAction& act) {
    try {
      for (long k : {1L, 10L, 100L, 1000L, 10000L}) {
        UniqueErgodicityOptions o;
        o.k_max = k;
        UniqueErgodicityReport r =
            unique_ergodicity(act, default_schedule(act.group), o);
        if (r.structural_unique) ok = false;
        if (r.empirical_max_residual < 0.1) ok = false;
        worst_nonunique_residual =
            std::min(worst_nonunique_residual, r.empirical_max_residual);
        if (act.group.kind == GroupSpec::Kind::Finite) break;
      }
    } catch (const std::exception& e) {
      ok = false;
      err = e.what();
    }
  };

  for (int n = 2; n <= 8; ++n) expect_unique(cyclic_shift_system(n), 10000);
  expect_unique(pauli_z2z2_system(), 1);
  for (int i = 0; i < 10; ++i) {
    Rng rng(seed + 8000 + i);
    expect_unique(random_weyl_system(rng), 1);
  }
  for (int n = 2; n <= 4; ++n) expect_not_unique(identity_system(n));
  expect_not_unique(permutation_system({1, 0, 3, 2}));          // two 2-cycles
  expect_not_unique(permutation_system({1, 2, 0, 4, 3}));       // 3+2 cycles
  expect_not_unique(permutation_system({0, 2, 1}));             // fixed + 2-cycle

  res.passed = ok;
  res.detail = "unique systems: worst residual " + fmt(worst_unique_residual) +
               " (tol 1e-3); non-unique: min residual " +
               fmt(worst_nonunique_residual) + " (must stay >= 0.1)" +
               (err.empty() ? "" : "; error: " + err);
  return res;
}

CriterionResult criterion_model_bidirectional(unsigned long long seed) {
  CriterionResult res{6, "model verdicts, both directions"};
  bool ok = true;
  std::string detail;

  // Direction 1: uniquely ergodic model passes condition (iii).
  GroupAction pauli = pauli_z2z2_system();
  std::vector<std::optional<int>> id_emb = {0};
  CStarModel good(pauli, pauli, id_emb, State::normalized_trace(pauli.algebra));
  Rng rng(seed + 9000);
  std::vector<Element> elems;
  for (int i = 0; i < 6; ++i) {
    Element h = random_hermitian(pauli.algebra, rng);
    elems.push_back(h + Element::unit(pauli.algebra) *
                            Complex(operator_norm(h) + 0.1, 0));
  }
  ModelCheckOptions opts;
  opts.gauge_tol = 1e-12;
  ModelVerdict v = model_check(good, elems, opts);
  double worst_gap = 0;
  for (const ModelElementRow& r : v.rows)
    worst_gap = std::max(worst_gap, r.gap_iii);
  if (!(v.condition_iii && v.simplex_proxy && v.unique_confirmed) ||
      worst_gap > 1e-9)
    ok = false;
  detail += "pauli: worst (iii) gap " + fmt(worst_gap) +
            " (tol 1e-9), simplex=" + (v.simplex_proxy ? "yes" : "no");

  // Direction 2: a two-orbit (non-uniquely-ergodic) system yields a witness
  // violating (iii) with a macroscopic gap.
  GroupAction twoorbit = permutation_system({1, 0, 3, 2});
  std::vector<std::optional<int>> emb4 = {0, 1, 2, 3};
  CStarModel bad(twoorbit, twoorbit, emb4,
                 State::normalized_trace(twoorbit.algebra));
  auto [witness, gap] = noniii_witness(bad, opts);
  if (gap < 0.1 || !is_positive(witness, 1e-9)) ok = false;
  detail += "; two-orbit witness gap " + fmt(gap) + " (needs >= 0.1)";

  res.passed = ok;
  res.detail = detail;
  return res;
}

CriterionResult criterion_krylov_bogolyubov(unsigned long long seed) {
  CriterionResult res{7, "Krylov-Bogolyubov defect bounds"};
  Worst worst_rel;
  std::atomic<bool> ok{true};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long trial = 0; trial < 100; ++trial) {
    Rng rng(seed + 10000 + static_cast<unsigned long long>(trial));
    GroupAction act = trial % 3 == 0   ? random_z_system(rng, 48)
                      : trial % 3 == 1 ? random_z2_system(rng, 48)
                                       : random_finite_system(rng, 48);
    State phi = random_state(act.algebra, rng);
    std::uniform_int_distribution<long> kd(1, 40);
    long k = kd(rng);
    KBResult r = krylov_bogolyubov(act, phi, default_schedule(act.group), k);
    if (r.defect > r.folner_bound + 1e-9) {
      ok = false;
      worst_rel.update(r.defect - r.folner_bound,
                       "trial " + std::to_string(trial));
    }
    // Tracial seeds stay tracial.
    State tr = tracial_state(act.algebra, rng);
    KBResult rt = krylov_bogolyubov(act, tr, default_schedule(act.group), k);
    if (!is_tracial(rt.state.functional(), 1e-10)) ok = false;
  }

  // Exact invariance at full periods of cyclic actions.
  double worst_period = 0;
  for (int n = 2; n <= 8; ++n) {
    GroupAction act = cyclic_shift_system(n);
    Rng rng(seed + 11000 + static_cast<unsigned long long>(n));
    State phi = random_state(act.algebra, rng);
    for (long mult = 1; mult <= 3; ++mult) {
      KBResult r = krylov_bogolyubov(act, phi, FolnerSchedule::interval(),
                                     mult * n);
      worst_period = std::max(worst_period, r.defect);
    }
  }
  if (worst_period > 1e-10) ok = false;

  res.passed = ok;
  res.detail = std::string("defect <= 2*(Folner defect) on 100 random runs") +
               (ok ? "" : " VIOLATED " + worst_rel.note) +
               "; worst defect at cyclic full periods " + fmt(worst_period) +
               " (tol 1e-10); tracial seeds stayed tracial at 1e-10";
  return res;
}

CriterionResult criterion_exposing(unsigned long long seed) {
  CriterionResult res{8, "exposing observables for extreme invariant states"};
  Worst worst;
  std::atomic<bool> ok{true};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long trial = 0; trial < 50; ++trial) {
    Rng rng(seed + 12000 + static_cast<unsigned long long>(trial));
    GroupAction act = random_diagonal_permutation_system(rng, 12);
    std::vector<State> extremes;
    try {
      extremes = extreme_invariant_states(act);
    } catch (const std::exception&) {
      ok = false;
      continue;
    }
    for (size_t i = 0; i < extremes.size(); ++i) {
      Element x;
      try {
        x = exposing_observable(act, extremes[i]);
      } catch (const std::exception&) {
        ok = false;
        continue;
      }
      OptimizationResult r = m_max(act, x, ConvexBodySpec::sg());
      FaceDescriptor f = maximizing_face(act, x);
      double v_err = std::abs(r.value - 1.0);
      double max_err = operator_norm(
          r.maximizer.functional().density_element() -
          extremes[i].functional().density_element());
      double cross = 0;
      for (size_t j = 0; j < extremes.size(); ++j)
        if (j != i) cross = std::max(cross, std::abs(pair(extremes[j], x)));
      double worst_here = std::max({v_err, max_err, cross});
      worst.update(worst_here, "trial " + std::to_string(trial));
      if (worst_here > 1e-8 || f.affine_dim != 0) ok = false;
    }
  }
  res.passed = ok;
  res.detail = "worst of |m-1|, ||maximizer-phi||, cross pairings: " +
               fmt(worst.value) + " (tol 1e-8, " + worst.note +
               "); all face dims 0";
  return res;
}

CriterionResult criterion_projector_crosscheck(unsigned long long seed) {
  CriterionResult res{9, "fixed projector: kernel vs Cesaro cross-check"};
  Worst worst_gap, worst_prop;
  std::atomic<bool> ok{true};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long trial = 0; trial < 50; ++trial) {
    Rng rng(seed + 13000 + static_cast<unsigned long long>(trial));
    GroupAction act = trial % 3 == 0   ? random_z_system(rng, 48, true)
                      : trial % 3 == 1 ? random_z2_system(rng, 48, true)
                                       : random_finite_system(rng, 48);
    FixedProjector E = fixed_projector(act);
    Mat cesaro = cesaro_projector_matrix(act);
    Eigen::JacobiSVD<Mat> svd(E.matrix() - cesaro);
    double gap = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    worst_gap.update(gap, "trial " + std::to_string(trial));
    if (gap > 1e-6) ok = false;

    double prop = 0;
    // Idempotence on coordinates.
    prop = std::max(prop,
                    (E.matrix() * E.matrix() - E.matrix()).cwiseAbs().maxCoeff());
    // Unitality and trace preservation.
    Element unit = Element::unit(act.algebra);
    prop = std::max(prop, operator_norm(E(unit) - unit));
    Element h = random_hermitian(act.algebra, rng);
    prop = std::max(prop, std::abs((E(h).trace() - h.trace()).real()) +
                              std::abs((E(h).trace() - h.trace()).imag()));
    // Positivity.
    Element p = random_positive(act.algebra, rng);
    Element Ep = E(p);
    double mineig = 0;
    for (const auto& ev : herm_spectrum(Ep).eigenvalues)
      mineig = std::min(mineig, ev.minCoeff());
    prop = std::max(prop, std::max(0.0, -mineig));
    // Equivariance: E∘Θ_g = E = Θ_g∘E for every generator.
    for (const Automorphism& g : act.generators) {
      prop = std::max(prop, operator_norm(E(g(h)) - E(h)));
      prop = std::max(prop, operator_norm(g(E(h)) - E(h)));
    }
    worst_prop.update(prop, "trial " + std::to_string(trial));
    if (prop > 1e-10) ok = false;
  }
  res.passed = ok;
  res.detail = "worst construction gap " + fmt(worst_gap.value) +
               " (tol 1e-6, " + worst_gap.note + "); worst property residual " +
               fmt(worst_prop.value) + " (tol 1e-10)";
  return res;
}

std::vector<CriterionResult> run_acceptance_suite(const std::string& suite,
                                                  unsigned long long seed) {
  std::vector<CriterionResult> out;
  auto want = [&](int id) {
    if (suite == "all") return true;
    if (suite == "gauge-oracle") return id == 1;
    if (suite == "jordan") return id == 3;
    if (suite == "quotient") return id == 4;
    if (suite == "uergodic") return id == 5 || id == 6;
    throw Error("unknown acceptance suite \"" + suite + "\"");
  };
  want(1);  // validate the suite name before running anything
  if (want(1)) out.push_back(criterion_gauge_oracle(seed));
  if (want(2)) out.push_back(criterion_orbit_oracle(seed));
  if (want(3)) out.push_back(criterion_jordan(seed));
  if (want(4)) out.push_back(criterion_quotient(seed));
  if (want(5)) out.push_back(criterion_unique_ergodicity(seed));
  if (want(6)) out.push_back(criterion_model_bidirectional(seed));
  if (want(7)) out.push_back(criterion_krylov_bogolyubov(seed));
  if (want(8)) out.push_back(criterion_exposing(seed));
  if (want(9)) out.push_back(criterion_projector_crosscheck(seed));
  return out;
}

}  // namespace ncx
