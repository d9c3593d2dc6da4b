#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <complex>

#include "doctest.h"
#include "ncx/optimize.hpp"
#include "ncx/systems.hpp"

using namespace ncx;
using namespace std::complex_literals;

namespace {

Mat m2(Complex a, Complex b, Complex c, Complex d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Element diag_element(const Algebra& alg, std::vector<double> v) {
  std::vector<Mat> blocks;
  for (double x : v) blocks.push_back(Mat::Constant(1, 1, x));
  return Element(alg, std::move(blocks));
}

}  // namespace

TEST_CASE("m_max over SG: worked examples") {
  // Cyclic shift on C^3: the only invariant state is uniform, value = mean.
  GroupAction shift = cyclic_shift_system(3);
  Element a = diag_element(shift.algebra, {3, 1, 2});
  OptimizationResult r = m_max(shift, a, ConvexBodySpec::sg());
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(r.maximizer.functional().density_block(i)(0, 0) -
                   Complex(1.0 / 3.0)) < 1e-8);

  // Identity action: every state is invariant, value = max eigenvalue.
  GroupAction id = identity_system(2);
  OptimizationResult r2 =
      m_max(id, diag_element(id.algebra, {0.3, 0.9}), ConvexBodySpec::sg());
  CHECK(r2.value == doctest::Approx(0.9).epsilon(1e-9));

  // Permutation (01)(23) on C^4: orbit means are 0.5 and 0.3.
  GroupAction perm = permutation_system({1, 0, 3, 2});
  OptimizationResult r3 = m_max(
      perm, diag_element(perm.algebra, {1, 0, 0.2, 0.4}), ConvexBodySpec::sg());
  CHECK(r3.value == doctest::Approx(0.5).epsilon(1e-9));

  // Ad(diag(1,i)) on M_2: invariant states are diagonal, value = max
  // diagonal entry of a.
  GroupAction ad = ad_unitary_system(2, m2(1, 0, 0, 1i));
  Element b(ad.algebra, {m2(0.5, 0.1, 0.1, 0.7)});
  OptimizationResult r4 = m_max(ad, b, ConvexBodySpec::sg());
  CHECK(r4.value == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("m_max over TG: block swap trace example") {
  // M_2 ⊕ M_2 swap: tracial invariant states are convex combos of the two
  // block normalized traces averaged over the swap; the swap forces equal
  // weights, so the value is (tr a_0 + tr a_1)/4.
  GroupAction swap = block_swap_system(2);
  Mat a1(2, 2);
  a1 << 1, 0, 0, 3;
  Element a(swap.algebra, {Mat::Identity(2, 2), a1});
  OptimizationResult r = m_max(swap, a, ConvexBodySpec::tg());
  CHECK(r.value == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(is_tracial(r.maximizer.functional(), 1e-8));
}

TEST_CASE("m_max defect fields and upper bound") {
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    GroupAction act = random_z_system(rng, 32, true);
    Element a = random_hermitian(act.algebra, rng);
    OptimizationResult r = m_max(act, a, ConvexBodySpec::sg());
    CHECK(r.invariance_defect < 1e-7);
    CHECK(std::abs(pair(r.maximizer.functional(), a) - r.value) <
          1e-7 + std::abs(r.pair_defect));
    REQUIRE(r.upper_bound.has_value());
    CHECK(r.value <= *r.upper_bound + 1e-7);
  }
}

TEST_CASE("body monotonicity: smaller bodies give smaller values") {
  Rng rng(22);
  for (int t = 0; t < 15; ++t) {
    GroupAction act = random_finite_system(rng, 32);
    Element a = random_hermitian(act.algebra, rng);
    double sg = m_max(act, a, ConvexBodySpec::sg()).value;
    double tg = m_max(act, a, ConvexBodySpec::tg()).value;
    CHECK(tg <= sg + 1e-7);

    auto orbits = block_orbits(act);
    if (orbits.size() >= 2) {
      ConvexBodySpec ann = ConvexBodySpec::ann_ideal(orbits[0]);
      OptimizationResult ra = m_max(act, a, ann);
      if (ra.feasible) {
        CHECK(ra.value <= sg + 1e-7);
        ConvexBodySpec both =
            ConvexBodySpec::intersection({ConvexBodySpec::tg(), ann});
        OptimizationResult ri = m_max(act, a, both);
        if (ri.feasible) {
          CHECK(ri.value <= tg + 1e-6);
          CHECK(ri.value <= ra.value + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("maximizing_face: dimension 0 vs 1") {
  // Unique maximizer: cyclic shift (single invariant state).
  GroupAction shift = cyclic_shift_system(3);
  FaceDescriptor f =
      maximizing_face(shift, diag_element(shift.algebra, {3, 1, 2}));
  CHECK(f.affine_dim == 0);

  // Identity action on C^2 with a constant observable: the whole simplex
  // maximizes, affine dimension 1.
  GroupAction id = identity_system(2);
  FaceDescriptor f2 = maximizing_face(id, Element::unit(id.algebra));
  CHECK(f2.affine_dim == 1);
  CHECK(operator_norm(f2.projector - Element::unit(id.algebra)) < 1e-10);

  // Identity action with distinct values: unique maximizer again.
  FaceDescriptor f3 =
      maximizing_face(id, diag_element(id.algebra, {0.3, 0.9}));
  CHECK(f3.affine_dim == 0);
  CHECK(operator_norm(f3.projector - diag_element(id.algebra, {0, 1})) <
        1e-10);
}

TEST_CASE("extreme_invariant_states: orbits, pauli, non-abelian refusal") {
  // Identity on C^3: three point masses.
  GroupAction id = identity_system(3);
  auto ext = extreme_invariant_states(id);
  CHECK(ext.size() == 3);

  // (01)(23): two orbit-uniform states.
  GroupAction perm = permutation_system({1, 0, 3, 2});
  auto ext2 = extreme_invariant_states(perm);
  REQUIRE(ext2.size() == 2);
  for (const State& s : ext2) {
    double mass = 0;
    for (int i = 0; i < 4; ++i)
      mass = std::max(mass, std::abs(s.functional().density_block(i)(0, 0)));
    CHECK(mass == doctest::Approx(0.5).epsilon(1e-8));
  }

  // Pauli group on M_2: scalar fixed algebra, unique extreme state tr/2.
  GroupAction pauli = pauli_z2z2_system();
  auto ext3 = extreme_invariant_states(pauli);
  REQUIRE(ext3.size() == 1);
  CHECK(operator_norm(ext3[0].functional().density_element() -
                      Element::unit(pauli.algebra) * Complex(0.5)) < 1e-10);

  // Identity on M_2: the fixed algebra is all of M_2, non-abelian.
  GroupAction idm2 = ad_unitary_system(2, Mat::Identity(2, 2));
  CHECK_THROWS_WITH_AS(extreme_invariant_states(idm2),
                       doctest::Contains("abelian"), Error);
}

TEST_CASE("exposing_observable: separates the extreme states") {
  GroupAction perm = permutation_system({1, 0, 3, 2});
  auto ext = extreme_invariant_states(perm);
  REQUIRE(ext.size() == 2);
  for (size_t i = 0; i < ext.size(); ++i) {
    Element x = exposing_observable(perm, ext[i]);
    CHECK(std::real(pair(ext[i].functional(), x)) ==
          doctest::Approx(1.0).epsilon(1e-8));
    for (size_t j = 0; j < ext.size(); ++j)
      if (j != i)
        CHECK(std::abs(pair(ext[j].functional(), x)) < 1e-8);
    OptimizationResult r = m_max(perm, x, ConvexBodySpec::sg());
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(operator_norm(r.maximizer.functional().density_element() -
                        ext[i].functional().density_element()) < 1e-7);
  }
  // The uniform-on-{0,1} extreme state is exposed by diag(1,1,0,0).
  const State& s01 =
      std::abs(ext[0].functional().density_block(0)(0, 0)) > 0.1 ? ext[0]
                                                                 : ext[1];
  Element e01 = exposing_observable(perm, s01);
  CHECK(operator_norm(e01 - diag_element(perm.algebra, {1, 1, 0, 0})) <
        1e-8);
}

TEST_CASE("krylov_bogolyubov: periodic exactness, bound, invariant seeds") {
  // Full period of a cyclic shift gives an exactly invariant state.
  GroupAction shift = cyclic_shift_system(4);
  HermitianFunctional point(shift.algebra,
                            diag_element(shift.algebra, {1, 0, 0, 0}).blocks());
  KBResult kb = krylov_bogolyubov(shift, State(point),
                                  FolnerSchedule::interval(), 4);
  CHECK(kb.defect < 1e-12);
  CHECK(kb.set_size == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(kb.state.functional().density_block(i)(0, 0) -
                   Complex(0.25)) < 1e-12);

  // Partial window: defect bounded by the Følner bound, here 2·(1/10).
  KBResult kb10 = krylov_bogolyubov(shift, State(point),
                                    FolnerSchedule::interval(), 10);
  CHECK(kb10.defect <= kb10.folner_bound + 1e-12);
  CHECK(kb10.folner_bound == doctest::Approx(0.4));

  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    GroupAction act = random_z_system(rng, 32);
    // Invariant seed stays put.
    State tr = State::normalized_trace(act.algebra);
    KBResult kbt =
        krylov_bogolyubov(act, tr, FolnerSchedule::interval(), 25);
    CHECK(kbt.defect < 1e-10);
    // Random seed obeys the defect bound.
    State s = random_state(act.algebra, rng);
    KBResult kbr =
        krylov_bogolyubov(act, s, FolnerSchedule::interval(), 50);
    CHECK(kbr.defect <= kbr.folner_bound + 1e-9);
  }
}

TEST_CASE("ann_feasibility: infeasible unit, feasible ideal and set") {
  GroupAction perm = permutation_system({1, 0, 3, 2});
  Algebra alg = perm.algebra;

  // No state annihilates the unit.
  AnnFeasibility au = ann_feasibility(
      perm, ConvexBodySpec::ann_set({Element::unit(alg)}));
  CHECK_FALSE(au.feasible);
  CHECK_FALSE(au.witness.has_value());

  // Killing the {0,1} orbit ideal: the uniform state on {2,3} remains.
  AnnFeasibility ai =
      ann_feasibility(perm, ConvexBodySpec::ann_ideal({0, 1}));
  REQUIRE(ai.feasible);
  REQUIRE(ai.witness.has_value());
  const HermitianFunctional& w = ai.witness->functional();
  CHECK(std::abs(w.density_block(0)(0, 0)) < 1e-7);
  CHECK(std::abs(w.density_block(1)(0, 0)) < 1e-7);

  // Annihilating diag(1,0,0,0): invariance forces mass off {0,1} entirely,
  // leaving the uniform state on {2,3}.
  AnnFeasibility as = ann_feasibility(
      perm, ConvexBodySpec::ann_set({diag_element(alg, {1, 0, 0, 0})}));
  REQUIRE(as.feasible);
  REQUIRE(as.witness.has_value());
  CHECK(std::abs(as.witness->functional().density_block(2)(0, 0) -
                 Complex(0.5)) < 1e-6);
  CHECK(std::abs(as.witness->functional().density_block(3)(0, 0) -
                 Complex(0.5)) < 1e-6);
}

TEST_CASE("m_max over AnnSet: constrained value with residual bookkeeping") {
  // (01)(23): kill the {0,1} orbit via the element diag(1,1,0,0); the best
  // remaining invariant state is uniform on {2,3}, value (0.2+0.4)/2 = 0.3.
  GroupAction perm = permutation_system({1, 0, 3, 2});
  Element a = diag_element(perm.algebra, {1, 0, 0.2, 0.4});
  ConvexBodySpec body =
      ConvexBodySpec::ann_set({diag_element(perm.algebra, {1, 1, 0, 0})});
  OptimizationResult r = m_max(perm, a, body);
  REQUIRE(r.feasible);
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(r.constraint_defect < 1e-7);
  CHECK(r.invariance_defect < 1e-7);
  REQUIRE(r.upper_bound.has_value());
  CHECK(r.value <= *r.upper_bound + 1e-7);
}

TEST_CASE("quotient correspondence: two routes agree") {
  // (01)(23), kernel = blocks {2,3}: quotient is the 2-cycle on {0,1}, and
  // both routes give the orbit mean 0.5 of diag(1,0).
  GroupAction perm = permutation_system({1, 0, 3, 2});
  Element a = diag_element(perm.algebra, {1, 0, 0.2, 0.4});
  QuotientReport q = quotient_correspondence_check(perm, {2, 3}, a);
  CHECK(q.quotient_value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(q.constrained_value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(q.gap < 1e-8);

  // Empty kernel reduces to m(a|SG).
  QuotientReport q0 = quotient_correspondence_check(perm, {}, a);
  CHECK(q0.quotient_value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(q0.gap < 1e-8);

  // A non-invariant block set is rejected.
  GroupAction swap = block_swap_system(2);
  Element b(swap.algebra, {Mat::Identity(2, 2), Mat::Identity(2, 2)});
  CHECK_THROWS_AS(quotient_correspondence_check(swap, {0}, b), Error);
}

TEST_CASE("quotient correspondence on random systems") {
  Rng rng(24);
  int nontrivial = 0;
  for (int t = 0; t < 25; ++t) {
    GroupAction act =
        t % 2 ? random_z_system(rng, 32, true) : random_finite_system(rng, 32);
    auto orbits = block_orbits(act);
    if (orbits.size() < 2) continue;
    Element a = random_hermitian(act.algebra, rng);
    QuotientReport q = quotient_correspondence_check(act, orbits.back(), a);
    CHECK(q.gap < 1e-7);
    ++nontrivial;
  }
  CHECK(nontrivial >= 5);
}

TEST_CASE("block_orbits: shapes") {
  auto o1 = block_orbits(cyclic_shift_system(5));
  REQUIRE(o1.size() == 1);
  CHECK(o1[0].size() == 5);
  auto o2 = block_orbits(permutation_system({1, 0, 3, 2}));
  CHECK(o2.size() == 2);
  auto o3 = block_orbits(identity_system(3));
  CHECK(o3.size() == 3);
}
