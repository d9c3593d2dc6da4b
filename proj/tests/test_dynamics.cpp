#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <complex>

#include "doctest.h"
#include "ncx/dynamics.hpp"
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

TEST_CASE("automorphism validation") {
  Algebra alg({2, 2});
  CHECK_THROWS_WITH_AS(
      Automorphism(alg, {0, 1}, {m2(1, 0, 0, 2), Mat::Identity(2, 2)}),
      doctest::Contains("not unitary"), Error);
  CHECK_THROWS_AS(Automorphism(Algebra({2, 1}), {1, 0},
                               {Mat::Identity(2, 2), Mat::Identity(1, 1)}),
                  Error);
  CHECK_THROWS_AS(Automorphism(alg, {0, 0},
                               {Mat::Identity(2, 2), Mat::Identity(2, 2)}),
                  Error);
}

TEST_CASE("apply: identity word, cyclic shift, Ad_u") {
  GroupAction shift = cyclic_shift_system(3);
  Element x = diag_element(shift.algebra, {3, 1, 2});
  CHECK(operator_norm(shift.apply({}, x) - x) == doctest::Approx(0.0));
  Element y = shift.apply({{0, 1}}, x);
  CHECK(y.block(0)(0, 0).real() == doctest::Approx(1.0));
  CHECK(y.block(1)(0, 0).real() == doctest::Approx(2.0));
  CHECK(y.block(2)(0, 0).real() == doctest::Approx(3.0));

  GroupAction ad = ad_unitary_system(2, m2(1, 0, 0, 1i));
  Algebra m2alg = ad.algebra;
  Element e01(m2alg, {m2(0, 1, 0, 0)});
  Element out = ad.apply({{0, 1}}, e01);
  CHECK((out.block(0) - m2(0, -1i, 0, 0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("automorphism laws on random inputs") {
  Rng rng(11);
  for (int t = 0; t < 40; ++t) {
    Algebra alg = random_algebra(rng, 32);
    Automorphism th = random_automorphism(alg, rng);
    Element x = random_hermitian(alg, rng), y = random_hermitian(alg, rng);
    CHECK(operator_norm(th(x * y) - th(x) * th(y)) < 1e-10);
    CHECK(operator_norm(th(x.adjoint()) - th(x).adjoint()) < 1e-10);
    CHECK(std::abs(operator_norm(th(x)) - operator_norm(x)) < 1e-10);
    CHECK(operator_norm(th(Element::unit(alg)) - Element::unit(alg)) < 1e-12);
    // Trace preservation.
    CHECK(std::abs((th(x).trace() - x.trace())) < 1e-10);
    // Inverse and composition.
    CHECK(operator_norm(th.inverse()(th(x)) - x) < 1e-10);
    Automorphism th2 = random_automorphism(alg, rng);
    CHECK(operator_norm(compose(th, th2)(x) - th(th2(x))) < 1e-10);
  }
}

TEST_CASE("group word laws") {
  Rng rng(12);
  GroupAction act = random_z2_system(rng, 32);
  Element x = random_hermitian(act.algebra, rng);
  GroupWord w1 = {{0, 1}, {1, -1}, {0, 1}};
  GroupWord w2 = {{1, 1}, {0, -1}};
  CHECK(operator_norm(act.apply(concat_words(w1, w2), x) -
                      act.apply(w1, act.apply(w2, x))) < 1e-10);
  CHECK(operator_norm(act.apply(inverse_word(w1), act.apply(w1, x)) - x) <
        1e-10);
}

TEST_CASE("dual_apply: fixed uniform state, pairing identity") {
  GroupAction shift = cyclic_shift_system(3);
  State uniform = State::normalized_trace(shift.algebra);
  State moved = shift.dual_apply({{0, 1}}, uniform);
  CHECK(operator_norm(moved.functional().density_element() -
                      uniform.functional().density_element()) < 1e-12);

  // Point mass moves to the shifted coordinate; pairing identity is the
  // oracle.
  HermitianFunctional point(shift.algebra,
                            diag_element(shift.algebra, {1, 0, 0}).blocks());
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    Element x = random_hermitian(shift.algebra, rng);
    CHECK(std::abs(pair(shift.dual_apply({{0, 1}}, point), x) -
                   pair(point, shift.apply({{0, 1}}, x))) < 1e-12);
  }

  // Property on random systems and words.
  for (int t = 0; t < 30; ++t) {
    GroupAction act = random_z_system(rng, 32);
    HermitianFunctional phi = random_functional(act.algebra, rng);
    Element x = random_hermitian(act.algebra, rng);
    GroupWord w = {{0, 1}, {0, 1}, {0, -1}, {0, 1}};
    CHECK(std::abs(pair(act.dual_apply(w, phi), x) -
                   pair(phi, act.apply(w, x))) < 1e-10);
  }
}

TEST_CASE("dual_apply preserves states and traciality") {
  Rng rng(14);
  for (int t = 0; t < 20; ++t) {
    GroupAction act = random_z_system(rng, 32);
    State s = random_state(act.algebra, rng);
    State moved = act.dual_apply({{0, 1}}, s);  // constructor re-validates
    CHECK(functional_norm(moved.functional()) == doctest::Approx(1.0));
    HermitianFunctional tr = random_tracial_functional(act.algebra, rng);
    CHECK(is_tracial(act.dual_apply({{0, 1}}, tr), 1e-10));
  }
}

TEST_CASE("folner_sets: interval, box, full group") {
  GroupSpec z = GroupSpec::integers();
  auto f3 = folner_sets(FolnerSchedule::interval(), z, 3);
  CHECK(f3.size() == 3);
  CHECK(f3[0].empty());  // identity word

  GroupSpec z2 = GroupSpec::lattice(2);
  CHECK(folner_sets(FolnerSchedule::box(), z2, 2).size() == 4);

  GroupSpec d3 = GroupSpec::finite(dihedral_group_table(3));
  CHECK(folner_sets(FolnerSchedule::full_group(), d3, 1).size() == 6);
  CHECK(folner_sets(FolnerSchedule::full_group(), d3, 7).size() == 6);
}

TEST_CASE("folner_defect: interval, full group, box") {
  GroupSpec z = GroupSpec::integers();
  auto f10 = folner_sets(FolnerSchedule::interval(), z, 10);
  CHECK(folner_defect(f10, {{0, 1}}, Side::Left, z) == doctest::Approx(0.2));

  GroupSpec d3 = GroupSpec::finite(dihedral_group_table(3));
  auto fg = folner_sets(FolnerSchedule::full_group(), d3, 1);
  for (int g = 0; g < 6; ++g)
    CHECK(folner_defect(fg, {{g, 1}}, Side::Left, d3) ==
          doctest::Approx(0.0));

  GroupSpec z2 = GroupSpec::lattice(2);
  auto box10 = folner_sets(FolnerSchedule::box(), z2, 10);
  CHECK(folner_defect(box10, {{0, 1}}, Side::Left, z2) ==
        doctest::Approx(0.2));
}

TEST_CASE("folner_average: unit, cyclic orbit mean, identity action") {
  GroupAction shift = cyclic_shift_system(3);
  auto f3 = folner_sets(FolnerSchedule::interval(), shift.group, 3);
  Element u = Element::unit(shift.algebra);
  CHECK(operator_norm(folner_average(shift, f3, u) - u) < 1e-12);
  Element x = diag_element(shift.algebra, {3, 1, 2});
  Element avg = folner_average(shift, f3, x);
  CHECK(operator_norm(avg - diag_element(shift.algebra, {2, 2, 2})) < 1e-12);

  GroupAction id = identity_system(4);
  Element y = diag_element(id.algebra, {1, 2, 3, 4});
  auto f7 = folner_sets(FolnerSchedule::interval(), id.group, 7);
  CHECK(operator_norm(folner_average(id, f7, y) - y) < 1e-12);
}

TEST_CASE("folner_average: contraction, positivity, serial/parallel match") {
  Rng rng(15);
  for (int t = 0; t < 10; ++t) {
    GroupAction act = random_z_system(rng, 48);
    Element p = random_positive(act.algebra, rng);
    auto f = folner_sets(FolnerSchedule::interval(), act.group, 100);
    Element a_par = folner_average(act, f, p);
    Element a_ser = folner_average_serial(act, f, p);
    CHECK(operator_norm(a_par - a_ser) < 1e-12);
    CHECK(is_positive(a_par, 1e-10));
    CHECK(operator_norm(a_par) <= operator_norm(p) + 1e-10);
  }
}

TEST_CASE("fixed_projector: identity, cyclic shift, inner diagonal") {
  GroupAction id = identity_system(2);
  FixedProjector Eid = fixed_projector(id);
  CHECK(Eid.dim() == 2);
  Element y = diag_element(id.algebra, {0.3, 0.9});
  CHECK(operator_norm(Eid(y) - y) < 1e-12);

  GroupAction shift = cyclic_shift_system(3);
  FixedProjector Es = fixed_projector(shift);
  CHECK(Es.dim() == 1);
  CHECK(fixed_dim(shift) == 1);
  Element x = diag_element(shift.algebra, {3, 1, 2});
  CHECK(operator_norm(Es(x) - diag_element(shift.algebra, {2, 2, 2})) <
        1e-10);

  GroupAction ad = ad_unitary_system(2, m2(1, 0, 0, 1i));
  FixedProjector Ea = fixed_projector(ad);
  CHECK(Ea.dim() == 2);  // diagonal matrices
  Element z(ad.algebra, {m2(1, 5, 7, 2)});
  Element ez = Ea(z);
  CHECK((ez.block(0) - m2(1, 0, 0, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fixed_projector properties and Cesaro cross-check") {
  Rng rng(16);
  for (int t = 0; t < 15; ++t) {
    GroupAction act = t % 2 ? random_z_system(rng, 32, true)
                            : random_finite_system(rng, 32);
    FixedProjector E = fixed_projector(act);
    Element x = random_hermitian(act.algebra, rng);
    CHECK(operator_norm(E(E(x)) - E(x)) < 1e-10);
    CHECK(operator_norm(E(Element::unit(act.algebra)) -
                        Element::unit(act.algebra)) < 1e-10);
    CHECK(std::abs(E(x).trace() - x.trace()) < 1e-10);
    Element p = random_positive(act.algebra, rng);
    CHECK(is_positive(E(p), 1e-10));
    for (const Automorphism& g : act.generators) {
      CHECK(operator_norm(E(g(x)) - E(x)) < 1e-10);
      CHECK(operator_norm(g(E(x)) - E(x)) < 1e-10);
    }
    Mat c = cesaro_projector_matrix(act);
    Eigen::JacobiSVD<Mat> svd(E.matrix() - c);
    CHECK(svd.singularValues()(0) < 1e-6);
  }
  CHECK_THROWS_AS(
      fixed_projector(GroupAction(GroupSpec::free_words({"a"}), Algebra({2}),
                                  {Automorphism::identity(Algebra({2}))})),
      Error);
}

TEST_CASE("mean-ergodic consistency: averages approach E") {
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    GroupAction act = random_z_system(rng, 32, true);
    FixedProjector E = fixed_projector(act);
    Element x = random_hermitian(act.algebra, rng);
    auto f = folner_sets(FolnerSchedule::interval(), act.group, 2000);
    CHECK(operator_norm(folner_average(act, f, x) - E(x)) < 0.2);
  }
}

TEST_CASE("commutator_decay: abelian, center, Ad_X non-decay") {
  GroupAction shift = cyclic_shift_system(4);
  Element a = diag_element(shift.algebra, {1, 2, 3, 4});
  Element b = diag_element(shift.algebra, {4, 3, 2, 1});
  std::vector<GroupWord> words = {{}, {{0, 1}}, {{0, 1}, {0, 1}}};
  for (double v : commutator_decay(shift, words, a, b))
    CHECK(v == doctest::Approx(0.0));

  GroupAction ad = ad_unitary_system(2, m2(0, 1, 1, 0));
  Element e01(ad.algebra, {m2(0, 1, 0, 0)});
  Element u = Element::unit(ad.algebra);
  for (double v : commutator_decay(ad, words, e01, u))
    CHECK(v == doctest::Approx(0.0));
  std::vector<double> nz = commutator_decay(ad, words, e01, e01 + e01.adjoint());
  for (double v : nz) CHECK(v > 0.5);
}

TEST_CASE("group table and action validation") {
  // Table with a bad entry is rejected.
  CHECK_THROWS_AS(FiniteGroupTable({"e", "a"}, {{0, 1}, {1, 1}}), Error);
  // Non-commuting lattice generators are rejected with the residual.
  Algebra alg({2});
  Automorphism adx = Automorphism::inner(alg, {m2(0, 1, 1, 0)});
  Automorphism adq = Automorphism::inner(alg, {m2(1, 0, 0, 1i)});
  // Ad_X Ad_q Ad_X⁻¹ Ad_q⁻¹ = Ad(diag(i,−i)), not the identity map.
  CHECK_THROWS_WITH_AS(
      GroupAction(GroupSpec::lattice(2), alg, {adx, adq}),
      doctest::Contains("do not commute"), Error);
  // A finite action must respect the multiplication table: Ad(diag(1,i))
  // has order 4, not 2.
  FiniteGroupTable z2 = cyclic_group_table(2);
  CHECK_THROWS_AS(GroupAction(GroupSpec::finite(z2), alg,
                              {Automorphism::identity(alg), adq}),
                  Error);
  // Ad_X genuinely has order 2, so the honest assignment passes.
  GroupAction ok(GroupSpec::finite(z2), alg,
                 {Automorphism::identity(alg), adx});
  CHECK(ok.generators.size() == 2);
}

TEST_CASE("hermitian coordinates are isometric and invertible") {
  Rng rng(18);
  for (int t = 0; t < 20; ++t) {
    Algebra alg = random_algebra(rng, 32);
    Element x = random_hermitian(alg, rng);
    RealVec v = hermitian_coordinates(x);
    CHECK(std::abs(v.norm() - x.coordinates().norm()) < 1e-12);
    CHECK(operator_norm(element_from_hermitian(alg, v) - x) < 1e-12);
  }
}
