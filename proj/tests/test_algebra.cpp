#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <complex>

#include "doctest.h"
#include "ncx/algebra.hpp"
#include "ncx/systems.hpp"

using namespace ncx;
using namespace std::complex_literals;

namespace {

Mat m2(Complex a, Complex b, Complex c, Complex d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat diag2(double a, double b) { return m2(a, 0, 0, b); }

}  // namespace

TEST_CASE("element arithmetic and trace inner product") {
  Algebra alg({2, 1});
  Element x(alg, {m2(1, 2, 3, 4), Mat::Constant(1, 1, 5.0)});
  Element y = x + x;
  CHECK(y.block(0)(1, 0) == Complex(6, 0));
  CHECK(x.trace() == Complex(10, 0));
  CHECK((x - x).coordinates().norm() == doctest::Approx(0.0));
  // coordinates() is an isometry for tr(x†y).
  Rng rng(1);
  Element a = random_hermitian(alg, rng), b = random_hermitian(alg, rng);
  Complex ip = 0;
  for (int i = 0; i < alg.num_blocks(); ++i)
    ip += (a.block(i).adjoint() * b.block(i)).trace();
  CHECK(std::abs(a.coordinates().dot(b.coordinates()) - ip) < 1e-12);
  CHECK(Element::unit(alg).trace() == Complex(3, 0));
}

TEST_CASE("herm_spectrum contract: descending, orthonormal, residual") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    Algebra alg = random_algebra(rng, 32);
    Element x = random_hermitian(alg, rng);
    BlockSpectrum sp = herm_spectrum(x);
    for (int i = 0; i < alg.num_blocks(); ++i) {
      const RealVec& ev = sp.eigenvalues[static_cast<size_t>(i)];
      const Mat& v = sp.eigenvectors[static_cast<size_t>(i)];
      for (int j = 0; j + 1 < ev.size(); ++j) CHECK(ev(j) >= ev(j + 1));
      CHECK((v.adjoint() * v - Mat::Identity(v.cols(), v.cols()))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
      Mat recon = v * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
                  v.adjoint();
      CHECK((recon - x.block(i)).cwiseAbs().maxCoeff() <
            1e-10 * (1 + operator_norm(x)));
    }
  }
}

TEST_CASE("operator_norm and positivity") {
  Algebra alg({2});
  CHECK(operator_norm(Element(alg, {diag2(3, -4)})) == doctest::Approx(4.0));
  CHECK(is_positive(Element(alg, {diag2(0.5, 0.0)})));
  CHECK(!is_positive(Element(alg, {diag2(0.5, -0.1)})));
  CHECK(is_self_adjoint(Element(alg, {m2(1, 2. + 1i, 2. - 1i, 3)})));
  CHECK(!is_self_adjoint(Element(alg, {m2(1, 2, 3, 4)})));
}

TEST_CASE("functional_norm: states, diagonal, Pauli-X") {
  Algebra alg({2});
  // Any State has norm 1.
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    State s = random_state(alg, rng);
    CHECK(functional_norm(s.functional()) == doctest::Approx(1.0));
  }
  CHECK(functional_norm(HermitianFunctional(alg, {diag2(2, -1)})) ==
        doctest::Approx(3.0));
  CHECK(functional_norm(HermitianFunctional(alg, {m2(0, 1, 1, 0)})) ==
        doctest::Approx(2.0));
}

TEST_CASE("jordan_decompose: diagonal, positive, Pauli-X splits") {
  Algebra alg({2});
  SUBCASE("diag(2,-1)") {
    auto [pos, neg] =
        jordan_decompose(HermitianFunctional(alg, {diag2(2, -1)}));
    CHECK((pos.density_block(0) - diag2(2, 0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((neg.density_block(0) - diag2(0, 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(functional_norm(pos) == doctest::Approx(2.0));
    CHECK(functional_norm(neg) == doctest::Approx(1.0));
  }
  SUBCASE("positive density has zero negative part") {
    auto [pos, neg] =
        jordan_decompose(HermitianFunctional(alg, {diag2(0.7, 0.3)}));
    CHECK(functional_norm(neg) == doctest::Approx(0.0));
    CHECK((pos.density_block(0) - diag2(0.7, 0.3)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  SUBCASE("Pauli-X splits into the rank-one spectral projectors") {
    auto [pos, neg] =
        jordan_decompose(HermitianFunctional(alg, {m2(0, 1, 1, 0)}));
    CHECK((pos.density_block(0) - 0.5 * m2(1, 1, 1, 1)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((neg.density_block(0) - 0.5 * m2(1, -1, -1, 1))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}

TEST_CASE("jordan properties: reconstruction, additivity, orthogonality") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    Algebra alg = random_algebra(rng, 32);
    HermitianFunctional phi = random_functional(alg, rng);
    auto [pos, neg] = jordan_decompose(phi);
    CHECK(is_positive(pos.density_element(), 1e-12));
    CHECK(is_positive(neg.density_element(), 1e-12));
    CHECK(operator_norm(pos.density_element() - neg.density_element() -
                        phi.density_element()) < 1e-10);
    CHECK(std::abs(functional_norm(phi) - functional_norm(pos) -
                   functional_norm(neg)) < 1e-10);
    // Orthogonal supports: the density parts multiply to ~0.
    CHECK(operator_norm(pos.density_element() * neg.density_element()) <
          1e-10);
  }
}

TEST_CASE("is_tracial examples and Jordan stability") {
  Algebra alg({2});
  CHECK(is_tracial(HermitianFunctional(alg, {diag2(0.5, 0.5)})));
  CHECK(!is_tracial(HermitianFunctional(alg, {diag2(0.9, 0.1)})));
  Algebra alg2({2, 2});
  CHECK(is_tracial(
      HermitianFunctional(alg2, {diag2(0.25, 0.25), diag2(0.25, 0.25)})));

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    Algebra a = random_algebra(rng, 32);
    HermitianFunctional phi = random_tracial_functional(a, rng);
    auto [pos, neg] = jordan_decompose(phi);
    CHECK(is_tracial(pos, 1e-9));
    CHECK(is_tracial(neg, 1e-9));
  }
}

TEST_CASE("traciality iff Ad-invariance of the pairing") {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    Algebra alg = random_algebra(rng, 32);
    HermitianFunctional tracial = random_tracial_functional(alg, rng);
    HermitianFunctional generic = random_functional(alg, rng);
    bool generic_tracial = is_tracial(generic, 1e-9);
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<Mat> us;
      for (int n : alg.block_dims) us.push_back(haar_unitary(n, rng));
      Element x = random_hermitian(alg, rng);
      Element uxu(alg, [&] {
        std::vector<Mat> b;
        for (int i = 0; i < alg.num_blocks(); ++i)
          b.push_back(us[static_cast<size_t>(i)] * x.block(i) *
                      us[static_cast<size_t>(i)].adjoint());
        return b;
      }());
      CHECK(std::abs(pair(tracial, uxu) - pair(tracial, x)) < 1e-9);
      if (!generic_tracial && rep == 0) {
        // Some conjugation must move the pairing; sample until one does.
        bool moved = false;
        for (int k = 0; k < 20 && !moved; ++k) {
          std::vector<Mat> vs;
          for (int n : alg.block_dims) vs.push_back(haar_unitary(n, rng));
          Element y = random_hermitian(alg, rng);
          Element vyv(alg, [&] {
            std::vector<Mat> b;
            for (int i = 0; i < alg.num_blocks(); ++i)
              b.push_back(vs[static_cast<size_t>(i)] * y.block(i) *
                          vs[static_cast<size_t>(i)].adjoint());
            return b;
          }());
          moved = std::abs(pair(generic, vyv) - pair(generic, y)) > 1e-9;
        }
        CHECK(moved);
      }
    }
  }
}

TEST_CASE("duality inequality |pair| <= trace norm * operator norm") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Algebra alg = random_algebra(rng, 32);
    HermitianFunctional phi = random_functional(alg, rng);
    Element x = random_hermitian(alg, rng);
    CHECK(std::abs(pair(phi, x)) <=
          functional_norm(phi) * operator_norm(x) + 1e-10);
  }
}

TEST_CASE("State validation") {
  Algebra alg({2});
  CHECK_THROWS_AS(State(HermitianFunctional(alg, {diag2(0.9, -0.1)})
                        ),
                  Error);
  CHECK_THROWS_AS(State(HermitianFunctional(alg, {diag2(0.9, 0.9)})), Error);
  State tr = State::normalized_trace(alg);
  CHECK(functional_norm(tr.functional()) == doctest::Approx(1.0));
  CHECK(is_tracial(tr.functional()));
  CHECK(min_density_eigenvalue(tr) == doctest::Approx(0.5));
}
