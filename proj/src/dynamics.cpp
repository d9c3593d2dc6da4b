#include "ncx/dynamics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ncx {

namespace {

bool is_valid_perm(const std::vector<int>& p) {
  std::vector<char> seen(p.size(), 0);
  for (int i : p) {
    if (i < 0 || i >= static_cast<int>(p.size()) || seen[static_cast<size_t>(i)])
      return false;
    seen[static_cast<size_t>(i)] = 1;
  }
  return true;
}

std::vector<int> invert_perm(const std::vector<int>& p) {
  std::vector<int> inv(p.size());
  for (size_t i = 0; i < p.size(); ++i)
    inv[static_cast<size_t>(p[i])] = static_cast<int>(i);
  return inv;
}

}  // namespace

Automorphism::Automorphism(Algebra alg, std::vector<int> p, std::vector<Mat> u)
    : algebra(std::move(alg)), perm(std::move(p)), unitaries(std::move(u)) {
  const auto& dims = algebra.block_dims;
  if (perm.size() != dims.size() || unitaries.size() != dims.size())
    throw Error("Automorphism: permutation/unitary count mismatch");
  if (!is_valid_perm(perm)) throw Error("Automorphism: invalid permutation");
  for (size_t i = 0; i < dims.size(); ++i) {
    int n = dims[i];
    if (dims[static_cast<size_t>(perm[i])] != n)
      throw Error("Automorphism: permutation mixes unequal block dimensions");
    const Mat& ui = unitaries[i];
    if (ui.rows() != n || ui.cols() != n)
      throw Error("Automorphism: unitary " + std::to_string(i) +
                  " has wrong shape");
    if ((ui.adjoint() * ui - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw Error("Automorphism: block " + std::to_string(i) +
                  " matrix is not unitary");
  }
}

Automorphism Automorphism::identity(const Algebra& alg) {
  std::vector<int> p(static_cast<size_t>(alg.num_blocks()));
  std::iota(p.begin(), p.end(), 0);
  std::vector<Mat> u;
  for (int n : alg.block_dims) u.push_back(Mat::Identity(n, n));
  return Automorphism(alg, std::move(p), std::move(u));
}

Automorphism Automorphism::inner(const Algebra& alg, std::vector<Mat> u) {
  std::vector<int> p(static_cast<size_t>(alg.num_blocks()));
  std::iota(p.begin(), p.end(), 0);
  return Automorphism(alg, std::move(p), std::move(u));
}

Automorphism Automorphism::permutation(const Algebra& alg,
                                       std::vector<int> p) {
  std::vector<Mat> u;
  for (int n : alg.block_dims) u.push_back(Mat::Identity(n, n));
  return Automorphism(alg, std::move(p), std::move(u));
}

Element Automorphism::operator()(const Element& x) const {
  require_same_algebra(algebra, x.algebra(), "Automorphism::apply");
  std::vector<Mat> out(static_cast<size_t>(x.num_blocks()));
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = unitaries[i] * x.block(perm[i]) * unitaries[i].adjoint();
  return Element(algebra, std::move(out));
}

Automorphism Automorphism::inverse() const {
  std::vector<int> pinv = invert_perm(perm);
  std::vector<Mat> u(unitaries.size());
  for (size_t j = 0; j < u.size(); ++j)
    u[j] = unitaries[static_cast<size_t>(pinv[j])].adjoint();
  return Automorphism(algebra, std::move(pinv), std::move(u));
}

Automorphism compose(const Automorphism& f, const Automorphism& g) {
  require_same_algebra(f.algebra, g.algebra, "compose");
  std::vector<int> p(f.perm.size());
  std::vector<Mat> u(f.perm.size());
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = g.perm[static_cast<size_t>(f.perm[i])];
    u[i] = f.unitaries[i] * g.unitaries[static_cast<size_t>(f.perm[i])];
  }
  return Automorphism(f.algebra, std::move(p), std::move(u));
}

Mat Automorphism::coordinate_matrix() const {
  int d = algebra.coord_dim();
  Mat m(d, d);
  for (int j = 0; j < d; ++j) {
    Vec e = Vec::Zero(d);
    e(j) = 1.0;
    m.col(j) = (*this)(Element::from_coordinates(algebra, e)).coordinates();
  }
  return m;
}

FiniteGroupTable::FiniteGroupTable(std::vector<std::string> lbls,
                                   std::vector<std::vector<int>> table)
    : labels(std::move(lbls)), mul(std::move(table)) {
  int n = order();
  if (n == 0) throw Error("FiniteGroupTable: empty group");
  if (static_cast<int>(mul.size()) != n)
    throw Error("FiniteGroupTable: table row count mismatch");
  for (const auto& row : mul) {
    if (static_cast<int>(row.size()) != n)
      throw Error("FiniteGroupTable: table column count mismatch");
    for (int v : row)
      if (v < 0 || v >= n) throw Error("FiniteGroupTable: entry out of range");
  }
  // Identity: e with e·g = g·e = g for all g.
  for (int e = 0; e < n; ++e) {
    bool ok = true;
    for (int g = 0; g < n && ok; ++g)
      ok = mul[static_cast<size_t>(e)][static_cast<size_t>(g)] == g &&
           mul[static_cast<size_t>(g)][static_cast<size_t>(e)] == g;
    if (ok) {
      identity = e;
      break;
    }
  }
  if (identity < 0) throw Error("FiniteGroupTable: no identity element");
  inverse.assign(static_cast<size_t>(n), -1);
  for (int g = 0; g < n; ++g) {
    for (int h = 0; h < n; ++h) {
      if (mul[static_cast<size_t>(g)][static_cast<size_t>(h)] == identity &&
          mul[static_cast<size_t>(h)][static_cast<size_t>(g)] == identity) {
        inverse[static_cast<size_t>(g)] = h;
        break;
      }
    }
    if (inverse[static_cast<size_t>(g)] < 0)
      throw Error("FiniteGroupTable: element " + std::to_string(g) +
                  " has no inverse");
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        int ab = mul[static_cast<size_t>(a)][static_cast<size_t>(b)];
        int bc = mul[static_cast<size_t>(b)][static_cast<size_t>(c)];
        if (mul[static_cast<size_t>(ab)][static_cast<size_t>(c)] !=
            mul[static_cast<size_t>(a)][static_cast<size_t>(bc)])
          throw Error("FiniteGroupTable: table is not associative");
      }
}

GroupSpec GroupSpec::integers() {
  GroupSpec g;
  g.kind = Kind::Integers;
  return g;
}

GroupSpec GroupSpec::lattice(int d) {
  if (d < 1) throw Error("GroupSpec::lattice: dimension must be positive");
  GroupSpec g;
  g.kind = Kind::Lattice;
  g.lattice_dim = d;
  return g;
}

GroupSpec GroupSpec::finite(FiniteGroupTable t) {
  GroupSpec g;
  g.kind = Kind::Finite;
  g.table = std::move(t);
  return g;
}

GroupSpec GroupSpec::free_words(std::vector<std::string> gens) {
  if (gens.empty()) throw Error("GroupSpec::free_words: needs generators");
  GroupSpec g;
  g.kind = Kind::FreeWords;
  g.free_generators = std::move(gens);
  return g;
}

int GroupSpec::num_generators() const {
  switch (kind) {
    case Kind::Integers:
      return 1;
    case Kind::Lattice:
      return lattice_dim;
    case Kind::Finite:
      return table.order();
    case Kind::FreeWords:
      return static_cast<int>(free_generators.size());
  }
  return 0;
}

GroupWord inverse_word(const GroupWord& w) {
  GroupWord out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it)
    out.push_back({it->generator, -it->exponent});
  return out;
}

GroupWord concat_words(const GroupWord& a, const GroupWord& b) {
  GroupWord out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string reduce_word_key(const GroupSpec& group, const GroupWord& w) {
  std::ostringstream os;
  switch (group.kind) {
    case GroupSpec::Kind::Integers: {
      long s = 0;
      for (const Letter& l : w) {
        if (l.generator != 0) throw Error("word: unknown generator index");
        s += l.exponent;
      }
      os << s;
      break;
    }
    case GroupSpec::Kind::Lattice: {
      std::vector<long> s(static_cast<size_t>(group.lattice_dim), 0);
      for (const Letter& l : w) {
        if (l.generator < 0 || l.generator >= group.lattice_dim)
          throw Error("word: unknown generator index");
        s[static_cast<size_t>(l.generator)] += l.exponent;
      }
      for (long v : s) os << v << ",";
      break;
    }
    case GroupSpec::Kind::Finite: {
      int e = group.table.identity;
      for (const Letter& l : w) {
        if (l.generator < 0 || l.generator >= group.table.order())
          throw Error("word: unknown generator index");
        int g = l.exponent >= 0
                    ? l.generator
                    : group.table.inverse[static_cast<size_t>(l.generator)];
        e = group.table.mul[static_cast<size_t>(e)][static_cast<size_t>(g)];
      }
      os << e;
      break;
    }
    case GroupSpec::Kind::FreeWords: {
      std::vector<Letter> red;
      for (const Letter& l : w) {
        if (l.generator < 0 ||
            l.generator >= static_cast<int>(group.free_generators.size()))
          throw Error("word: unknown generator index");
        if (!red.empty() && red.back().generator == l.generator &&
            red.back().exponent == -l.exponent)
          red.pop_back();
        else
          red.push_back(l);
      }
      for (const Letter& l : red) os << l.generator << "^" << l.exponent << ".";
      break;
    }
  }
  return os.str();
}

GroupAction::GroupAction(GroupSpec g, Algebra alg,
                         std::vector<Automorphism> gens, double tol)
    : group(std::move(g)), algebra(std::move(alg)), generators(std::move(gens)) {
  if (static_cast<int>(generators.size()) != group.num_generators())
    throw Error("GroupAction: generator count mismatch");
  for (const Automorphism& a : generators)
    require_same_algebra(algebra, a.algebra, "GroupAction");
  generator_inverses_.reserve(generators.size());
  for (const Automorphism& a : generators)
    generator_inverses_.push_back(a.inverse());
  validate(tol);
}

void GroupAction::validate(double tol) const {
  if (group.kind == GroupSpec::Kind::Lattice) {
    // Generators must pairwise commute on the coordinate basis.
    std::vector<Mat> mats;
    for (const Automorphism& a : generators)
      mats.push_back(a.coordinate_matrix());
    for (size_t i = 0; i < mats.size(); ++i)
      for (size_t j = i + 1; j < mats.size(); ++j) {
        double r = (mats[i] * mats[j] - mats[j] * mats[i]).cwiseAbs().maxCoeff();
        if (r > tol)
          throw Error("GroupAction: lattice generators " + std::to_string(i) +
                      " and " + std::to_string(j) +
                      " do not commute (residual " + std::to_string(r) + ")");
      }
  } else if (group.kind == GroupSpec::Kind::Finite) {
    // The per-element map must respect the full multiplication table.
    std::vector<Mat> mats;
    for (const Automorphism& a : generators)
      mats.push_back(a.coordinate_matrix());
    int n = group.table.order();
    if (generators[static_cast<size_t>(group.table.identity)]
            .coordinate_matrix()
            .isApprox(Mat::Identity(algebra.coord_dim(), algebra.coord_dim()),
                      tol) == false)
      throw Error("GroupAction: identity element does not act as identity");
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        int ab = group.table.mul[static_cast<size_t>(a)][static_cast<size_t>(b)];
        double r = (mats[static_cast<size_t>(a)] * mats[static_cast<size_t>(b)] -
                    mats[static_cast<size_t>(ab)])
                       .cwiseAbs()
                       .maxCoeff();
        if (r > tol)
          throw Error(
              "GroupAction: finite action violates the multiplication table "
              "at (" +
              std::to_string(a) + "," + std::to_string(b) + "), residual " +
              std::to_string(r));
      }
  }
  // FreeWords: no relation check (caller-asserted).
}

Element GroupAction::apply_generator(int gen, int exponent,
                                     const Element& x) const {
  if (gen < 0 || gen >= static_cast<int>(generators.size()))
    throw Error("GroupAction: unknown generator index " + std::to_string(gen));
  return exponent >= 0 ? generators[static_cast<size_t>(gen)](x)
                       : generator_inverses_[static_cast<size_t>(gen)](x);
}

Element GroupAction::apply(const GroupWord& w, const Element& x) const {
  // Θ_{g1^e1 ... gL^eL} x, innermost letter first.
  Element y = x;
  for (auto it = w.rbegin(); it != w.rend(); ++it)
    y = apply_generator(it->generator, it->exponent, y);
  return y;
}

HermitianFunctional GroupAction::dual_apply(
    const GroupWord& w, const HermitianFunctional& phi) const {
  require_same_algebra(algebra, phi.algebra(), "dual_apply");
  // The dual of a trace-preserving automorphism on densities is its inverse.
  Element h = apply(inverse_word(w), phi.density_element());
  return HermitianFunctional(algebra, h.blocks());
}

State GroupAction::dual_apply(const GroupWord& w, const State& phi) const {
  return State(dual_apply(w, phi.functional()));
}

FolnerSchedule FolnerSchedule::interval(Side s) {
  FolnerSchedule f;
  f.side = s;
  f.kind = Kind::Interval;
  return f;
}

FolnerSchedule FolnerSchedule::box(Side s) {
  FolnerSchedule f;
  f.side = s;
  f.kind = Kind::Box;
  return f;
}

FolnerSchedule FolnerSchedule::full_group(Side s) {
  FolnerSchedule f;
  f.side = s;
  f.kind = Kind::FullGroup;
  return f;
}

FolnerSchedule FolnerSchedule::explicit_sets_of(
    std::vector<std::vector<GroupWord>> sets, Side s) {
  for (const auto& F : sets)
    if (F.empty()) throw Error("FolnerSchedule: empty averaging set");
  FolnerSchedule f;
  f.side = s;
  f.kind = Kind::Explicit;
  f.explicit_sets = std::move(sets);
  return f;
}

std::string FolnerSchedule::describe() const {
  std::string s = side == Side::Left ? "left " : "right ";
  switch (kind) {
    case Kind::Interval:
      return s + "interval";
    case Kind::Box:
      return s + "box";
    case Kind::FullGroup:
      return s + "full-group";
    case Kind::Explicit:
      return s + "explicit";
  }
  return s;
}

std::vector<GroupWord> folner_sets(const FolnerSchedule& sched,
                                   const GroupSpec& group, long k) {
  if (k < 1) throw Error("folner_sets: k must be positive");
  std::vector<GroupWord> out;
  switch (sched.kind) {
    case FolnerSchedule::Kind::Interval: {
      if (group.kind != GroupSpec::Kind::Integers)
        throw Error("folner_sets: interval schedule requires Z");
      for (long j = 0; j < k; ++j) {
        GroupWord w;
        for (long t = 0; t < j; ++t) w.push_back({0, 1});
        out.push_back(std::move(w));
      }
      break;
    }
    case FolnerSchedule::Kind::Box: {
      if (group.kind != GroupSpec::Kind::Lattice)
        throw Error("folner_sets: box schedule requires Z^d");
      int d = group.lattice_dim;
      std::vector<long> idx(static_cast<size_t>(d), 0);
      while (true) {
        GroupWord w;
        for (int g = 0; g < d; ++g)
          for (long t = 0; t < idx[static_cast<size_t>(g)]; ++t)
            w.push_back({g, 1});
        out.push_back(std::move(w));
        int g = 0;
        while (g < d && ++idx[static_cast<size_t>(g)] == k) {
          idx[static_cast<size_t>(g)] = 0;
          ++g;
        }
        if (g == d) break;
      }
      break;
    }
    case FolnerSchedule::Kind::FullGroup: {
      if (group.kind != GroupSpec::Kind::Finite)
        throw Error("folner_sets: full-group schedule requires a finite group");
      for (int g = 0; g < group.table.order(); ++g) out.push_back({{g, 1}});
      break;
    }
    case FolnerSchedule::Kind::Explicit: {
      if (k > static_cast<long>(sched.explicit_sets.size()))
        throw Error("folner_sets: explicit schedule exhausted at k = " +
                    std::to_string(k));
      out = sched.explicit_sets[static_cast<size_t>(k - 1)];
      break;
    }
  }
  return out;
}

double folner_defect(const std::vector<GroupWord>& F, const GroupWord& g,
                     Side side, const GroupSpec& group) {
  std::unordered_set<std::string> base, shifted;
  for (const GroupWord& f : F) {
    base.insert(reduce_word_key(group, f));
    GroupWord t = side == Side::Left ? concat_words(g, f) : concat_words(f, g);
    shifted.insert(reduce_word_key(group, t));
  }
  size_t common = 0;
  for (const auto& key : shifted)
    if (base.count(key)) ++common;
  size_t sym_diff = (base.size() - common) + (shifted.size() - common);
  return static_cast<double>(sym_diff) / static_cast<double>(base.size());
}

Element folner_average_serial(const GroupAction& action,
                              const std::vector<GroupWord>& F,
                              const Element& x) {
  if (F.empty()) throw Error("folner_average: empty averaging set");
  Element sum = Element::zero(action.algebra);
  for (const GroupWord& w : F) sum += action.apply(w, x);
  return sum * Complex(1.0 / static_cast<double>(F.size()), 0.0);
}

Element folner_average(const GroupAction& action,
                       const std::vector<GroupWord>& F, const Element& x) {
  if (F.empty()) throw Error("folner_average: empty averaging set");
#ifdef _OPENMP
  const long n = static_cast<long>(F.size());
  if (n >= 64) {
    int threads = omp_get_max_threads();
    std::vector<Element> partial(static_cast<size_t>(threads),
                                 Element::zero(action.algebra));
#pragma omp parallel
    {
      int t = omp_get_thread_num();
      Element local = Element::zero(action.algebra);
#pragma omp for schedule(static)
      for (long i = 0; i < n; ++i)
        local += action.apply(F[static_cast<size_t>(i)], x);
      partial[static_cast<size_t>(t)] = std::move(local);
    }
    Element sum = Element::zero(action.algebra);
    for (Element& p : partial) sum += p;  // fixed merge order
    return sum * Complex(1.0 / static_cast<double>(n), 0.0);
  }
#endif
  return folner_average_serial(action, F, x);
}

FixedProjector::FixedProjector(Algebra alg, Mat kernel_basis)
    : algebra_(std::move(alg)), basis_(std::move(kernel_basis)) {
  matrix_ = basis_ * basis_.adjoint();
}

Element FixedProjector::operator()(const Element& x) const {
  require_same_algebra(algebra_, x.algebra(), "FixedProjector");
  return Element::from_coordinates(algebra_, matrix_ * x.coordinates());
}

namespace {

std::vector<Mat> generator_matrices(const GroupAction& action) {
  std::vector<Mat> mats;
  mats.reserve(action.generators.size());
  for (const Automorphism& a : action.generators)
    mats.push_back(a.coordinate_matrix());
  return mats;
}

void require_projector_group(const GroupAction& action, const char* where) {
  if (action.group.kind == GroupSpec::Kind::FreeWords)
    throw Error(std::string(where) +
                ": no fixed-space oracle for free-word groups");
}

}  // namespace

FixedProjector fixed_projector(const GroupAction& action) {
  require_projector_group(action, "fixed_projector");
  int d = action.algebra.coord_dim();
  std::vector<Mat> mats = generator_matrices(action);
  Mat stacked(static_cast<long>(mats.size()) * d, d);
  for (size_t i = 0; i < mats.size(); ++i)
    stacked.middleRows(static_cast<long>(i) * d, d) = mats[i] - Mat::Identity(d, d);
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-9 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  Mat basis = svd.matrixV().rightCols(d - rank);
  return FixedProjector(action.algebra, std::move(basis));
}

Mat cesaro_projector_matrix(const GroupAction& action, int doublings) {
  require_projector_group(action, "cesaro_projector_matrix");
  using LMat = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic,
                             Eigen::Dynamic>;
  int d = action.algebra.coord_dim();
  std::vector<Mat> mats = generator_matrices(action);
  Mat a0 = Mat::Zero(d, d);
  for (const Mat& m : mats) a0 += m + m.adjoint();
  a0 /= static_cast<double>(2 * mats.size());

  // A is a self-adjoint contraction up to rounding; clamp its spectrum to
  // [-1, 1] so that repeated squaring cannot blow up, and accumulate in
  // extended precision: iterated powering amplifies eigenvalue rounding by
  // the total term count N, so N·eps must stay below the 1e-6 agreement
  // target (long double keeps N ≤ 2^42 safe).
  LMat a = a0.cast<std::complex<long double>>();
  a = ((a + a.adjoint()) / 2.0L).eval();
  Eigen::SelfAdjointEigenSolver<LMat> es(a);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> ev = es.eigenvalues();
  for (int i = 0; i < d; ++i) {
    // Snap eigenvalues within rounding distance of ±1 back onto ±1: A is an
    // average of unitary-conjugation matrices, so |λ| = 1 happens exactly
    // (fixed or order-2 modes) and rounding noise of ~1e-15 would otherwise
    // be amplified by the N ≈ 2^42 accumulated terms.
    if (std::abs(ev(i) - 1.0L) <= 1e-12L) ev(i) = 1.0L;
    if (std::abs(ev(i) + 1.0L) <= 1e-12L) ev(i) = -1.0L;
    ev(i) = std::min<long double>(1.0L, std::max<long double>(-1.0L, ev(i)));
  }
  a = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

  // Cesàro mean C_N = (1/N) Σ_{n<N} A^n accumulated by doubling:
  //   C_{2N} = (C_N + A^N C_N)/2,  A^{2N} = (A^N)²,
  // run on A's eigenvalues (the doubling recursion diagonalizes) and stopped
  // once the means are Cauchy. Scalar accumulation avoids the drift of
  // repeated matrix squaring, which compounds multiplicatively.
  int cap = std::max(doublings, 200);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> c(d);
  for (int i = 0; i < d; ++i) {
    long double lambda = ev(i);
    long double ci = 1.0L, p = lambda;
    for (int m = 0; m < cap; ++m) {
      long double next = (ci + p * ci) / 2.0L;
      long double delta = std::abs(next - ci);
      ci = next;
      if (delta <= 1e-14L && m >= 4) break;
      p *= p;
    }
    c(i) = ci;
  }
  LMat out = es.eigenvectors() * c.asDiagonal() * es.eigenvectors().adjoint();
  return out.cast<Complex>();
}

int fixed_dim(const GroupAction& action) {
  return fixed_projector(action).dim();
}

std::vector<double> commutator_decay(const GroupAction& action,
                                     const std::vector<GroupWord>& words,
                                     const Element& a, const Element& b) {
  std::vector<double> out;
  out.reserve(words.size());
  for (const GroupWord& w : words) {
    Element ta = action.apply(w, a);
    out.push_back(operator_norm(ta * b - b * ta));
  }
  return out;
}

RealVec hermitian_coordinates(const Element& x) {
  const Algebra& alg = x.algebra();
  RealVec v(alg.coord_dim());
  int off = 0;
  const double s = std::sqrt(2.0);
  for (int b = 0; b < alg.num_blocks(); ++b) {
    const Mat& m = x.block(b);
    int n = static_cast<int>(m.rows());
    for (int i = 0; i < n; ++i) v(off++) = m(i, i).real();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        v(off++) = s * m(i, j).real();
        v(off++) = s * m(i, j).imag();
      }
  }
  return v;
}

Element element_from_hermitian(const Algebra& alg, const RealVec& v) {
  if (v.size() != alg.coord_dim())
    throw Error("element_from_hermitian: wrong vector length");
  std::vector<Mat> blocks;
  int off = 0;
  const double s = 1.0 / std::sqrt(2.0);
  for (int n : alg.block_dims) {
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = v(off++);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double re = v(off++) * s;
        double im = v(off++) * s;
        m(i, j) = Complex(re, im);
        m(j, i) = Complex(re, -im);
      }
    blocks.push_back(std::move(m));
  }
  return Element(alg, std::move(blocks));
}

std::vector<Element> hermitian_basis(const Algebra& alg) {
  int d = alg.coord_dim();
  std::vector<Element> basis;
  basis.reserve(static_cast<size_t>(d));
  for (int j = 0; j < d; ++j) {
    RealVec e = RealVec::Zero(d);
    e(j) = 1.0;
    basis.push_back(element_from_hermitian(alg, e));
  }
  return basis;
}

Eigen::MatrixXd hermitian_matrix_of(
    const Algebra& alg, const std::function<Element(const Element&)>& f) {
  int d = alg.coord_dim();
  Eigen::MatrixXd m(d, d);
  for (int j = 0; j < d; ++j) {
    RealVec e = RealVec::Zero(d);
    e(j) = 1.0;
    m.col(j) = hermitian_coordinates(f(element_from_hermitian(alg, e)));
  }
  return m;
}

}  // namespace ncx
