#pragma once

// *-automorphisms of block algebras, group actions of Z, Z^d, finite groups
// and free words, Følner schedules with defect accounting, ergodic averaging,
// and the mean-ergodic fixed-point projector.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncx/algebra.hpp"

namespace ncx {

/// Block-permutation-plus-unitary *-automorphism:
///   Θ(x)_i = u_i x_{σ(i)} u_i†.
/// Composition convention: (compose(f, g))(x) = f(g(x)), realized on normal
/// forms as perm[i] = g.perm[f.perm[i]], unitary_i = f.u_i · g.u_{f.perm[i]}.
struct Automorphism {
  Algebra algebra;
  std::vector<int> perm;       // σ
  std::vector<Mat> unitaries;  // u_i, shaped n_i × n_i

  Automorphism() = default;
  Automorphism(Algebra alg, std::vector<int> p, std::vector<Mat> u);

  static Automorphism identity(const Algebra& alg);
  /// Inner automorphism Ad_u on a single-block conjugation pattern: σ = id.
  static Automorphism inner(const Algebra& alg, std::vector<Mat> u);
  /// Pure block permutation (unitaries = identities).
  static Automorphism permutation(const Algebra& alg, std::vector<int> p);

  Element operator()(const Element& x) const;
  Automorphism inverse() const;
  friend Automorphism compose(const Automorphism& f, const Automorphism& g);

  /// Matrix of the automorphism on element coordinates (D×D, D = Σ n_i²).
  Mat coordinate_matrix() const;
};

struct FiniteGroupTable {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mul;  // mul[g][h] = g·h
  int identity = -1;
  std::vector<int> inverse;

  FiniteGroupTable() = default;
  FiniteGroupTable(std::vector<std::string> lbls,
                   std::vector<std::vector<int>> table);
  int order() const { return static_cast<int>(labels.size()); }
};

struct GroupSpec {
  enum class Kind { Integers, Lattice, Finite, FreeWords };
  Kind kind = Kind::Integers;
  int lattice_dim = 0;                      // Lattice only
  FiniteGroupTable table;                   // Finite only
  std::vector<std::string> free_generators; // FreeWords only

  static GroupSpec integers();
  static GroupSpec lattice(int d);
  static GroupSpec finite(FiniteGroupTable t);
  static GroupSpec free_words(std::vector<std::string> gens);

  /// Generator count: 1 for Z, d for Z^d, |G| for finite (every element is
  /// addressable), #labels for free words.
  int num_generators() const;
  bool abelian_builtin() const {
    return kind == Kind::Integers || kind == Kind::Lattice;
  }
};

struct Letter {
  int generator = 0;
  int exponent = 1;  // ±1
};

/// A word over the generators; the empty word is the identity.
using GroupWord = std::vector<Letter>;

/// Reduced form of a word, usable as a set key for defect counting.
/// Integers/Lattice: exponent sums; Finite: element index; FreeWords: the
/// freely reduced letter string.
std::string reduce_word_key(const GroupSpec& group, const GroupWord& w);
GroupWord inverse_word(const GroupWord& w);
GroupWord concat_words(const GroupWord& a, const GroupWord& b);

struct GroupAction {
  GroupSpec group;
  Algebra algebra;
  std::vector<Automorphism> generators;  // one per group generator index

  GroupAction() = default;
  GroupAction(GroupSpec g, Algebra alg, std::vector<Automorphism> gens,
              double tol = kDefaultTol);

  Element apply(const GroupWord& w, const Element& x) const;
  Element apply_generator(int gen, int exponent, const Element& x) const;
  /// Dual action on densities: pair(dual_apply(w, φ), x) = pair(φ, apply(w, x)).
  HermitianFunctional dual_apply(const GroupWord& w,
                                 const HermitianFunctional& phi) const;
  State dual_apply(const GroupWord& w, const State& phi) const;

  const std::vector<Automorphism>& generator_inverses() const {
    return generator_inverses_;
  }

 private:
  void validate(double tol) const;
  std::vector<Automorphism> generator_inverses_;
};

enum class Side { Left, Right };

struct FolnerSchedule {
  enum class Kind { Interval, Box, FullGroup, Explicit };
  Side side = Side::Left;
  Kind kind = Kind::Interval;
  std::vector<std::vector<GroupWord>> explicit_sets;

  static FolnerSchedule interval(Side s = Side::Left);
  static FolnerSchedule box(Side s = Side::Left);
  static FolnerSchedule full_group(Side s = Side::Left);
  static FolnerSchedule explicit_sets_of(std::vector<std::vector<GroupWord>> sets,
                                         Side s = Side::Left);

  std::string describe() const;
};

/// The k-th averaging set F_k as explicit words.
std::vector<GroupWord> folner_sets(const FolnerSchedule& sched,
                                   const GroupSpec& group, long k);

/// |gF Δ F|/|F| (left) or |Fg Δ F|/|F| (right) on reduced elements.
double folner_defect(const std::vector<GroupWord>& F, const GroupWord& g,
                     Side side, const GroupSpec& group);

/// (1/|F|) Σ_{g∈F} Θ_g x — serial reference implementation.
Element folner_average_serial(const GroupAction& action,
                              const std::vector<GroupWord>& F,
                              const Element& x);

/// Same average, OpenMP-parallel over the words of F. Falls back to the
/// serial path for small sets.
Element folner_average(const GroupAction& action,
                       const std::vector<GroupWord>& F, const Element& x);

/// Orthogonal projection, in the trace inner product, onto the joint fixed
/// subspace {x : Θ_g x = x for every generator g}.
class FixedProjector {
 public:
  FixedProjector(Algebra alg, Mat kernel_basis);

  Element operator()(const Element& x) const;
  int dim() const { return static_cast<int>(basis_.cols()); }
  /// D×D matrix of the projection on element coordinates.
  const Mat& matrix() const { return matrix_; }
  /// Orthonormal basis of the fixed subspace (D×r).
  const Mat& kernel_basis() const { return basis_; }
  const Algebra& algebra() const { return algebra_; }

 private:
  Algebra algebra_;
  Mat basis_;
  Mat matrix_;
};

/// Constraint-kernel construction of the projector (errors on FreeWords).
FixedProjector fixed_projector(const GroupAction& action);

/// Independent Cesàro-accumulation construction of the same projector:
/// power averages of the self-adjoint contraction (1/2m) Σ (M_g + M_g†),
/// accumulated by doubling. Cross-check oracle for fixed_projector.
Mat cesaro_projector_matrix(const GroupAction& action, int doublings = 60);

int fixed_dim(const GroupAction& action);

/// n-th entry: ‖[Θ_{g_n} a, b]‖ for the given word sequence.
std::vector<double> commutator_decay(const GroupAction& action,
                                     const std::vector<GroupWord>& words,
                                     const Element& a, const Element& b);

// ---- Hermitian real coordinates -------------------------------------------
// The Hermitian part of the element space is a real vector space of dimension
// D = Σ n_i²; these maps are isometric for the trace inner product.

RealVec hermitian_coordinates(const Element& x);
Element element_from_hermitian(const Algebra& alg, const RealVec& v);
/// Real D×D matrix of a Hermiticity-preserving real-linear map, built by
/// applying `f` to the orthonormal Hermitian basis.
Eigen::MatrixXd hermitian_matrix_of(
    const Algebra& alg, const std::function<Element(const Element&)>& f);
/// The orthonormal Hermitian basis elements themselves.
std::vector<Element> hermitian_basis(const Algebra& alg);

}  // namespace ncx
