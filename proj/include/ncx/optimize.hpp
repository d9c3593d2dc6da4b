#pragma once

// Ergodic optimization over invariant states: m(a|K) for the supported
// convex bodies, maximizing faces, extreme invariant states and their
// exposing observables, Krylov–Bogolyubov averaging, annihilator
// feasibility, and the quotient correspondence check.

#include <optional>

#include "ncx/dynamics.hpp"

namespace ncx {

struct ConvexBodySpec {
  enum class Kind { SG, TG, AnnIdeal, AnnSet, Intersection };
  Kind kind = Kind::SG;
  std::vector<int> ideal_blocks;        // AnnIdeal: kernel block indices
  std::vector<Element> annihilated;     // AnnSet
  std::vector<ConvexBodySpec> factors;  // Intersection

  static ConvexBodySpec sg() { return {}; }
  static ConvexBodySpec tg() {
    ConvexBodySpec k;
    k.kind = Kind::TG;
    return k;
  }
  static ConvexBodySpec ann_ideal(std::vector<int> blocks) {
    ConvexBodySpec k;
    k.kind = Kind::AnnIdeal;
    k.ideal_blocks = std::move(blocks);
    return k;
  }
  static ConvexBodySpec ann_set(std::vector<Element> elems) {
    ConvexBodySpec k;
    k.kind = Kind::AnnSet;
    k.annihilated = std::move(elems);
    return k;
  }
  static ConvexBodySpec intersection(std::vector<ConvexBodySpec> parts) {
    ConvexBodySpec k;
    k.kind = Kind::Intersection;
    k.factors = std::move(parts);
    return k;
  }
};

struct FaceDescriptor {
  Element projector;  // spectral projector supporting the face
  int affine_dim = 0;
};

struct MaxOptions {
  int restarts = 8;
  int max_iters = 400;
  double tol = 1e-8;
  double cluster_width = 1e-8;  // relative eigenvalue cluster width
  unsigned seed = 12345;
};

struct OptimizationResult {
  double value = 0;
  State maximizer;
  std::string method;
  std::optional<FaceDescriptor> face;
  bool feasible = true;
  double invariance_defect = 0;
  double constraint_defect = 0;
  double pair_defect = 0;
  std::optional<double> upper_bound;  // spectral bound max-eig E(a) when K ⊆ S^G
};

/// m(a|K) = sup{φ(a) : φ ∈ K} with a maximizing state.
OptimizationResult m_max(const GroupAction& action, const Element& a,
                         const ConvexBodySpec& body,
                         const MaxOptions& opts = {});

/// The exposed face K_max(a) of S^G: top-eigenvalue-cluster spectral
/// projector of E(a) and the affine dimension of the supported invariant
/// states. Dimension 0 iff the maximizer is unique.
FaceDescriptor maximizing_face(const GroupAction& action, const Element& a,
                               double cluster_width = 1e-8);

/// Extreme points of S^G when the fixed algebra is abelian: the states
/// p_j / tr(p_j) over its minimal projections. Throws when the fixed
/// algebra is non-abelian, naming the obstruction.
std::vector<State> extreme_invariant_states(const GroupAction& action,
                                            unsigned seed = 7);

/// The minimal fixed-algebra projection supporting an extreme invariant
/// state: m(x|S^G) = 1 with unique maximizer φ, and every other extreme
/// state pairs to 0.
Element exposing_observable(const GroupAction& action, const State& phi,
                            double match_tol = 1e-8);

struct KBResult {
  State state;
  double defect = 0;        // max_g ‖ψ_k − ψ_k∘Θ_g‖
  double folner_bound = 0;  // 2 · max generator Følner defect of F_k
  long set_size = 0;
};

/// Krylov–Bogolyubov average ψ_k = (1/|F_k|) Σ_{g∈F_k} φ∘Θ_g.
KBResult krylov_bogolyubov(const GroupAction& action, const State& seed,
                           const FolnerSchedule& schedule, long k);

struct AnnFeasibility {
  bool feasible = false;
  std::optional<State> witness;
  double best_min_eigenvalue = 0;
  std::string note;
};

AnnFeasibility ann_feasibility(const GroupAction& action,
                               const ConvexBodySpec& body,
                               const MaxOptions& opts = {});

struct QuotientReport {
  double quotient_value = 0;     // m(π(a)|S̃^G), oracle on the quotient system
  double constrained_value = 0;  // m(a|Ann(ker π)), computed in the ambient
  double gap = 0;
};

/// Two independent routes to the same number: the quotient system's own
/// spectral oracle versus the in-system compression of E(a) off the kernel
/// blocks.
QuotientReport quotient_correspondence_check(const GroupAction& action,
                                             const std::vector<int>& kernel_blocks,
                                             const Element& a);

/// Orbits of block indices under the generators' block permutations.
std::vector<std::vector<int>> block_orbits(const GroupAction& action);

/// The induced system on the blocks not listed in `dropped` (which must be
/// invariant under every generator permutation). Returns the sub-action and
/// the kept block indices in their original order.
std::pair<GroupAction, std::vector<int>> quotient_system(
    const GroupAction& action, const std::vector<int>& dropped);

/// Restriction of an element to the quotient's blocks (the map π).
Element quotient_map(const Element& x, const Algebra& quot,
                     const std::vector<int>& kept);

}  // namespace ncx
