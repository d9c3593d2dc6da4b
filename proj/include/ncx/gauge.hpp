#pragma once

// The gauge Γ (limit of operator norms of Følner averages of a positive
// element), subadditivity checks, unique/strict ergodicity verdicts, and
// C*-model checks against the optimization oracle.

#include <optional>

#include "ncx/optimize.hpp"

namespace ncx {

struct GaugeOptions {
  long k_max = 100000;
  double tol = 1e-6;
  int trace_points = 48;  // approximate number of recorded (k, value_k) pairs
};

struct GaugeResult {
  std::vector<std::pair<long, double>> trace;
  double estimate = 0;
  bool converged = false;
  long k_used = 0;
  std::optional<double> oracle_value;  // max-eig E(a) when available
  std::optional<double> oracle_gap;
};

/// Γ(a) along the schedule. For Z the estimate is the running minimum of
/// value_k = ‖Avg_k a‖ over every k (k·value_k is subadditive); for Z^d the
/// boxes are evaluated on a geometric grid of side lengths; for finite
/// groups the k = 1 full-group average is already exact.
GaugeResult gauge(const GroupAction& action, const FolnerSchedule& schedule,
                  const Element& a, const GaugeOptions& opts = {});

/// s_{k+ℓ} ≤ s_k + s_ℓ + 1e-9 for s_k = ‖Σ_{j<k} Θ_j a‖ on the given pairs.
bool subadditivity_check(const GroupAction& action, const Element& a,
                         const std::vector<std::pair<long, long>>& k_pairs);

struct UniqueErgodicityReport {
  bool structural_unique = false;  // fixed_dim == 1
  std::optional<State> unique_state;
  double empirical_max_residual = 0;
  std::optional<bool> strictly_ergodic;
  long k_used = 0;
  std::string schedule_description;
  double schedule_defect = 0;  // max generator Følner defect at k_used
};

struct UniqueErgodicityOptions {
  long k_max = 10000;
  double tol = 1e-3;  // empirical residual threshold
};

/// Structural verdict (fixed_dim == 1) cross-checked against the empirical
/// basis residual at k_max. Disagreement is a hard error: it would falsify
/// the unique-ergodicity equivalence at desk scale, hence indicates a bug.
UniqueErgodicityReport unique_ergodicity(
    const GroupAction& action, const FolnerSchedule& schedule,
    const UniqueErgodicityOptions& opts = {});

/// Uniquely ergodic with a faithful unique invariant state.
bool strict_ergodicity(const GroupAction& action);

/// True iff a Hermitian spanning set of the fixed algebra commutes within
/// tolerance. In finite dimensions S^G is a simplex exactly in this case.
bool fixed_algebra_abelian(const GroupAction& action, double tol = 1e-10);

/// Equivariant block embedding ι of a domain system into an ambient system
/// with a distinguished invariant state ρ. Kernel blocks of the domain map
/// to nothing (non-faithful model); ambient blocks outside the range make ι
/// non-surjective.
struct CStarModel {
  GroupAction domain;
  GroupAction ambient;
  // Per domain block: the ambient block it maps onto, or nullopt (kernel).
  std::vector<std::optional<int>> embedding;
  State rho;

  CStarModel(GroupAction dom, GroupAction amb,
             std::vector<std::optional<int>> emb, State invariant_state,
             double tol = kDefaultTol);

  std::vector<int> kernel_blocks() const;
  bool faithful() const { return kernel_blocks().empty(); }
  Element embed(const Element& x) const;  // ι
  /// Density of ρ∘ι on the domain algebra.
  HermitianFunctional pullback_state_density() const;
};

struct ModelCheckOptions {
  long k_max = 20000;
  double gauge_tol = 1e-8;
  double verdict_tol = 1e-6;
};

struct ModelElementRow {
  double gauge_value = 0;        // Γ(ι(a)) in the ambient system
  double rho_value = 0;          // ρ(ι(a))
  double ann_value = 0;          // m(a|Ann(ker ι)) in the domain system
  double gap_iii = 0;            // |Γ(ι(a)) − ρ(ι(a))|
  double gap_cor38 = 0;          // |Γ(ι(a)) − m(a|Ann(ker ι))|
};

struct ModelVerdict {
  std::vector<ModelElementRow> rows;
  bool condition_iii = false;
  bool simplex_proxy = false;
  bool cor38_ok = false;
  bool unique_confirmed = false;  // meaningful when simplex ∧ (iii)
};

ModelVerdict model_check(const CStarModel& model,
                         const std::vector<Element>& test_elements,
                         const ModelCheckOptions& opts = {});

/// For a non-uniquely-ergodic domain with abelian fixed algebra: a positive
/// witness element a (an exposing observable shifted by ‖x‖) for which
/// Γ(ι(a)) ≠ ρ(ι(a)), with the observed gap.
std::pair<Element, double> noniii_witness(const CStarModel& model,
                                          const ModelCheckOptions& opts = {});

/// Default schedule for a group: interval for Z, box for Z^d, full-group for
/// finite groups.
FolnerSchedule default_schedule(const GroupSpec& group,
                                Side side = Side::Right);

}  // namespace ncx
