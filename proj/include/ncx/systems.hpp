#pragma once

// Built-in example systems and random system generators for test suites.

#include <random>

#include "ncx/dynamics.hpp"

namespace ncx {

// ---- built-in systems -------------------------------------------------------

/// Z acting on diagonal C^n by the coordinate rotation x'_i = x_{i+1 mod n}.
GroupAction cyclic_shift_system(int n);
/// Z acting on a diagonal algebra by the given block permutation.
GroupAction permutation_system(const std::vector<int>& perm);
/// Z acting on M_n by Ad_u.
GroupAction ad_unitary_system(int n, const Mat& u);
/// Z₂×Z₂ acting on M₂ by Ad of [[0,1],[1,0]] and diag(1,−1).
GroupAction pauli_z2z2_system();
/// Z acting on M_n ⊕ M_n by the block swap.
GroupAction block_swap_system(int n);
/// Z² from two Z-actions on the same algebra (generators must commute).
GroupAction lattice_product_system(const GroupAction& a, const GroupAction& b);
/// Trivial Z action on diagonal C^n.
GroupAction identity_system(int n);

FiniteGroupTable cyclic_group_table(int n);
FiniteGroupTable product_group_table(const FiniteGroupTable& a,
                                     const FiniteGroupTable& b);
FiniteGroupTable dihedral_group_table(int n);  // order 2n

// ---- random generators ------------------------------------------------------

using Rng = std::mt19937_64;

Mat haar_unitary(int n, Rng& rng);
/// Random block dims with Σ n_i² ≤ coord_budget.
Algebra random_algebra(Rng& rng, int coord_budget = 64, int max_block = 4);
Element random_hermitian(const Algebra& alg, Rng& rng, double scale = 1.0);
/// Random positive element with norm roughly O(1).
Element random_positive(const Algebra& alg, Rng& rng);
HermitianFunctional random_functional(const Algebra& alg, Rng& rng);
HermitianFunctional random_tracial_functional(const Algebra& alg, Rng& rng);
State random_state(const Algebra& alg, Rng& rng);

/// Random automorphism: block permutation within equal-dimension classes
/// plus Haar unitaries. When quantized_phases is set, each unitary has
/// eigenvalue phases on a random root-of-unity grid, so the automorphism
/// has finite order and interval averages hit the projector exactly at
/// multiples of the period.
Automorphism random_automorphism(const Algebra& alg, Rng& rng,
                                 bool quantized_phases = false,
                                 int max_order = 12);

/// Z system with a random automorphism on a random algebra.
GroupAction random_z_system(Rng& rng, int coord_budget = 64,
                            bool quantized_phases = false);
/// Z² system: two commuting generators (powers of one random automorphism).
GroupAction random_z2_system(Rng& rng, int coord_budget = 64,
                             bool quantized_phases = false);
/// Random permutation action of Z on a diagonal algebra C^n.
GroupAction random_diagonal_permutation_system(Rng& rng, int max_n = 12);
/// Random finite-group system: a cyclic, dihedral, or product group acting
/// by block permutations and root-of-unity inner unitaries. Order ≤ 24.
GroupAction random_finite_system(Rng& rng, int coord_budget = 64);
/// Random inner finite-group action with scalar joint commutant: Weyl
/// clock-and-shift pair on M_n (projective Z_n×Z_n representation),
/// conjugated by a random unitary.
GroupAction random_weyl_system(Rng& rng, int max_n = 4);

}  // namespace ncx
