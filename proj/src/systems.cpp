#include "ncx/systems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace ncx {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GroupAction cyclic_shift_system(int n) {
  if (n < 1) throw Error("cyclic_shift: n must be positive");
  Algebra alg(std::vector<int>(static_cast<size_t>(n), 1));
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = (i + 1) % n;
  return GroupAction(GroupSpec::integers(), alg,
                     {Automorphism::permutation(alg, perm)});
}

GroupAction permutation_system(const std::vector<int>& perm) {
  Algebra alg(std::vector<int>(perm.size(), 1));
  return GroupAction(GroupSpec::integers(), alg,
                     {Automorphism::permutation(alg, perm)});
}

GroupAction ad_unitary_system(int n, const Mat& u) {
  Algebra alg({n});
  return GroupAction(GroupSpec::integers(), alg,
                     {Automorphism::inner(alg, {u})});
}

GroupAction pauli_z2z2_system() {
  Algebra alg({2});
  Mat x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  FiniteGroupTable t = product_group_table(cyclic_group_table(2),
                                           cyclic_group_table(2));
  // Element order in the product table: (0,0), (0,1), (1,0), (1,1).
  std::vector<Automorphism> gens = {
      Automorphism::identity(alg), Automorphism::inner(alg, {z}),
      Automorphism::inner(alg, {x}), Automorphism::inner(alg, {(x * z).eval()})};
  return GroupAction(GroupSpec::finite(std::move(t)), alg, std::move(gens));
}

GroupAction block_swap_system(int n) {
  Algebra alg({n, n});
  return GroupAction(GroupSpec::integers(), alg,
                     {Automorphism::permutation(alg, {1, 0})});
}

GroupAction lattice_product_system(const GroupAction& a,
                                   const GroupAction& b) {
  if (a.group.kind != GroupSpec::Kind::Integers ||
      b.group.kind != GroupSpec::Kind::Integers)
    throw Error("lattice_product: both factors must be Z actions");
  require_same_algebra(a.algebra, b.algebra, "lattice_product");
  return GroupAction(GroupSpec::lattice(2), a.algebra,
                     {a.generators[0], b.generators[0]});
}

GroupAction identity_system(int n) {
  Algebra alg(std::vector<int>(static_cast<size_t>(n), 1));
  return GroupAction(GroupSpec::integers(), alg,
                     {Automorphism::identity(alg)});
}

FiniteGroupTable cyclic_group_table(int n) {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mul(static_cast<size_t>(n),
                                    std::vector<int>(static_cast<size_t>(n)));
  for (int i = 0; i < n; ++i) labels.push_back("g" + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mul[static_cast<size_t>(i)][static_cast<size_t>(j)] = (i + j) % n;
  return FiniteGroupTable(std::move(labels), std::move(mul));
}

FiniteGroupTable product_group_table(const FiniteGroupTable& a,
                                     const FiniteGroupTable& b) {
  int na = a.order(), nb = b.order();
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mul(
      static_cast<size_t>(na * nb),
      std::vector<int>(static_cast<size_t>(na * nb)));
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      labels.push_back("(" + a.labels[static_cast<size_t>(i)] + "," +
                       b.labels[static_cast<size_t>(j)] + ")");
  auto idx = [nb](int i, int j) { return i * nb + j; };
  for (int i1 = 0; i1 < na; ++i1)
    for (int j1 = 0; j1 < nb; ++j1)
      for (int i2 = 0; i2 < na; ++i2)
        for (int j2 = 0; j2 < nb; ++j2)
          mul[static_cast<size_t>(idx(i1, j1))][static_cast<size_t>(
              idx(i2, j2))] =
              idx(a.mul[static_cast<size_t>(i1)][static_cast<size_t>(i2)],
                  b.mul[static_cast<size_t>(j1)][static_cast<size_t>(j2)]);
  return FiniteGroupTable(std::move(labels), std::move(mul));
}

FiniteGroupTable dihedral_group_table(int n) {
  // Elements r^i s^j, 0≤i<n, 0≤j<2; index = i + n·j.
  int order = 2 * n;
  std::vector<std::string> labels;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < n; ++i)
      labels.push_back("r" + std::to_string(i) + (j ? "s" : ""));
  std::vector<std::vector<int>> mul(
      static_cast<size_t>(order), std::vector<int>(static_cast<size_t>(order)));
  auto idx = [n](int i, int j) { return i + n * j; };
  for (int i1 = 0; i1 < n; ++i1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int j2 = 0; j2 < 2; ++j2) {
          // (r^i1 s^j1)(r^i2 s^j2) = r^{i1 + (-1)^{j1} i2} s^{j1+j2}
          int i = ((i1 + (j1 ? -i2 : i2)) % n + n) % n;
          int j = (j1 + j2) % 2;
          mul[static_cast<size_t>(idx(i1, j1))][static_cast<size_t>(
              idx(i2, j2))] = idx(i, j);
        }
  return FiniteGroupTable(std::move(labels), std::move(mul));
}

// ---- random generators ------------------------------------------------------

Mat haar_unitary(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    Complex d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

Algebra random_algebra(Rng& rng, int coord_budget, int max_block) {
  std::uniform_int_distribution<int> dim(1, max_block);
  std::vector<int> dims;
  int used = 0;
  while (true) {
    int n = dim(rng);
    if (used + n * n > coord_budget) {
      if (dims.empty()) dims.push_back(1);
      break;
    }
    dims.push_back(n);
    used += n * n;
    std::uniform_real_distribution<double> c(0.0, 1.0);
    if (!dims.empty() && c(rng) < 0.25 && used >= coord_budget / 2) break;
  }
  return Algebra(dims);
}

Element random_hermitian(const Algebra& alg, Rng& rng, double scale) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Mat> blocks;
  for (int n : alg.block_dims) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    blocks.push_back((0.5 * scale * (g + g.adjoint())).eval());
  }
  return Element(alg, std::move(blocks));
}

Element random_positive(const Algebra& alg, Rng& rng) {
  Element h = random_hermitian(alg, rng, 0.5);
  Element sq = h * h;
  double n = operator_norm(sq);
  return sq * Complex(n > 0 ? 1.0 / n : 1.0, 0.0);
}

HermitianFunctional random_functional(const Algebra& alg, Rng& rng) {
  return HermitianFunctional(alg, random_hermitian(alg, rng).blocks());
}

HermitianFunctional random_tracial_functional(const Algebra& alg, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Mat> h;
  for (int n : alg.block_dims)
    h.push_back((gauss(rng) * Mat::Identity(n, n)).eval());
  return HermitianFunctional(alg, std::move(h));
}

State random_state(const Algebra& alg, Rng& rng) {
  Element h = random_hermitian(alg, rng);
  Element sq = h * h;
  double tr = sq.trace().real();
  if (tr <= 1e-12) return State::normalized_trace(alg);
  return State(HermitianFunctional(alg, (sq * Complex(1.0 / tr, 0)).blocks()));
}

namespace {

Mat random_quantized_unitary(int n, Rng& rng, int max_order) {
  std::uniform_int_distribution<int> order_dist(1, max_order);
  int order = order_dist(rng);
  std::uniform_int_distribution<int> phase(0, order - 1);
  Mat v = haar_unitary(n, rng);
  Vec d(n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * kPi * phase(rng) / order;
    d(i) = Complex(std::cos(th), std::sin(th));
  }
  return v * d.asDiagonal() * v.adjoint();
}

// Random permutation of block indices that only mixes equal dimensions.
std::vector<int> random_block_perm(const Algebra& alg, Rng& rng) {
  std::map<int, std::vector<int>> classes;
  for (int i = 0; i < alg.num_blocks(); ++i)
    classes[alg.block_dims[static_cast<size_t>(i)]].push_back(i);
  std::vector<int> perm(static_cast<size_t>(alg.num_blocks()));
  for (auto& [dim, idx] : classes) {
    std::vector<int> shuffled = idx;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (size_t j = 0; j < idx.size(); ++j)
      perm[static_cast<size_t>(idx[j])] = shuffled[j];
  }
  return perm;
}

}  // namespace

Automorphism random_automorphism(const Algebra& alg, Rng& rng,
                                 bool quantized_phases, int max_order) {
  std::vector<int> perm = random_block_perm(alg, rng);
  std::vector<Mat> u;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    int n = alg.block_dims[static_cast<size_t>(i)];
    u.push_back(quantized_phases ? random_quantized_unitary(n, rng, max_order)
                                 : haar_unitary(n, rng));
  }
  return Automorphism(alg, std::move(perm), std::move(u));
}

GroupAction random_z_system(Rng& rng, int coord_budget, bool quantized) {
  Algebra alg = random_algebra(rng, coord_budget);
  return GroupAction(GroupSpec::integers(), alg,
                     {random_automorphism(alg, rng, quantized)});
}

GroupAction random_z2_system(Rng& rng, int coord_budget, bool quantized) {
  Algebra alg = random_algebra(rng, coord_budget);
  Automorphism base = random_automorphism(alg, rng, quantized);
  std::uniform_int_distribution<int> pw(1, 3);
  int p = pw(rng), q = pw(rng);
  Automorphism g1 = base, g2 = base;
  for (int i = 1; i < p; ++i) g1 = compose(g1, base);
  for (int i = 1; i < q; ++i) g2 = compose(g2, base);
  return GroupAction(GroupSpec::lattice(2), alg, {g1, g2});
}

GroupAction random_diagonal_permutation_system(Rng& rng, int max_n) {
  std::uniform_int_distribution<int> nd(2, max_n);
  int n = nd(rng);
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return permutation_system(perm);
}

GroupAction random_finite_system(Rng& rng, int coord_budget) {
  std::uniform_int_distribution<int> pick(0, 3);
  FiniteGroupTable table;
  switch (pick(rng)) {
    case 0: {
      std::uniform_int_distribution<int> nd(2, 12);
      table = cyclic_group_table(nd(rng));
      break;
    }
    case 1: {
      std::uniform_int_distribution<int> nd(2, 12);
      table = dihedral_group_table(nd(rng));
      break;
    }
    case 2: {
      std::uniform_int_distribution<int> nd(2, 4);
      table = product_group_table(cyclic_group_table(nd(rng)),
                                  cyclic_group_table(nd(rng)));
      break;
    }
    default:
      table = product_group_table(cyclic_group_table(2),
                                  dihedral_group_table(3));
      break;
  }
  int order = table.order();

  // Left regular representation of G on `order` copies of C, plus one inner
  // matrix block on which G acts by conjugation through an order-exact
  // unitary representation of the cyclic quotient G → G/[G,G]-component
  // (identity when no exact one is available).
  std::uniform_int_distribution<int> bd(1, 2);
  int nblk = bd(rng);
  std::vector<int> dims;
  bool with_regular = order + nblk * nblk <= coord_budget;
  if (with_regular)
    for (int i = 0; i < order; ++i) dims.push_back(1);
  dims.push_back(nblk);
  Algebra alg(dims);

  // Exponent map e: G → Z_order from a cyclic generator, if the group is
  // cyclic; otherwise the inner block carries the trivial action.
  int cyc_order = 0;
  std::vector<int> expo(static_cast<size_t>(order), 0);
  for (int g = 0; g < order; ++g) {
    std::vector<int> e(static_cast<size_t>(order), -1);
    int x = table.identity;
    for (int k = 0; k < order; ++k) {
      if (e[static_cast<size_t>(x)] < 0) e[static_cast<size_t>(x)] = k;
      x = table.mul[static_cast<size_t>(x)][static_cast<size_t>(g)];
    }
    if (std::all_of(e.begin(), e.end(), [](int v) { return v >= 0; })) {
      cyc_order = order;
      expo = e;
      break;
    }
  }

  Mat w = Mat::Identity(nblk, nblk);
  if (cyc_order > 0) {
    // Unitary of exact order dividing cyc_order: eigenphases on the
    // cyc_order-th roots of unity.
    Mat v = haar_unitary(nblk, rng);
    std::uniform_int_distribution<int> ph(0, cyc_order - 1);
    Vec d(nblk);
    for (int i = 0; i < nblk; ++i) {
      double th = 2.0 * kPi * ph(rng) / cyc_order;
      d(i) = Complex(std::cos(th), std::sin(th));
    }
    w = v * d.asDiagonal() * v.adjoint();
  }

  std::vector<Automorphism> gens;
  for (int g = 0; g < order; ++g) {
    std::vector<int> perm(static_cast<size_t>(alg.num_blocks()));
    std::iota(perm.begin(), perm.end(), 0);
    if (with_regular) {
      // Θ_g moves coordinate h to coordinate g·h; with the convention
      // Θ(x)_i = x_{σ(i)} this needs σ(i) = g⁻¹·i.
      int ginv = table.inverse[static_cast<size_t>(g)];
      for (int h = 0; h < order; ++h)
        perm[static_cast<size_t>(h)] =
            table.mul[static_cast<size_t>(ginv)][static_cast<size_t>(h)];
    }
    std::vector<Mat> u;
    for (int i = 0; i < alg.num_blocks(); ++i) {
      int n = alg.block_dims[static_cast<size_t>(i)];
      u.push_back(Mat::Identity(n, n));
    }
    Mat wk = Mat::Identity(nblk, nblk);
    for (int k = 0; k < expo[static_cast<size_t>(g)]; ++k) wk = wk * w;
    u.back() = wk;
    gens.push_back(Automorphism(alg, std::move(perm), std::move(u)));
  }
  return GroupAction(GroupSpec::finite(std::move(table)), alg,
                     std::move(gens));
}

GroupAction random_weyl_system(Rng& rng, int max_n) {
  std::uniform_int_distribution<int> nd(2, max_n);
  int n = nd(rng);
  Mat clock = Mat::Zero(n, n), shift = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double th = 2.0 * kPi * i / n;
    clock(i, i) = Complex(std::cos(th), std::sin(th));
    shift((i + 1) % n, i) = 1.0;
  }
  Mat v = haar_unitary(n, rng);
  clock = v * clock * v.adjoint();
  shift = v * shift * v.adjoint();
  Algebra alg({n});
  FiniteGroupTable t =
      product_group_table(cyclic_group_table(n), cyclic_group_table(n));
  std::vector<Automorphism> gens;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Mat u = Mat::Identity(n, n);
      for (int k = 0; k < a; ++k) u = u * clock;
      for (int k = 0; k < b; ++k) u = u * shift;
      gens.push_back(Automorphism::inner(alg, {u}));
    }
  return GroupAction(GroupSpec::finite(std::move(t)), alg, std::move(gens));
}

}  // namespace ncx
