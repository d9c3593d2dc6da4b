#include "ncx/optimize.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace ncx {

namespace {

// ---- block orbits ----------------------------------------------------------

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[static_cast<size_t>(i)] != i) {
      parent[static_cast<size_t>(i)] =
          parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
      i = parent[static_cast<size_t>(i)];
    }
    return i;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

double invariance_defect_of(const GroupAction& action,
                            const HermitianFunctional& phi) {
  double d = 0;
  for (int g = 0; g < static_cast<int>(action.generators.size()); ++g) {
    HermitianFunctional moved = action.dual_apply({{g, 1}}, phi);
    std::vector<Mat> diff;
    for (int i = 0; i < phi.algebra().num_blocks(); ++i)
      diff.push_back(phi.density_block(i) - moved.density_block(i));
    d = std::max(d, functional_norm(HermitianFunctional(phi.algebra(), diff)));
  }
  return d;
}

// Top eigenvalue over the listed blocks plus the spectral projector of its
// cluster (relative width `width`), restricted to those blocks.
std::pair<double, Element> top_cluster_projector(const Element& b,
                                                 const std::vector<int>& blocks,
                                                 double width) {
  BlockSpectrum spec = herm_spectrum(b);
  double top = -std::numeric_limits<double>::infinity();
  for (int i : blocks)
    if (spec.eigenvalues[static_cast<size_t>(i)].size() > 0)
      top = std::max(top, spec.eigenvalues[static_cast<size_t>(i)](0));
  double cut = top - width * std::max(1.0, std::abs(top));
  Element p = Element::zero(b.algebra());
  for (int i : blocks) {
    const RealVec& ev = spec.eigenvalues[static_cast<size_t>(i)];
    const Mat& v = spec.eigenvectors[static_cast<size_t>(i)];
    for (int j = 0; j < ev.size(); ++j)
      if (ev(j) >= cut) p.block(i) += v.col(j) * v.col(j).adjoint();
  }
  return {top, p};
}

std::vector<int> all_blocks(const Algebra& alg) {
  std::vector<int> v(static_cast<size_t>(alg.num_blocks()));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<int> complement_blocks(const Algebra& alg,
                                   const std::vector<int>& dropped) {
  std::set<int> drop(dropped.begin(), dropped.end());
  std::vector<int> kept;
  for (int i = 0; i < alg.num_blocks(); ++i)
    if (!drop.count(i)) kept.push_back(i);
  return kept;
}

void require_perm_invariant(const GroupAction& action,
                            const std::vector<int>& blocks,
                            const char* where) {
  std::set<int> s(blocks.begin(), blocks.end());
  for (int i : blocks)
    if (i < 0 || i >= action.algebra.num_blocks())
      throw Error(std::string(where) + ": block index out of range");
  for (const Automorphism& g : action.generators)
    for (int i : blocks)
      if (!s.count(g.perm[static_cast<size_t>(i)]))
        throw Error(std::string(where) +
                    ": block set is not invariant under the action");
}

// ---- affine slice of the positive cone -------------------------------------

struct AffineSlice {
  Algebra alg;
  Eigen::VectorXd v0;  // particular solution of the equality system
  Eigen::MatrixXd nullspace;
  bool affine_feasible = true;
  double affine_residual = 0;

  Eigen::VectorXd project(const Eigen::VectorXd& v) const {
    return v0 + nullspace * (nullspace.transpose() * (v - v0));
  }
  Element element(const Eigen::VectorXd& v) const {
    return element_from_hermitian(alg, v);
  }
};

struct SliceConstraints {
  bool invariance = true;
  bool unit_trace = true;
  bool tracial = false;
  std::vector<int> zero_blocks;
  std::vector<Element> annihilate;
};

AffineSlice build_slice(const GroupAction& action, const SliceConstraints& c) {
  const Algebra& alg = action.algebra;
  int d = alg.coord_dim();
  std::vector<Element> basis = hermitian_basis(alg);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;

  if (c.invariance) {
    for (const Automorphism& g : action.generators) {
      Eigen::MatrixXd m = hermitian_matrix_of(
          alg, [&](const Element& x) { return g(x) - x; });
      for (int r = 0; r < d; ++r) {
        rows.push_back(m.row(r).transpose());
        rhs.push_back(0.0);
      }
    }
  }
  if (c.tracial) {
    Eigen::MatrixXd m = hermitian_matrix_of(alg, [&](const Element& x) {
      std::vector<Mat> dev;
      for (int i = 0; i < alg.num_blocks(); ++i) {
        int n = alg.block_dims[static_cast<size_t>(i)];
        dev.push_back(x.block(i) - (x.block(i).trace() / double(n)) *
                                       Mat::Identity(n, n));
      }
      return Element(alg, dev);
    });
    for (int r = 0; r < d; ++r) {
      rows.push_back(m.row(r).transpose());
      rhs.push_back(0.0);
    }
  }
  for (int blk : c.zero_blocks) {
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e(j) = 1.0;
      Element bj = element_from_hermitian(alg, e);
      if (bj.block(blk).cwiseAbs().maxCoeff() > 0) {
        rows.push_back(e);
        rhs.push_back(0.0);
      }
    }
  }
  for (const Element& a : c.annihilate) {
    Eigen::VectorXd re(d), im(d);
    for (int j = 0; j < d; ++j) {
      Complex t = pair(HermitianFunctional(alg, basis[static_cast<size_t>(j)]
                                                    .blocks()),
                       a);
      re(j) = t.real();
      im(j) = t.imag();
    }
    rows.push_back(re);
    rhs.push_back(0.0);
    if (im.cwiseAbs().maxCoeff() > 1e-14) {
      rows.push_back(im);
      rhs.push_back(0.0);
    }
  }
  if (c.unit_trace) {
    Eigen::VectorXd t(d);
    for (int j = 0; j < d; ++j)
      t(j) = Element(alg, basis[static_cast<size_t>(j)].blocks())
                 .trace()
                 .real();
    rows.push_back(t);
    rhs.push_back(1.0);
  }

  Eigen::MatrixXd aeq(static_cast<long>(rows.size()), d);
  Eigen::VectorXd beq(static_cast<long>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    aeq.row(static_cast<long>(r)) = rows[r].transpose();
    beq(static_cast<long>(r)) = rhs[r];
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      aeq, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;

  AffineSlice slice;
  slice.alg = alg;
  // Minimum-norm particular solution through the rank-truncated SVD.
  Eigen::VectorXd y = svd.matrixU().leftCols(rank).transpose() * beq;
  for (int i = 0; i < rank; ++i) y(i) /= sv(i);
  slice.v0 = svd.matrixV().leftCols(rank) * y;
  slice.nullspace = svd.matrixV().rightCols(d - rank);
  slice.affine_residual = (aeq * slice.v0 - beq).cwiseAbs().maxCoeff();
  slice.affine_feasible = slice.affine_residual <= 1e-8;
  return slice;
}

Eigen::VectorXd psd_clip(const Algebra& alg, const Eigen::VectorXd& v) {
  Element x = element_from_hermitian(alg, v);
  BlockSpectrum s = herm_spectrum(x);
  Element y = Element::zero(alg);
  for (int i = 0; i < alg.num_blocks(); ++i) {
    const RealVec& ev = s.eigenvalues[static_cast<size_t>(i)];
    const Mat& vec = s.eigenvectors[static_cast<size_t>(i)];
    y.block(i) = vec * ev.cwiseMax(0.0).asDiagonal() * vec.adjoint();
  }
  return hermitian_coordinates(y);
}

double min_eig(const Algebra& alg, const Eigen::VectorXd& v) {
  Element x = element_from_hermitian(alg, v);
  BlockSpectrum s = herm_spectrum(x);
  double m = std::numeric_limits<double>::infinity();
  for (const RealVec& ev : s.eigenvalues)
    if (ev.size() > 0) m = std::min(m, ev(ev.size() - 1));
  return m;
}

// Alternate PSD clipping and affine projection.
Eigen::VectorXd pocs(const AffineSlice& slice, Eigen::VectorXd v, int iters) {
  for (int t = 0; t < iters; ++t) {
    Eigen::VectorXd w = slice.project(psd_clip(slice.alg, v));
    if ((w - v).cwiseAbs().maxCoeff() < 1e-14) return w;
    v = std::move(w);
  }
  return v;
}

}  // namespace

std::vector<std::vector<int>> block_orbits(const GroupAction& action) {
  int m = action.algebra.num_blocks();
  UnionFind uf(m);
  for (const Automorphism& g : action.generators)
    for (int i = 0; i < m; ++i) uf.unite(i, g.perm[static_cast<size_t>(i)]);
  std::vector<std::vector<int>> orbits;
  std::vector<int> root_of(static_cast<size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    int r = uf.find(i);
    if (root_of[static_cast<size_t>(r)] < 0) {
      root_of[static_cast<size_t>(r)] = static_cast<int>(orbits.size());
      orbits.emplace_back();
    }
    orbits[static_cast<size_t>(root_of[static_cast<size_t>(r)])].push_back(i);
  }
  return orbits;
}

std::pair<GroupAction, std::vector<int>> quotient_system(
    const GroupAction& action, const std::vector<int>& dropped) {
  require_perm_invariant(action, dropped, "quotient_system");
  std::vector<int> kept = complement_blocks(action.algebra, dropped);
  if (kept.empty()) throw Error("quotient_system: kernel is the whole algebra");
  std::vector<int> new_index(static_cast<size_t>(action.algebra.num_blocks()),
                             -1);
  std::vector<int> dims;
  for (size_t j = 0; j < kept.size(); ++j) {
    new_index[static_cast<size_t>(kept[j])] = static_cast<int>(j);
    dims.push_back(
        action.algebra.block_dims[static_cast<size_t>(kept[j])]);
  }
  Algebra quot(dims);
  std::vector<Automorphism> gens;
  for (const Automorphism& g : action.generators) {
    std::vector<int> perm;
    std::vector<Mat> u;
    for (int i : kept) {
      perm.push_back(new_index[static_cast<size_t>(g.perm[static_cast<size_t>(i)])]);
      u.push_back(g.unitaries[static_cast<size_t>(i)]);
    }
    gens.push_back(Automorphism(quot, std::move(perm), std::move(u)));
  }
  return {GroupAction(action.group, quot, std::move(gens)), kept};
}

Element quotient_map(const Element& x, const Algebra& quot,
                     const std::vector<int>& kept) {
  std::vector<Mat> blocks;
  for (int i : kept) blocks.push_back(x.block(i));
  return Element(quot, std::move(blocks));
}

FaceDescriptor maximizing_face(const GroupAction& action, const Element& a,
                               double cluster_width) {
  FixedProjector e = fixed_projector(action);
  Element b = e(a);
  auto [top, p] = top_cluster_projector(b, all_blocks(action.algebra),
                                        cluster_width);
  (void)top;
  const Algebra& alg = action.algebra;
  int d = alg.coord_dim();
  Eigen::MatrixXd inv =
      hermitian_matrix_of(alg, [&](const Element& x) { return x - e(x); });
  Eigen::MatrixXd comp = hermitian_matrix_of(
      alg, [&](const Element& x) { return x - p * x * p; });
  Eigen::VectorXd trow(d);
  std::vector<Element> basis = hermitian_basis(alg);
  for (int j = 0; j < d; ++j)
    trow(j) = basis[static_cast<size_t>(j)].trace().real();
  Eigen::MatrixXd stacked(2 * d + 1, d);
  stacked.topRows(d) = inv;
  stacked.middleRows(d, d) = comp;
  stacked.row(2 * d) = trow.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  double cutoff = 1e-9 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  FaceDescriptor f;
  f.projector = p;
  f.affine_dim = d - rank;
  return f;
}

namespace {

OptimizationResult m_max_sg(const GroupAction& action, const Element& a,
                            const MaxOptions& opts) {
  FixedProjector e = fixed_projector(action);
  Element b = e(a);
  auto [top, p] =
      top_cluster_projector(b, all_blocks(action.algebra), opts.cluster_width);
  double tr = p.trace().real();
  HermitianFunctional h(action.algebra,
                        (p * Complex(1.0 / tr, 0.0)).blocks());
  OptimizationResult r;
  r.value = top;
  r.maximizer = State(h);
  r.method = "spectral(SG)";
  r.face = maximizing_face(action, a, opts.cluster_width);
  r.invariance_defect = invariance_defect_of(action, h);
  r.pair_defect = std::abs(pair(h, a).real() - top);
  r.upper_bound = top;
  return r;
}

OptimizationResult m_max_tg(const GroupAction& action, const Element& a,
                            const MaxOptions& opts) {
  (void)opts;
  const Algebra& alg = action.algebra;
  auto orbits = block_orbits(action);
  double best = -std::numeric_limits<double>::infinity();
  const std::vector<int>* best_orbit = nullptr;
  for (const auto& orbit : orbits) {
    double tr = 0;
    double dim = 0;
    for (int i : orbit) {
      tr += a.block(i).trace().real();
      dim += alg.block_dims[static_cast<size_t>(i)];
    }
    double v = tr / dim;
    if (v > best) {
      best = v;
      best_orbit = &orbit;
    }
  }
  double dim = 0;
  for (int i : *best_orbit) dim += alg.block_dims[static_cast<size_t>(i)];
  std::vector<Mat> h;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    int n = alg.block_dims[static_cast<size_t>(i)];
    bool in = std::find(best_orbit->begin(), best_orbit->end(), i) !=
              best_orbit->end();
    h.push_back(in ? (Mat::Identity(n, n) / dim).eval() : Mat::Zero(n, n));
  }
  HermitianFunctional phi(alg, std::move(h));
  OptimizationResult r;
  r.value = best;
  r.maximizer = State(phi);
  r.method = "orbit-formula(TG)";
  r.invariance_defect = invariance_defect_of(action, phi);
  r.pair_defect = std::abs(pair(phi, a).real() - best);
  if (action.group.kind != GroupSpec::Kind::FreeWords) {
    FixedProjector e = fixed_projector(action);
    auto [top, p] = top_cluster_projector(e(a), all_blocks(alg), 1e-8);
    (void)p;
    r.upper_bound = top;
  }
  return r;
}

// m(a|Ann(ideal)) inside the ambient system: compression of E(a) to the
// blocks off the kernel. Independent of the quotient system's own oracle.
OptimizationResult m_max_ann_ideal(const GroupAction& action, const Element& a,
                                   const std::vector<int>& kernel,
                                   const MaxOptions& opts) {
  require_perm_invariant(action, kernel, "m_max(AnnIdeal)");
  std::vector<int> kept = complement_blocks(action.algebra, kernel);
  if (kept.empty())
    throw Error("m_max(AnnIdeal): infeasible, kernel is the whole algebra");
  FixedProjector e = fixed_projector(action);
  Element b = e(a);
  auto [top, p] = top_cluster_projector(b, kept, opts.cluster_width);
  double tr = p.trace().real();
  HermitianFunctional h(action.algebra,
                        (p * Complex(1.0 / tr, 0.0)).blocks());
  OptimizationResult r;
  r.value = top;
  r.maximizer = State(h);
  r.method = "spectral(AnnIdeal-compression)";
  r.invariance_defect = invariance_defect_of(action, h);
  r.pair_defect = std::abs(pair(h, a).real() - top);
  auto [ub, q] = top_cluster_projector(b, all_blocks(action.algebra), 1e-8);
  (void)q;
  r.upper_bound = ub;
  return r;
}

void collect_constraints(const ConvexBodySpec& body, SliceConstraints& c,
                         const GroupAction& action) {
  switch (body.kind) {
    case ConvexBodySpec::Kind::SG:
      break;
    case ConvexBodySpec::Kind::TG:
      c.tracial = true;
      break;
    case ConvexBodySpec::Kind::AnnIdeal:
      require_perm_invariant(action, body.ideal_blocks, "m_max(AnnIdeal)");
      for (int b : body.ideal_blocks) c.zero_blocks.push_back(b);
      break;
    case ConvexBodySpec::Kind::AnnSet:
      for (const Element& a : body.annihilated) c.annihilate.push_back(a);
      break;
    case ConvexBodySpec::Kind::Intersection:
      for (const ConvexBodySpec& f : body.factors)
        collect_constraints(f, c, action);
      break;
  }
}

// An invariant state annihilating A annihilates the orbit span of A, so the
// constraint set is closed under the generators before building the slice.
// A listed set whose span is already invariant passes through unchanged.
void close_ann_set_orbit(const GroupAction& action,
                         std::vector<Element>& set) {
  if (set.empty()) return;
  int d = action.algebra.coord_dim();
  Mat span(d, 0);
  auto residual_of = [&](const Vec& img) -> Vec {
    if (span.cols() == 0) return img;
    Eigen::ColPivHouseholderQR<Mat> qr(span);
    return Vec(img - span * qr.solve(img));
  };
  auto add_if_new = [&](const Element& x) -> bool {
    Vec img = x.coordinates();
    Vec res = residual_of(img);
    if (res.cwiseAbs().maxCoeff() <=
        1e-10 * (1.0 + img.cwiseAbs().maxCoeff()))
      return false;
    span.conservativeResize(Eigen::NoChange, span.cols() + 1);
    span.col(span.cols() - 1) = res / res.norm();
    return true;
  };
  for (const Element& a : set) add_if_new(a);
  for (size_t i = 0; i < set.size(); ++i) {
    if (static_cast<int>(set.size()) > 4 * d)
      throw Error("m_max(AnnSet): orbit closure failed to stabilize");
    for (const Automorphism& g : action.generators) {
      Element img = g(set[i]);
      if (add_if_new(img)) set.push_back(img);
    }
  }
}

OptimizationResult m_max_ascent(const GroupAction& action, const Element& a,
                                const ConvexBodySpec& body,
                                const MaxOptions& opts) {
  SliceConstraints c;
  collect_constraints(body, c, action);
  close_ann_set_orbit(action, c.annihilate);
  AffineSlice slice = build_slice(action, c);
  if (!slice.affine_feasible)
    throw Error("m_max: infeasible body (affine residual " +
                std::to_string(slice.affine_residual) + ")");
  const Algebra& alg = action.algebra;
  int d = alg.coord_dim();

  Eigen::VectorXd grad(d);
  {
    std::vector<Element> basis = hermitian_basis(alg);
    for (int j = 0; j < d; ++j)
      grad(j) =
          pair(HermitianFunctional(alg, basis[static_cast<size_t>(j)].blocks()),
               a)
              .real();
  }
  Eigen::VectorXd gdir = slice.nullspace * (slice.nullspace.transpose() * grad);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd best_v;
  double best_val = -std::numeric_limits<double>::infinity();
  int restarts = std::max(opts.restarts, 8);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd v = slice.v0;
    if (r > 0) {
      Eigen::VectorXd w(slice.nullspace.cols());
      for (int i = 0; i < w.size(); ++i) w(i) = 0.3 * gauss(rng);
      v += slice.nullspace * w;
    }
    v = pocs(slice, v, 300);
    double step = 0.5;
    double cur = grad.dot(v);
    for (int it = 0; it < opts.max_iters && step > 1e-10; ++it) {
      Eigen::VectorXd w = pocs(slice, v + step * gdir, 120);
      double val = grad.dot(w);
      if (val > cur + 1e-14 && min_eig(alg, w) > -1e-8) {
        v = std::move(w);
        cur = val;
      } else {
        step *= 0.5;
      }
    }
    if (min_eig(alg, v) > -1e-7 && cur > best_val) {
      best_val = cur;
      best_v = v;
    }
  }
  if (best_v.size() == 0)
    throw Error("m_max: no feasible point found by projected ascent");

  Element h = element_from_hermitian(alg, best_v);
  // Clip round-off negatives before forming the state.
  Eigen::VectorXd clipped = slice.project(psd_clip(alg, best_v));
  Element hc = element_from_hermitian(alg, clipped);
  HermitianFunctional phi(alg, hc.blocks());
  OptimizationResult r;
  r.value = best_val;
  r.maximizer = State(phi, 1e-6);
  r.method = "projected-ascent(heuristic lower bound)";
  r.feasible = true;
  r.invariance_defect = invariance_defect_of(action, phi);
  r.constraint_defect = std::abs(min_eig(alg, best_v));
  for (const Element& x : c.annihilate)
    r.constraint_defect =
        std::max(r.constraint_defect, std::abs(pair(phi, x)));
  r.pair_defect = std::abs(pair(phi, a).real() - best_val);
  if (action.group.kind != GroupSpec::Kind::FreeWords) {
    FixedProjector e = fixed_projector(action);
    auto [ub, p] = top_cluster_projector(e(a), all_blocks(alg), 1e-8);
    (void)p;
    r.upper_bound = ub;
  }
  return r;
}

bool pure_kind(const ConvexBodySpec& body, ConvexBodySpec::Kind k) {
  if (body.kind == k) return true;
  if (body.kind != ConvexBodySpec::Kind::Intersection) return false;
  for (const auto& f : body.factors)
    if (!pure_kind(f, k) && f.kind != ConvexBodySpec::Kind::SG) return false;
  return !body.factors.empty();
}

}  // namespace

OptimizationResult m_max(const GroupAction& action, const Element& a,
                         const ConvexBodySpec& body, const MaxOptions& opts) {
  if (!is_self_adjoint(a, 1e-10))
    throw Error("m_max: objective element must be self-adjoint");
  switch (body.kind) {
    case ConvexBodySpec::Kind::SG:
      return m_max_sg(action, a, opts);
    case ConvexBodySpec::Kind::TG:
      return m_max_tg(action, a, opts);
    case ConvexBodySpec::Kind::AnnIdeal:
      return m_max_ann_ideal(action, a, body.ideal_blocks, opts);
    case ConvexBodySpec::Kind::AnnSet:
      return m_max_ascent(action, a, body, opts);
    case ConvexBodySpec::Kind::Intersection: {
      if (pure_kind(body, ConvexBodySpec::Kind::SG)) return m_max_sg(action, a, opts);
      if (pure_kind(body, ConvexBodySpec::Kind::TG)) return m_max_tg(action, a, opts);
      return m_max_ascent(action, a, body, opts);
    }
  }
  throw Error("m_max: unknown body kind");
}

std::vector<State> extreme_invariant_states(const GroupAction& action,
                                            unsigned seed) {
  FixedProjector e = fixed_projector(action);
  const Algebra& alg = action.algebra;
  int r = e.dim();

  // Hermitian spanning set of the fixed space.
  std::vector<Element> herm;
  for (int j = 0; j < r; ++j) {
    Element b = Element::from_coordinates(alg, e.kernel_basis().col(j));
    Element re = (b + b.adjoint()) * Complex(0.5, 0);
    Element im = (b - b.adjoint()) * Complex(0, -0.5);
    herm.push_back(re);
    herm.push_back(im);
  }
  double scale = 0;
  for (const Element& x : herm) scale = std::max(scale, operator_norm(x));
  for (size_t i = 0; i < herm.size(); ++i)
    for (size_t j = i + 1; j < herm.size(); ++j) {
      double comm = operator_norm(herm[i] * herm[j] - herm[j] * herm[i]);
      if (comm > 1e-10 * std::max(1.0, scale * scale))
        throw Error(
            "extreme_invariant_states: fixed algebra is non-abelian "
            "(commutator norm " +
            std::to_string(comm) + "); refusing to enumerate a continuum");
    }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 32; ++attempt) {
    Element z = Element::zero(alg);
    for (const Element& x : herm) z += Complex(gauss(rng), 0) * x;
    BlockSpectrum spec = herm_spectrum(z);
    // Cluster all eigenvalues globally across blocks.
    std::vector<double> evs;
    for (const RealVec& v : spec.eigenvalues)
      for (int i = 0; i < v.size(); ++i) evs.push_back(v(i));
    std::sort(evs.begin(), evs.end());
    double width = 1e-7 * std::max(1.0, std::abs(evs.back()) +
                                            std::abs(evs.front()));
    std::vector<double> centers;
    for (double v : evs)
      if (centers.empty() || v - centers.back() > width) centers.push_back(v);
    if (static_cast<int>(centers.size()) != r) continue;

    std::vector<State> out;
    bool ok = true;
    for (double c : centers) {
      Element p = Element::zero(alg);
      for (int i = 0; i < alg.num_blocks(); ++i) {
        const RealVec& ev = spec.eigenvalues[static_cast<size_t>(i)];
        const Mat& vv = spec.eigenvectors[static_cast<size_t>(i)];
        for (int j = 0; j < ev.size(); ++j)
          if (std::abs(ev(j) - c) <= width)
            p.block(i) += vv.col(j) * vv.col(j).adjoint();
      }
      // The cluster projector must itself be fixed.
      if (operator_norm(p - e(p)) > 1e-8) {
        ok = false;
        break;
      }
      double tr = p.trace().real();
      out.push_back(State(HermitianFunctional(
          alg, (p * Complex(1.0 / tr, 0.0)).blocks())));
    }
    if (!ok) continue;
    std::sort(out.begin(), out.end(), [](const State& a, const State& b) {
      RealVec va = hermitian_coordinates(a.functional().density_element());
      RealVec vb = hermitian_coordinates(b.functional().density_element());
      for (int i = 0; i < va.size(); ++i)
        if (std::abs(va(i) - vb(i)) > 1e-12) return va(i) > vb(i);
      return false;
    });
    return out;
  }
  throw Error(
      "extreme_invariant_states: could not separate the minimal projections");
}

Element exposing_observable(const GroupAction& action, const State& phi,
                            double match_tol) {
  std::vector<State> extremes = extreme_invariant_states(action);
  for (const State& psi : extremes) {
    double dist = 0;
    for (int i = 0; i < phi.algebra().num_blocks(); ++i)
      dist = std::max(dist, (phi.density()[static_cast<size_t>(i)] -
                             psi.density()[static_cast<size_t>(i)])
                                .cwiseAbs()
                                .maxCoeff());
    if (dist <= match_tol) {
      // Recover the minimal projection p = tr(p) · density.
      Element h = psi.functional().density_element();
      double tr = 0;
      BlockSpectrum s = herm_spectrum(h);
      for (const RealVec& ev : s.eigenvalues)
        for (int j = 0; j < ev.size(); ++j)
          if (ev(j) > 1e-8) tr += 1.0;
      return h * Complex(tr, 0.0);
    }
  }
  throw Error(
      "exposing_observable: state does not match any extreme invariant state");
}

KBResult krylov_bogolyubov(const GroupAction& action, const State& seed,
                           const FolnerSchedule& schedule, long k) {
  if (schedule.side == Side::Right && !action.group.abelian_builtin() &&
      schedule.kind != FolnerSchedule::Kind::FullGroup)
    throw Error("krylov_bogolyubov: requires a left schedule");
  std::vector<GroupWord> f = folner_sets(schedule, action.group, k);
  if (f.empty()) throw Error("krylov_bogolyubov: empty averaging set");
  require_same_algebra(action.algebra, seed.algebra(), "krylov_bogolyubov");

  Element sum = Element::zero(action.algebra);
  for (const GroupWord& w : f)
    sum += action.dual_apply(w, seed.functional()).density_element();
  sum *= Complex(1.0 / static_cast<double>(f.size()), 0.0);
  HermitianFunctional psi(action.algebra, sum.blocks());

  double defect = invariance_defect_of(action, psi);
  double bound = 0;
  for (int g = 0; g < static_cast<int>(action.generators.size()); ++g)
    bound = std::max(bound,
                     folner_defect(f, {{g, 1}}, schedule.side, action.group));
  KBResult r;
  r.state = State(psi);
  r.defect = defect;
  r.folner_bound = 2.0 * bound;
  r.set_size = static_cast<long>(f.size());
  return r;
}

AnnFeasibility ann_feasibility(const GroupAction& action,
                               const ConvexBodySpec& body,
                               const MaxOptions& opts) {
  AnnFeasibility out;
  if (body.kind == ConvexBodySpec::Kind::AnnIdeal) {
    if (static_cast<int>(body.ideal_blocks.size()) >=
        action.algebra.num_blocks()) {
      out.feasible = false;
      out.note = "kernel is the whole algebra; Ann is empty";
      return out;
    }
    require_perm_invariant(action, body.ideal_blocks, "ann_feasibility");
    std::vector<int> kept = complement_blocks(action.algebra, body.ideal_blocks);
    double total = 0;
    for (int i : kept)
      total += action.algebra.block_dims[static_cast<size_t>(i)];
    std::vector<Mat> h;
    for (int i = 0; i < action.algebra.num_blocks(); ++i) {
      int n = action.algebra.block_dims[static_cast<size_t>(i)];
      bool keep = std::find(kept.begin(), kept.end(), i) != kept.end();
      h.push_back(keep ? (Mat::Identity(n, n) / total).eval()
                       : Mat::Zero(n, n));
    }
    out.feasible = true;
    out.witness = State(HermitianFunctional(action.algebra, std::move(h)));
    out.best_min_eigenvalue = 0;
    out.note = "quotient normalized trace pulled back";
    return out;
  }
  if (body.kind != ConvexBodySpec::Kind::AnnSet &&
      body.kind != ConvexBodySpec::Kind::Intersection)
    throw Error("ann_feasibility: expects AnnIdeal or AnnSet");

  SliceConstraints c;
  collect_constraints(body, c, action);
  close_ann_set_orbit(action, c.annihilate);
  AffineSlice slice = build_slice(action, c);
  if (!slice.affine_feasible) {
    out.feasible = false;
    out.best_min_eigenvalue = -std::numeric_limits<double>::infinity();
    out.note = "affine system inconsistent (residual " +
               std::to_string(slice.affine_residual) + ")";
    return out;
  }
  const Algebra& alg = action.algebra;
  // Subgradient ascent on the concave function λ_min over the affine slice.
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd best_v = slice.v0;
  double best = min_eig(alg, best_v);
  for (int r = 0; r < std::max(opts.restarts, 8); ++r) {
    Eigen::VectorXd v = slice.v0;
    if (r > 0) {
      Eigen::VectorXd w(slice.nullspace.cols());
      for (int i = 0; i < w.size(); ++i) w(i) = 0.3 * gauss(rng);
      v = slice.project(v + slice.nullspace * w);
    }
    double step = 0.5;
    double cur = min_eig(alg, v);
    for (int it = 0; it < opts.max_iters && step > 1e-12; ++it) {
      // Subgradient: bottom-eigenvector outer product of the worst block.
      Element x = element_from_hermitian(alg, v);
      BlockSpectrum s = herm_spectrum(x);
      int worst = 0;
      double wv = std::numeric_limits<double>::infinity();
      for (int i = 0; i < alg.num_blocks(); ++i) {
        const RealVec& ev = s.eigenvalues[static_cast<size_t>(i)];
        if (ev.size() > 0 && ev(ev.size() - 1) < wv) {
          wv = ev(ev.size() - 1);
          worst = i;
        }
      }
      Element g = Element::zero(alg);
      const Mat& vecs = s.eigenvectors[static_cast<size_t>(worst)];
      Vec bottom = vecs.col(vecs.cols() - 1);
      g.block(worst) = bottom * bottom.adjoint();
      Eigen::VectorXd gv = hermitian_coordinates(g);
      Eigen::VectorXd w = slice.project(v + step * gv);
      double val = min_eig(alg, w);
      if (val > cur + 1e-15) {
        v = std::move(w);
        cur = val;
      } else {
        step *= 0.5;
      }
    }
    if (cur > best) {
      best = cur;
      best_v = v;
    }
  }
  out.best_min_eigenvalue = best;
  out.feasible = best >= -1e-9;
  if (out.feasible) {
    Eigen::VectorXd clipped = slice.project(psd_clip(alg, best_v));
    out.witness = State(
        HermitianFunctional(alg, element_from_hermitian(alg, clipped).blocks()),
        1e-6);
    out.note = "ascent witness";
  } else {
    out.note = "best attainable minimum eigenvalue is negative";
  }
  return out;
}

QuotientReport quotient_correspondence_check(
    const GroupAction& action, const std::vector<int>& kernel_blocks,
    const Element& a) {
  QuotientReport rep;
  if (kernel_blocks.empty()) {
    rep.quotient_value = m_max(action, a, ConvexBodySpec::sg()).value;
    rep.constrained_value = rep.quotient_value;
    rep.gap = 0;
    return rep;
  }
  auto [quot, kept] = quotient_system(action, kernel_blocks);
  Element pa = quotient_map(a, quot.algebra, kept);
  rep.quotient_value = m_max(quot, pa, ConvexBodySpec::sg()).value;
  rep.constrained_value =
      m_max(action, a, ConvexBodySpec::ann_ideal(kernel_blocks)).value;
  rep.gap = std::abs(rep.quotient_value - rep.constrained_value);
  return rep;
}

}  // namespace ncx
