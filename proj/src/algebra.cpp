#include "ncx/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace ncx {

void require_same_algebra(const Algebra& a, const Algebra& b,
                          const char* where) {
  if (a != b)
    throw Error(std::string(where) + ": operands live on different algebras");
}

void Element::check_shapes() const {
  if (static_cast<int>(blocks_.size()) != algebra_.num_blocks())
    throw Error("Element: block count does not match algebra");
  for (int i = 0; i < algebra_.num_blocks(); ++i) {
    int n = algebra_.block_dims[static_cast<size_t>(i)];
    if (blocks_[static_cast<size_t>(i)].rows() != n ||
        blocks_[static_cast<size_t>(i)].cols() != n)
      throw Error("Element: block " + std::to_string(i) + " has wrong shape");
  }
}

Element Element::zero(const Algebra& alg) {
  std::vector<Mat> b;
  b.reserve(static_cast<size_t>(alg.num_blocks()));
  for (int n : alg.block_dims) b.push_back(Mat::Zero(n, n));
  return Element(alg, std::move(b));
}

Element Element::unit(const Algebra& alg) {
  std::vector<Mat> b;
  b.reserve(static_cast<size_t>(alg.num_blocks()));
  for (int n : alg.block_dims) b.push_back(Mat::Identity(n, n));
  return Element(alg, std::move(b));
}

Element Element::adjoint() const {
  std::vector<Mat> b;
  b.reserve(blocks_.size());
  for (const Mat& m : blocks_) b.push_back(m.adjoint());
  return Element(algebra_, std::move(b));
}

Complex Element::trace() const {
  Complex t = 0;
  for (const Mat& m : blocks_) t += m.trace();
  return t;
}

Element& Element::operator+=(const Element& o) {
  require_same_algebra(algebra_, o.algebra_, "Element::operator+=");
  for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
  return *this;
}

Element& Element::operator-=(const Element& o) {
  require_same_algebra(algebra_, o.algebra_, "Element::operator-=");
  for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
  return *this;
}

Element& Element::operator*=(Complex c) {
  for (Mat& m : blocks_) m *= c;
  return *this;
}

Element operator*(const Element& a, const Element& b) {
  require_same_algebra(a.algebra_, b.algebra_, "Element::operator*");
  std::vector<Mat> out;
  out.reserve(a.blocks_.size());
  for (size_t i = 0; i < a.blocks_.size(); ++i)
    out.push_back(a.blocks_[i] * b.blocks_[i]);
  return Element(a.algebra_, std::move(out));
}

Vec Element::coordinates() const {
  Vec v(algebra_.coord_dim());
  int off = 0;
  for (const Mat& m : blocks_) {
    int sz = static_cast<int>(m.size());
    v.segment(off, sz) = Eigen::Map<const Vec>(m.data(), sz);
    off += sz;
  }
  return v;
}

Element Element::from_coordinates(const Algebra& alg, const Vec& v) {
  if (v.size() != alg.coord_dim())
    throw Error("from_coordinates: wrong vector length");
  std::vector<Mat> blocks;
  int off = 0;
  for (int n : alg.block_dims) {
    blocks.push_back(Eigen::Map<const Mat>(v.data() + off, n, n));
    off += n * n;
  }
  return Element(alg, std::move(blocks));
}

bool is_self_adjoint(const Element& x, double tol) {
  double dev = 0, scale = 0;
  for (const Mat& m : x.blocks()) {
    dev = std::max(dev, (m - m.adjoint().eval()).cwiseAbs().maxCoeff());
    scale = std::max(scale, m.cwiseAbs().maxCoeff());
  }
  return dev <= tol * (1.0 + scale);
}

BlockSpectrum herm_spectrum(const Element& x) {
  if (!is_self_adjoint(x))
    throw Error("herm_spectrum: element is not self-adjoint");
  BlockSpectrum s;
  for (const Mat& m : x.blocks()) {
    Mat h = 0.5 * (m + m.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success)
      throw Error("herm_spectrum: eigensolver failed");
    // Eigen sorts ascending; flip to descending.
    RealVec ev = es.eigenvalues().reverse();
    Mat vecs = es.eigenvectors().rowwise().reverse();
    s.eigenvalues.push_back(std::move(ev));
    s.eigenvectors.push_back(std::move(vecs));
  }
  return s;
}

double operator_norm(const Element& x) {
  double nrm = 0;
  for (const Mat& m : x.blocks()) {
    if (m.rows() == 1) {
      nrm = std::max(nrm, std::abs(m(0, 0)));
    } else if ((m - m.adjoint().eval()).cwiseAbs().maxCoeff() <
               1e-13 * (1.0 + m.cwiseAbs().maxCoeff())) {
      Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
      nrm = std::max(nrm, es.eigenvalues().cwiseAbs().maxCoeff());
    } else {
      Eigen::JacobiSVD<Mat> svd(m);
      nrm = std::max(nrm, svd.singularValues()(0));
    }
  }
  return nrm;
}

bool is_positive(const Element& x, double tol) {
  if (!is_self_adjoint(x, tol)) return false;
  for (const Mat& m : x.blocks()) {
    Mat h = 0.5 * (m + m.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol) return false;
  }
  return true;
}

HermitianFunctional::HermitianFunctional(Algebra alg, std::vector<Mat> density)
    : algebra_(std::move(alg)), density_(std::move(density)) {
  if (static_cast<int>(density_.size()) != algebra_.num_blocks())
    throw Error("HermitianFunctional: density block count mismatch");
  for (int i = 0; i < algebra_.num_blocks(); ++i) {
    const Mat& h = density_[static_cast<size_t>(i)];
    int n = algebra_.block_dims[static_cast<size_t>(i)];
    if (h.rows() != n || h.cols() != n)
      throw Error("HermitianFunctional: density block shape mismatch");
    if ((h - h.adjoint().eval()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + h.cwiseAbs().maxCoeff()))
      throw Error("HermitianFunctional: density block " + std::to_string(i) +
                  " is not Hermitian");
  }
}

Complex pair(const HermitianFunctional& phi, const Element& x) {
  require_same_algebra(phi.algebra(), x.algebra(), "pair");
  Complex t = 0;
  for (int i = 0; i < x.num_blocks(); ++i)
    t += (phi.density_block(i) * x.block(i)).trace();
  return t;
}

double functional_norm(const HermitianFunctional& phi) {
  double t = 0;
  for (const Mat& h : phi.density()) {
    Mat hh = 0.5 * (h + h.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(hh, Eigen::EigenvaluesOnly);
    t += es.eigenvalues().cwiseAbs().sum();
  }
  return t;
}

std::pair<HermitianFunctional, HermitianFunctional> jordan_decompose(
    const HermitianFunctional& phi) {
  std::vector<Mat> pos, neg;
  for (const Mat& h : phi.density()) {
    Mat hh = 0.5 * (h + h.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(hh);
    RealVec ev = es.eigenvalues();
    const Mat& v = es.eigenvectors();
    pos.push_back(v * ev.cwiseMax(0.0).asDiagonal() * v.adjoint());
    neg.push_back(v * (-ev).cwiseMax(0.0).asDiagonal() * v.adjoint());
  }
  return {HermitianFunctional(phi.algebra(), std::move(pos)),
          HermitianFunctional(phi.algebra(), std::move(neg))};
}

bool is_tracial(const HermitianFunctional& phi, double tol) {
  for (int i = 0; i < phi.algebra().num_blocks(); ++i) {
    const Mat& h = phi.density_block(i);
    int n = static_cast<int>(h.rows());
    Mat dev = h - (h.trace() / static_cast<double>(n)) * Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(dev);
    if (svd.singularValues().size() > 0 && svd.singularValues()(0) > tol)
      return false;
  }
  return true;
}

State::State(HermitianFunctional phi, double tol) : phi_(std::move(phi)) {
  double tr = 0;
  for (const Mat& h : phi_.density()) {
    Mat hh = 0.5 * (h + h.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(hh, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol)
      throw Error("State: density is not positive (min eigenvalue " +
                  std::to_string(es.eigenvalues()(0)) + ")");
    tr += h.trace().real();
  }
  if (std::abs(tr - 1.0) > tol)
    throw Error("State: density trace is " + std::to_string(tr) + ", not 1");
}

State State::normalized_trace(const Algebra& alg) {
  std::vector<Mat> h;
  double total = alg.total_dim();
  for (int n : alg.block_dims)
    h.push_back(Mat::Identity(n, n) / total);
  return State(HermitianFunctional(alg, std::move(h)));
}

State State::tracial(const Algebra& alg, const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != alg.num_blocks())
    throw Error("State::tracial: one weight per block required");
  std::vector<Mat> h;
  for (int i = 0; i < alg.num_blocks(); ++i) {
    int n = alg.block_dims[static_cast<size_t>(i)];
    h.push_back(Mat::Identity(n, n) * (weights[static_cast<size_t>(i)] / n));
  }
  return State(HermitianFunctional(alg, std::move(h)));
}

double min_density_eigenvalue(const State& phi) {
  double m = std::numeric_limits<double>::infinity();
  for (const Mat& h : phi.density()) {
    Mat hh = 0.5 * (h + h.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> es(hh, Eigen::EigenvaluesOnly);
    m = std::min(m, es.eigenvalues()(0));
  }
  return m;
}

}  // namespace ncx
