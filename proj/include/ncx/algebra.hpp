#pragma once

// Finite-dimensional C*-algebra arithmetic: direct sums of full matrix
// algebras, their elements, Hermitian functionals realized as trace-pairing
// densities, Jordan decomposition, and traciality tests.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncx {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Complex = std::complex<double>;

inline constexpr double kDefaultTol = 1e-10;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A cross-checked consistency assertion failed. Unlike ordinary errors
/// these are never swallowed by fail-soft task runners: they indicate either
/// a falsified equivalence or a bug, and abort the whole run.
struct ConsistencyError : Error {
  using Error::Error;
};

/// A direct sum of full matrix algebras M_{n_1} ⊕ ... ⊕ M_{n_m}.
struct Algebra {
  std::vector<int> block_dims;

  Algebra() = default;
  explicit Algebra(std::vector<int> dims) : block_dims(std::move(dims)) {
    if (block_dims.empty()) throw Error("Algebra: needs at least one block");
    for (int n : block_dims)
      if (n < 1) throw Error("Algebra: block dimensions must be positive");
  }

  int num_blocks() const { return static_cast<int>(block_dims.size()); }
  /// Σ n_i — dimension of the underlying Hilbert space direct sum.
  int total_dim() const {
    int t = 0;
    for (int n : block_dims) t += n;
    return t;
  }
  /// Σ n_i² — complex coordinate dimension of the element space.
  int coord_dim() const {
    int t = 0;
    for (int n : block_dims) t += n * n;
    return t;
  }

  bool operator==(const Algebra& o) const { return block_dims == o.block_dims; }
  bool operator!=(const Algebra& o) const { return !(*this == o); }
};

/// A block-matrix element of a direct-sum algebra.
class Element {
 public:
  Element() = default;
  Element(Algebra alg, std::vector<Mat> blocks)
      : algebra_(std::move(alg)), blocks_(std::move(blocks)) {
    check_shapes();
  }

  static Element zero(const Algebra& alg);
  static Element unit(const Algebra& alg);

  const Algebra& algebra() const { return algebra_; }
  const std::vector<Mat>& blocks() const { return blocks_; }
  const Mat& block(int i) const { return blocks_[static_cast<size_t>(i)]; }
  Mat& block(int i) { return blocks_[static_cast<size_t>(i)]; }
  int num_blocks() const { return algebra_.num_blocks(); }

  Element adjoint() const;
  Complex trace() const;  // Σ_i tr x_i

  Element& operator+=(const Element& o);
  Element& operator-=(const Element& o);
  Element& operator*=(Complex c);

  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(Complex c, Element a) { return a *= c; }
  friend Element operator*(Element a, Complex c) { return a *= c; }
  friend Element operator*(const Element& a, const Element& b);

  /// vec of all blocks (column-major per block), orthonormal for tr(x†y).
  Vec coordinates() const;
  static Element from_coordinates(const Algebra& alg, const Vec& v);

 private:
  void check_shapes() const;

  Algebra algebra_;
  std::vector<Mat> blocks_;
};

void require_same_algebra(const Algebra& a, const Algebra& b,
                          const char* where);

bool is_self_adjoint(const Element& x, double tol = 1e-12);

struct BlockSpectrum {
  // Per block: eigenvalues sorted descending, columns of vectors matching.
  std::vector<RealVec> eigenvalues;
  std::vector<Mat> eigenvectors;
};

/// Blockwise spectral decomposition of a self-adjoint element.
/// Eigenvalues descending; V†V = I and ‖x_i − VΛV†‖ ≤ 1e-10·(1+‖x‖).
BlockSpectrum herm_spectrum(const Element& x);

/// Max over blocks of the largest singular value.
double operator_norm(const Element& x);

bool is_positive(const Element& x, double tol = kDefaultTol);

/// φ(x) = Σ_i tr(h_i x_i) with a Hermitian block density h.
class HermitianFunctional {
 public:
  HermitianFunctional() = default;
  HermitianFunctional(Algebra alg, std::vector<Mat> density);

  const Algebra& algebra() const { return algebra_; }
  const std::vector<Mat>& density() const { return density_; }
  const Mat& density_block(int i) const {
    return density_[static_cast<size_t>(i)];
  }

  Element density_element() const { return Element(algebra_, density_); }

 private:
  Algebra algebra_;
  std::vector<Mat> density_;
};

Complex pair(const HermitianFunctional& phi, const Element& x);

/// Trace norm of the density: the dual norm of the operator norm.
double functional_norm(const HermitianFunctional& phi);

/// φ = φ⁺ − φ⁻ with orthogonal positive parts (blockwise spectral split).
std::pair<HermitianFunctional, HermitianFunctional> jordan_decompose(
    const HermitianFunctional& phi);

/// True iff every density block is within tol (operator norm) of its
/// normalized-trace multiple of the identity.
bool is_tracial(const HermitianFunctional& phi, double tol = kDefaultTol);

/// Positive unit-trace functional.
class State {
 public:
  State() = default;
  explicit State(HermitianFunctional phi, double tol = 1e-10);

  const HermitianFunctional& functional() const { return phi_; }
  const Algebra& algebra() const { return phi_.algebra(); }
  const std::vector<Mat>& density() const { return phi_.density(); }

  /// The normalized trace h_i = I/(Σ n_j).
  static State normalized_trace(const Algebra& alg);
  /// Tracial state with given orbit weights t_i = tr h_i (must sum to 1).
  static State tracial(const Algebra& alg, const std::vector<double>& weights);

 private:
  HermitianFunctional phi_;
};

inline Complex pair(const State& phi, const Element& x) {
  return pair(phi.functional(), x);
}

double min_density_eigenvalue(const State& phi);

}  // namespace ncx
