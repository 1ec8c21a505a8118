#pragma once

// States as finite linear combinations of delta functions, plane waves and
// Gaussian packets, with every kernel inner product evaluated in closed form.
//
// All integrands reduce to exp(-1/2 z^T A z + b^T z + c) with Re(A) SPD, so a
// single Gaussian-integral routine serves every primitive pair. Conventions:
//
//   <f, g>_K = \int\int k(x, y) f(x) conj(g(y)) dx dy      (linear in f)
//   Packet{mu, w, p}(x) = exp(-|x - mu|^2 / (4 w^2)) exp(i p.x)   (unnormalized)
//
// Lengths are in Planck units and hbar = 1.

#include <array>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "stategeo/errors.hpp"
#include "stategeo/kernel_spec.hpp"
#include "stategeo/parallel.hpp"

namespace stategeo {

using Complex = std::complex<double>;

inline constexpr int kMaxDim = 3;

/// Point or momentum in R^d, d in {1, 2, 3}. Fixed capacity, no heap.
using VecD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Builds a VecD, rejecting empty, oversized, or non-finite input.
[[nodiscard]] VecD make_vec(std::initializer_list<double> components);
[[nodiscard]] VecD make_vec(std::span<const double> components);
[[nodiscard]] VecD zero_vec(int dim);

[[nodiscard]] inline bool vec_equal(const VecD& a, const VecD& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

struct Delta {
  VecD center;
  bool operator==(const Delta& o) const { return vec_equal(center, o.center); }
};

struct PlaneWave {
  VecD momentum;
  bool operator==(const PlaneWave& o) const { return vec_equal(momentum, o.momentum); }
};

struct Packet {
  VecD center;
  double width = 1.0;
  VecD momentum;
  bool operator==(const Packet& o) const {
    return vec_equal(center, o.center) && width == o.width && vec_equal(momentum, o.momentum);
  }
};

using Primitive = std::variant<Delta, PlaneWave, Packet>;

[[nodiscard]] Primitive make_delta(const VecD& center);
[[nodiscard]] Primitive make_plane_wave(const VecD& momentum);
/// Packet at rest when momentum is omitted.
[[nodiscard]] Primitive make_packet(const VecD& center, double width);
[[nodiscard]] Primitive make_packet(const VecD& center, double width, const VecD& momentum);

[[nodiscard]] int dimension(const Primitive& prim);
[[nodiscard]] bool is_delta(const Primitive& prim);
[[nodiscard]] bool is_packet(const Primitive& prim);
[[nodiscard]] std::string describe(const Primitive& prim);

/// One-coordinate restriction of a primitive. Kernels and primitives all
/// factor over coordinates, so a d-dimensional pair integral is the product
/// of d one-dimensional ones.
[[nodiscard]] Primitive coordinate_slice(const Primitive& prim, int axis);

template <std::size_t Arity>
struct ProductTerm {
  Complex coeff;
  std::array<Primitive, Arity> factors;
  bool operator==(const ProductTerm&) const = default;
};

/// sum_i coeff_i * (factor_i1 (x) ... (x) factor_iArity).
/// Arity 1 is a single-particle state, arity 2 a state of the pair in H (x) H.
template <std::size_t Arity>
class ProductExpr {
 public:
  using Term = ProductTerm<Arity>;

  /// Throws DomainError when empty, when dimensions disagree, when a
  /// coefficient is non-finite, or when every coefficient is zero.
  explicit ProductExpr(std::vector<Term> terms);

  [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }
  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] int dim() const { return dim_; }

  [[nodiscard]] ProductExpr scaled(Complex factor) const;

  /// a * lhs + b * rhs. Terms whose resulting coefficient is exactly zero are dropped.
  [[nodiscard]] static ProductExpr combine(Complex a, const ProductExpr& lhs, Complex b, const ProductExpr& rhs);

  bool operator==(const ProductExpr&) const = default;

 private:
  std::vector<Term> terms_;
  int dim_ = 0;
};

using StateExpr = ProductExpr<1>;
using PairStateExpr = ProductExpr<2>;
using Term1 = ProductTerm<1>;
using Term2 = ProductTerm<2>;

/// Single-term conveniences.
[[nodiscard]] StateExpr single(const Primitive& prim, Complex coeff = 1.0);
[[nodiscard]] PairStateExpr product(const Primitive& left, const Primitive& right, Complex coeff = 1.0);

/// Canonical integrand exp(-1/2 z^T A z + b^T z + c) over R^n, n <= 2 * kMaxDim.
struct QuadForm {
  static constexpr int kMaxN = 2 * kMaxDim;
  using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxN, kMaxN>;
  using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxN, 1>;

  Matrix a;
  Vector b;
  Complex c{0.0, 0.0};

  [[nodiscard]] int n() const { return static_cast<int>(a.rows()); }
};

struct IntegralOptions {
  /// Largest accepted |lambda_max| / |lambda_min| of A.
  double condition_cap = 1e12;
};

/// (2 pi)^{n/2} det(A)^{-1/2} exp(1/2 b^T A^{-1} b + c).
/// det(A)^{-1/2} is the product of principal square roots of the eigenvalues,
/// all of which lie in the right half plane when Re(A) is SPD.
/// Throws DomainError if Re(A) is not SPD, NumericalFailure past the condition cap.
[[nodiscard]] Complex gaussian_integral(const QuadForm& q, const IntegralOptions& opts = {});

/// Integrand k(x,y) f(x) conj(g(y)) in canonical form. Delta primitives are
/// substituted, so n = 2d (no deltas), d (one delta) or 0 (two deltas).
/// Throws DivergenceError when the integral has no finite value.
[[nodiscard]] QuadForm compile_pair(const Primitive& f, const Primitive& g, const KernelSpec& kernel);

/// Kernel inner product of two primitives, evaluated as a product of
/// per-coordinate closed forms.
[[nodiscard]] Complex primitive_inner(const Primitive& f, const Primitive& g, const KernelSpec& kernel);

/// Generic sesquilinear expansion sum_ij c_i conj(d_j) prod_k <f_ik, g_jk>.
/// When both sides are the same expression the result is evaluated in
/// Hermitian form and is exactly real.
template <std::size_t Arity>
[[nodiscard]] Complex inner(const ProductExpr<Arity>& lhs, const ProductExpr<Arity>& rhs, const KernelSpec& kernel,
                            Exec exec = Exec::Parallel);

[[nodiscard]] Complex inner_product(const StateExpr& phi, const StateExpr& psi, const KernelSpec& kernel,
                                    Exec exec = Exec::Parallel);
[[nodiscard]] Complex pair_inner_product(const PairStateExpr& phi, const PairStateExpr& psi, const KernelSpec& kernel,
                                         Exec exec = Exec::Parallel);

/// <phi, phi>_K as a real number.
template <std::size_t Arity>
[[nodiscard]] double norm_squared(const ProductExpr<Arity>& expr, const KernelSpec& kernel, Exec exec = Exec::Parallel);

/// Squared norm of an unvalidated term list (may be all-zero). Used for
/// differences of nearby states where cancellation must happen in the
/// coefficients rather than in the Gram sum.
template <std::size_t Arity>
[[nodiscard]] double norm_squared_of_terms(std::span<const ProductTerm<Arity>> terms, const KernelSpec& kernel,
                                           Exec exec = Exec::Parallel);

/// Merges terms with identical factors by summing their coefficients.
template <std::size_t Arity>
[[nodiscard]] std::vector<ProductTerm<Arity>> merge_like_terms(std::span<const ProductTerm<Arity>> terms);

/// Ordinary L2 inner product \int phi(x) conj(psi(x)) dx. Packets only.
[[nodiscard]] Complex l2_inner_product(const StateExpr& phi, const StateExpr& psi);

/// Gram matrix G_ij = <f_i, f_j>_K of a primitive list.
[[nodiscard]] Eigen::MatrixXcd primitive_gram(std::span<const Primitive> prims, const KernelSpec& kernel,
                                              Exec exec = Exec::Parallel);

extern template class ProductExpr<1>;
extern template class ProductExpr<2>;

}  // namespace stategeo
