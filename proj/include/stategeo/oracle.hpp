#pragma once

// Brute-force numerical counterparts of the closed forms: tensor-grid
// quadrature of kernel inner products and central finite differences.
//
// The quadrature evaluates the integrand k(x,y) f(x) conj(g(y)) pointwise and
// never touches QuadForm or gaussian_integral. Delta primitives are handled
// by substituting their centre; they are never discretized. Each coordinate
// is integrated separately (kernels and primitives factor over coordinates),
// so a d-dimensional pair costs d two-dimensional grids instead of one
// 2d-dimensional grid.

#include <string>

#include "stategeo/gaussian_algebra.hpp"
#include "stategeo/sampling.hpp"

namespace stategeo::oracle {

enum class QuadRule { Trapezoid, GaussLegendre };

[[nodiscard]] std::string to_string(QuadRule rule);
[[nodiscard]] QuadRule parse_rule(const std::string& text);

struct QuadratureSpec {
  /// Half-width of the integration box [-H, H] per variable; 0 selects
  /// 8 * (max packet width + max |centre| + kernel length scale).
  double box_halfwidth = 0.0;
  /// Nodes per axis on the coarsest level; odd and >= 33.
  int nodes_per_axis = 257;
  QuadRule rule = QuadRule::Trapezoid;
  /// Number of grid halvings after the coarsest level; the error estimate is
  /// the difference of the last two levels.
  int refinement_levels = 1;
  /// Raise the coarsest node count until the narrowest Gaussian feature and
  /// the fastest oscillation are resolved.
  bool auto_resolve = true;
  /// Largest tolerated |integrand| on the box boundary relative to its peak.
  double edge_tolerance = 1e-14;
  /// Relative error estimate above which refinement is declared non-convergent.
  double convergence_tolerance = 1e-7;

  void validate() const;
};

struct QuadResult {
  Complex value;
  double error_estimate = 0.0;
  /// Nodes per axis on the finest level of the most expensive coordinate (0 if no grid was needed).
  int finest_nodes = 0;
};

/// Throws DomainError on an invalid spec, NumericalFailure("box too small")
/// if the integrand has not decayed at the box edge, NumericalFailure on
/// non-convergent refinement and DivergenceError for pairs with no finite value.
[[nodiscard]] QuadResult quad_primitive_pair(const Primitive& f, const Primitive& g, const KernelSpec& kernel,
                                             const QuadratureSpec& spec = {}, Exec exec = Exec::Parallel);

[[nodiscard]] QuadResult quad_inner_product(const StateExpr& phi, const StateExpr& psi, const KernelSpec& kernel,
                                            const QuadratureSpec& spec = {}, Exec exec = Exec::Parallel);

/// Tensor-grid quadrature of exp(-1/2 z^T A z + b^T z + c), n <= 3. The box
/// is centred on the peak of the modulus, Re(A)^{-1} Re(b).
[[nodiscard]] QuadResult quad_gaussian_form(const QuadForm& q, const QuadratureSpec& spec = {});

struct PairCheck {
  Primitive f;
  Primitive g;
  Complex closed;
  QuadResult quad;
  /// |quad - closed| / |closed|; 0 when both vanish.
  double relative_error = 0.0;
};

struct PairSweep {
  std::vector<PairCheck> checks;
  /// Pairs drawn in total, including those skipped for heavy cancellation.
  int drawn = 0;
  double max_relative_error = 0.0;
};

/// Compares the closed form with quadrature on `count` random convergent
/// primitive pairs. Pairs whose value is below `min_cancellation` times the
/// integral of the integrand's modulus are redrawn: quadrature cannot resolve
/// them to any relative accuracy, whatever the closed form says.
[[nodiscard]] PairSweep verify_random_pairs(Sampler& sampler, const KernelSpec& kernel, int count,
                                            const QuadratureSpec& spec = {}, double min_cancellation = 1e-6,
                                            const PrimitiveRanges& ranges = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

/// Central mixed second difference d^2 f / dx^i dy^k at (x, y):
/// [f(x+h e_i, y+h e_k) - f(x+h e_i, y-h e_k) - f(x-h e_i, y+h e_k) + f(x-h e_i, y-h e_k)] / (4 h^2).
/// Arithmetic happens in the scalar type of Vec, so extended-precision
/// vectors remove most of the cancellation for small h.
template <class Fn, class Vec>
[[nodiscard]] double finite_difference(Fn&& f, const Vec& x, const Vec& y, int i, int k,
                                       typename Vec::Scalar h) {
  Vec xp = x, xm = x, yp = y, ym = y;
  xp[i] += h;
  xm[i] -= h;
  yp[k] += h;
  ym[k] -= h;
  return static_cast<double>((f(xp, yp) - f(xp, ym) - f(xm, yp) + f(xm, ym)) / (4 * h * h));
}

}  // namespace stategeo::oracle
