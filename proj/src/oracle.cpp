#include "stategeo/oracle.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace stategeo::oracle {

std::string to_string(QuadRule rule) { return rule == QuadRule::Trapezoid ? "trapezoid" : "gauss-legendre"; }

QuadRule parse_rule(const std::string& text) {
  if (text == "trapezoid") return QuadRule::Trapezoid;
  if (text == "gauss-legendre" || text == "gauss_legendre") return QuadRule::GaussLegendre;
  throw DomainError("unknown quadrature rule '" + text + "'");
}

void QuadratureSpec::validate() const {
  if (!(box_halfwidth >= 0.0) || !std::isfinite(box_halfwidth)) {
    throw DomainError("quadrature: box_halfwidth must be >= 0 (0 = automatic)");
  }
  if (nodes_per_axis < 33 || nodes_per_axis % 2 == 0) throw DomainError("quadrature: nodes_per_axis must be odd and >= 33");
  if (refinement_levels < 1) throw DomainError("quadrature: refinement_levels must be >= 1");
  if (!(edge_tolerance > 0.0)) throw DomainError("quadrature: edge_tolerance must be positive");
  if (!(convergence_tolerance > 0.0)) throw DomainError("quadrature: convergence_tolerance must be positive");
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(count), 0.0);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 0; k < count; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      dp = count * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -z;
    nodes[static_cast<std::size_t>(count - 1 - i)] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(count - 1 - i)] = w;
  }
}

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr int kGaussPanelNodes = 8;
constexpr std::ptrdiff_t kMaxNodes = 400000;

// Integrand pieces for one coordinate. Both kernels split into
// sep(x) * exp(-coupling * (x - y)^2) * sep(y).
struct KernelAxis {
  double alpha = 0.0;
  double coupling = 0.0;

  [[nodiscard]] double sep(double x) const { return std::exp(-alpha * x * x); }
  [[nodiscard]] double toeplitz(double dx) const { return std::exp(-coupling * dx * dx); }
};

KernelAxis kernel_axis(const KernelSpec& kernel) {
  if (kernel.is_translation()) {
    const double s = kernel.as_translation().sigma;
    return {0.0, 1.0 / (2.0 * s * s)};
  }
  return {kernel.as_confined().alpha, kernel.as_confined().beta};
}

// Pointwise amplitude of a one-coordinate, non-delta primitive.
Complex amplitude(const Primitive& prim, double x) {
  if (const auto* pw = std::get_if<PlaneWave>(&prim)) return std::exp(kI * (pw->momentum[0] * x));
  const auto& p = std::get<Packet>(prim);
  const double u = x - p.center[0];
  return std::exp(Complex(-u * u / (4.0 * p.width * p.width), p.momentum[0] * x));
}

struct Axis {
  std::vector<double> x;
  std::vector<double> w;
  double h = 0.0;  // uniform spacing (trapezoid only)
};

Axis make_axis(QuadRule rule, int n0, int level, double half) {
  Axis axis;
  if (rule == QuadRule::Trapezoid) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(n0 - 1) * (std::ptrdiff_t{1} << level) + 1;
    axis.h = 2.0 * half / static_cast<double>(n - 1);
    axis.x.resize(static_cast<std::size_t>(n));
    axis.w.assign(static_cast<std::size_t>(n), axis.h);
    for (std::ptrdiff_t k = 0; k < n; ++k) axis.x[static_cast<std::size_t>(k)] = -half + static_cast<double>(k) * axis.h;
    axis.w.front() *= 0.5;
    axis.w.back() *= 0.5;
    return axis;
  }
  // Panels two trapezoid spacings wide: resolving the narrowest feature to
  // the same accuracy as the trapezoid rule needs a few panels per width.
  const int panels = std::max(1, (n0 - 1) / 2) << level;
  std::vector<double> gx, gw;
  gauss_legendre(kGaussPanelNodes, gx, gw);
  const double pw = 2.0 * half / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -half + (p + 0.5) * pw;
    for (int k = 0; k < kGaussPanelNodes; ++k) {
      axis.x.push_back(mid + 0.5 * pw * gx[static_cast<std::size_t>(k)]);
      axis.w.push_back(0.5 * pw * gw[static_cast<std::size_t>(k)]);
    }
  }
  return axis;
}

struct Diagnostics {
  double peak = 0.0;
  double boundary = 0.0;
  double mass = 0.0;
};

// Coupling exp(-c (m h)^2) for m = 0, 1, ... on a uniform grid, truncated
// where it underflows to exactly zero.
std::vector<double> toeplitz_table(const Axis& axis, const KernelAxis& k) {
  std::vector<double> table;
  const auto n = axis.x.size();
  for (std::size_t m = 0; m < n; ++m) {
    const double t = k.toeplitz(static_cast<double>(m) * axis.h);
    if (t == 0.0) break;
    table.push_back(t);
  }
  return table;
}

// Visits every nonzero coupling (i, j, T_ij) of row i.
template <class Fn>
void for_row(const Axis& axis, const std::vector<double>& table, const KernelAxis& k, std::ptrdiff_t i, Fn&& fn) {
  const auto n = static_cast<std::ptrdiff_t>(axis.x.size());
  if (axis.h > 0.0) {
    const auto band = static_cast<std::ptrdiff_t>(table.size());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - band + 1);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + band - 1);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) fn(j, table[static_cast<std::size_t>(std::abs(i - j))]);
  } else {
    const double xi = axis.x[static_cast<std::size_t>(i)];
    for (std::ptrdiff_t j = 0; j < n; ++j) fn(j, k.toeplitz(xi - axis.x[static_cast<std::size_t>(j)]));
  }
}

// One coordinate with both variables free: sum_ij fx_i T(x_i - y_j) gy_j,
// where fx, gy already carry the quadrature weights and separable factors.
Complex sum_2d(const Axis& axis, const std::vector<double>& table, const std::vector<Complex>& fx,
               const std::vector<Complex>& gy, const KernelAxis& k, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(axis.x.size());
  std::vector<Complex> rows(static_cast<std::size_t>(n));
  for_each_index(n, exec, [&](std::ptrdiff_t i) {
    const Complex fi = fx[static_cast<std::size_t>(i)];
    Complex acc{};
    if (fi != Complex{}) {
      for_row(axis, table, k, i, [&](std::ptrdiff_t j, double t) { acc += t * gy[static_cast<std::size_t>(j)]; });
    }
    rows[static_cast<std::size_t>(i)] = fi * acc;
  });
  return pairwise_sum(std::span<const Complex>(rows));
}

// Peak and boundary of |integrand| and its absolute mass. Couplings that
// underflowed are exactly zero and cannot raise the boundary value.
Diagnostics diagnose_2d(const Axis& axis, const std::vector<double>& table, const std::vector<Complex>& fx,
                        const std::vector<Complex>& gy, const KernelAxis& k) {
  const auto n = static_cast<std::ptrdiff_t>(axis.x.size());
  std::vector<double> af(static_cast<std::size_t>(n)), ag(static_cast<std::size_t>(n));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    af[s] = std::abs(fx[s]) / axis.w[s];
    ag[s] = std::abs(gy[s]) / axis.w[s];
  }
  Diagnostics d;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (af[si] == 0.0) continue;
    const bool edge_row = i == 0 || i == n - 1;
    for_row(axis, table, k, i, [&](std::ptrdiff_t j, double t) {
      const auto sj = static_cast<std::size_t>(j);
      const double v = af[si] * t * ag[sj];
      d.peak = std::max(d.peak, v);
      d.mass += v * axis.w[si] * axis.w[sj];
      if (edge_row || j == 0 || j == n - 1) d.boundary = std::max(d.boundary, v);
    });
  }
  return d;
}

struct AxisResult {
  Complex value;
  double error = 0.0;
  int finest = 0;
};

void check_diagnostics(const Diagnostics& d, const QuadratureSpec& spec, const Primitive& f, const Primitive& g) {
  if (d.boundary > spec.edge_tolerance * d.peak) {
    throw NumericalFailure("quadrature box too small: integrand of " + describe(f) + " and " + describe(g) +
                           " has not decayed at the box edge");
  }
}

void check_convergence(const AxisResult& r, double mass, const QuadratureSpec& spec) {
  if (r.error > spec.convergence_tolerance * std::abs(r.value) && r.error > 1e-13 * mass) {
    throw NumericalFailure("quadrature refinement did not converge");
  }
}

struct PairPlan {
  double half = 0.0;
  int n0 = 0;
};

PairPlan plan_pair(const Primitive& f, const Primitive& g, const KernelSpec& kernel, const QuadratureSpec& spec) {
  double max_width = 0.0;
  double max_center = 0.0;
  double max_momentum = 0.0;
  double min_scale = kernel.is_translation() ? kernel.as_translation().sigma / std::numbers::sqrt2
                                             : 0.5 / std::sqrt(kernel.as_confined().beta);
  for (const Primitive* p : {&f, &g}) {
    std::visit(
        [&](const auto& prim) {
          using T = std::decay_t<decltype(prim)>;
          if constexpr (std::is_same_v<T, Delta>) {
            max_center = std::max(max_center, prim.center.cwiseAbs().maxCoeff());
          } else if constexpr (std::is_same_v<T, PlaneWave>) {
            max_momentum = std::max(max_momentum, prim.momentum.cwiseAbs().maxCoeff());
          } else {
            max_width = std::max(max_width, prim.width);
            max_center = std::max(max_center, prim.center.cwiseAbs().maxCoeff());
            max_momentum = std::max(max_momentum, prim.momentum.cwiseAbs().maxCoeff());
            min_scale = std::min(min_scale, std::numbers::sqrt2 * prim.width);
          }
        },
        *p);
  }
  PairPlan plan;
  plan.half = spec.box_halfwidth > 0.0 ? spec.box_halfwidth : 8.0 * (max_width + max_center + kernel.length_scale());
  plan.n0 = spec.nodes_per_axis;
  if (spec.auto_resolve) {
    // Trapezoid aliasing error for a Gaussian of width s modulated at
    // frequency p is ~exp(-(2 pi / h - p)^2 s^2 / 2); this spacing keeps it
    // below 1e-17.
    const double h = 2.0 * std::numbers::pi / (max_momentum + 9.0 / min_scale);
    const double needed = std::ceil(2.0 * plan.half / h) + 1.0;
    if (needed > static_cast<double>(kMaxNodes)) throw NumericalFailure("quadrature grid would be too large");
    plan.n0 = std::max(plan.n0, static_cast<int>(needed));
    if (plan.n0 % 2 == 0) ++plan.n0;
  }
  if ((static_cast<std::ptrdiff_t>(plan.n0) << spec.refinement_levels) > kMaxNodes) {
    throw NumericalFailure("quadrature grid would be too large");
  }
  return plan;
}

AxisResult integrate_axis(const Primitive& f, const Primitive& g, const KernelAxis& k, const PairPlan& plan,
                          const QuadratureSpec& spec, Exec exec) {
  const bool f_delta = is_delta(f);
  const bool g_delta = is_delta(g);
  if (f_delta && g_delta) {
    const double a = std::get<Delta>(f).center[0];
    const double b = std::get<Delta>(g).center[0];
    return {Complex(k.sep(a) * k.toeplitz(a - b) * k.sep(b), 0.0), 0.0, 0};
  }

  std::vector<Complex> levels;
  Diagnostics diag;
  int finest = 0;
  for (int level = 0; level <= spec.refinement_levels; ++level) {
    const Axis axis = make_axis(spec.rule, plan.n0, level, plan.half);
    const auto n = axis.x.size();
    finest = static_cast<int>(n);
    if (f_delta || g_delta) {
      // One variable pinned at the delta centre: a 1D integral over the other.
      const double pinned = f_delta ? std::get<Delta>(f).center[0] : std::get<Delta>(g).center[0];
      const Primitive& free = f_delta ? g : f;
      std::vector<Complex> cells(n);
      for (std::size_t i = 0; i < n; ++i) {
        Complex amp = amplitude(free, axis.x[i]);
        if (f_delta) amp = std::conj(amp);
        cells[i] = axis.w[i] * k.sep(pinned) * k.toeplitz(pinned - axis.x[i]) * k.sep(axis.x[i]) * amp;
      }
      if (level == 0) {
        for (std::size_t i = 0; i < n; ++i) {
          const double v = std::abs(cells[i]) / axis.w[i];
          diag.peak = std::max(diag.peak, v);
          diag.mass += std::abs(cells[i]);
        }
        diag.boundary = std::max(std::abs(cells.front()) / axis.w.front(), std::abs(cells.back()) / axis.w.back());
      }
      levels.push_back(pairwise_sum(std::span<const Complex>(cells)));
    } else {
      std::vector<Complex> fx(n), gy(n);
      for (std::size_t i = 0; i < n; ++i) {
        fx[i] = axis.w[i] * k.sep(axis.x[i]) * amplitude(f, axis.x[i]);
        gy[i] = axis.w[i] * k.sep(axis.x[i]) * std::conj(amplitude(g, axis.x[i]));
      }
      const std::vector<double> table = axis.h > 0.0 ? toeplitz_table(axis, k) : std::vector<double>{};
      if (level == 0) diag = diagnose_2d(axis, table, fx, gy, k);
      levels.push_back(sum_2d(axis, table, fx, gy, k, exec));
    }
    if (level == 0) check_diagnostics(diag, spec, f, g);
  }
  AxisResult r{levels.back(), std::abs(levels.back() - levels[levels.size() - 2]), finest};
  check_convergence(r, diag.mass, spec);
  return r;
}

}  // namespace

QuadResult quad_primitive_pair(const Primitive& f, const Primitive& g, const KernelSpec& kernel,
                               const QuadratureSpec& spec, Exec exec) {
  spec.validate();
  const int d = dimension(f);
  if (dimension(g) != d) throw DomainError("quadrature: primitive dimensions differ");
  if (kernel.is_translation() && std::holds_alternative<PlaneWave>(f) && std::holds_alternative<PlaneWave>(g)) {
    throw DivergenceError("quadrature: " + describe(f) + " and " + describe(g) + " have no finite inner product under " +
                          kernel.to_string());
  }
  const PairPlan plan = plan_pair(f, g, kernel, spec);
  const KernelAxis k = kernel_axis(kernel);

  std::vector<AxisResult> axes;
  for (int axis = 0; axis < d; ++axis) {
    axes.push_back(integrate_axis(coordinate_slice(f, axis), coordinate_slice(g, axis), k, plan, spec, exec));
  }
  QuadResult out{Complex(1.0, 0.0), 0.0, 0};
  for (const auto& a : axes) {
    out.value *= a.value;
    out.finest_nodes = std::max(out.finest_nodes, a.finest);
  }
  // First-order propagation of per-coordinate errors through the product.
  for (std::size_t i = 0; i < axes.size(); ++i) {
    double others = 1.0;
    for (std::size_t j = 0; j < axes.size(); ++j) {
      if (j != i) others *= std::abs(axes[j].value);
    }
    out.error_estimate += axes[i].error * others;
  }
  return out;
}

QuadResult quad_inner_product(const StateExpr& phi, const StateExpr& psi, const KernelSpec& kernel,
                              const QuadratureSpec& spec, Exec exec) {
  if (phi.dim() != psi.dim()) throw DomainError("quadrature: state dimensions differ");
  std::vector<Complex> cells;
  QuadResult out{};
  for (const auto& s : phi.terms()) {
    for (const auto& t : psi.terms()) {
      const QuadResult r = quad_primitive_pair(s.factors[0], t.factors[0], kernel, spec, exec);
      cells.push_back(s.coeff * std::conj(t.coeff) * r.value);
      out.error_estimate += std::abs(s.coeff) * std::abs(t.coeff) * r.error_estimate;
      out.finest_nodes = std::max(out.finest_nodes, r.finest_nodes);
    }
  }
  out.value = pairwise_sum(std::span<const Complex>(cells));
  return out;
}

namespace {

Primitive at_rest(const Primitive& p) {
  if (const auto* pw = std::get_if<PlaneWave>(&p)) return make_plane_wave(zero_vec(static_cast<int>(pw->momentum.size())));
  if (const auto* pk = std::get_if<Packet>(&p)) return make_packet(pk->center, pk->width);
  return p;
}

}  // namespace

PairSweep verify_random_pairs(Sampler& sampler, const KernelSpec& kernel, int count, const QuadratureSpec& spec,
                              double min_cancellation, const PrimitiveRanges& ranges) {
  if (count < 0) throw DomainError("verify_random_pairs: count must be nonnegative");
  PairSweep sweep;
  while (static_cast<int>(sweep.checks.size()) < count) {
    auto [f, g] = random_convergent_pair(sampler, kernel, ranges);
    ++sweep.drawn;
    const Complex closed = primitive_inner(f, g, kernel);
    // The integral of |integrand| is the same pair with momenta removed.
    if (!(std::abs(closed) >= min_cancellation * std::abs(primitive_inner(at_rest(f), at_rest(g), kernel)))) continue;
    PairCheck check{f, g, closed, quad_primitive_pair(f, g, kernel, spec), 0.0};
    const double diff = std::abs(check.quad.value - closed);
    check.relative_error = diff == 0.0 ? 0.0 : diff / std::abs(closed);
    sweep.max_relative_error = std::max(sweep.max_relative_error, check.relative_error);
    sweep.checks.push_back(std::move(check));
  }
  return sweep;
}

QuadResult quad_gaussian_form(const QuadForm& q, const QuadratureSpec& spec) {
  spec.validate();
  const int n = q.n();
  if (n < 1 || n > 3) throw DomainError("quad_gaussian_form: dimension must be 1, 2 or 3");
  const Eigen::MatrixXd re = (0.5 * (q.a + q.a.transpose())).real();
  const Eigen::MatrixXd im = (0.5 * (q.a + q.a.transpose())).imag();
  Eigen::LLT<Eigen::MatrixXd> llt(re);
  if (llt.info() != Eigen::Success) throw DomainError("quad_gaussian_form: Re(A) is not SPD");
  const Eigen::VectorXd center = llt.solve(q.b.real());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(re);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double s_min = 1.0 / std::sqrt(lmax);
  const double half = spec.box_halfwidth > 0.0 ? spec.box_halfwidth : 9.0 / std::sqrt(lmin);
  const double spectral = im.size() ? im.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  const double p_max = q.b.imag().cwiseAbs().maxCoeff() + spectral * (center.cwiseAbs().maxCoeff() + half);

  int n0 = spec.nodes_per_axis;
  if (spec.auto_resolve) {
    const double h = 2.0 * std::numbers::pi / (p_max + 9.0 / s_min);
    n0 = std::max(n0, static_cast<int>(std::ceil(2.0 * half / h)) + 1);
    if (n0 % 2 == 0) ++n0;
  }

  const auto integrand = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXcd zc = z.cast<Complex>();
    const Complex e = -0.5 * (zc.transpose() * q.a * zc)(0, 0) + (q.b.transpose() * zc)(0, 0) + q.c;
    return std::exp(e);
  };

  std::vector<Complex> levels;
  int finest = 0;
  double boundary = 0.0;
  double peak = 0.0;
  for (int level = 0; level <= spec.refinement_levels; ++level) {
    const Axis axis = make_axis(spec.rule, n0, level, half);
    const auto m = static_cast<std::ptrdiff_t>(axis.x.size());
    finest = static_cast<int>(m);
    std::ptrdiff_t total = 1;
    for (int k = 0; k < n; ++k) total *= m;
    if (total > 50'000'000) throw NumericalFailure("quad_gaussian_form: grid too large");
    std::vector<Complex> cells(static_cast<std::size_t>(total));
    std::vector<double> mags(level == 0 ? cells.size() : 0);
    std::vector<char> on_edge(level == 0 ? cells.size() : 0);
    for_each_index(total, Exec::Parallel, [&](std::ptrdiff_t idx) {
      Eigen::VectorXd z(n);
      double w = 1.0;
      bool edge = false;
      std::ptrdiff_t rest = idx;
      for (int k = n - 1; k >= 0; --k) {
        const std::ptrdiff_t ik = rest % m;
        rest /= m;
        z[k] = center[k] + axis.x[static_cast<std::size_t>(ik)];
        w *= axis.w[static_cast<std::size_t>(ik)];
        edge = edge || ik == 0 || ik == m - 1;
      }
      const Complex v = integrand(z);
      cells[static_cast<std::size_t>(idx)] = w * v;
      if (!mags.empty()) {
        mags[static_cast<std::size_t>(idx)] = std::abs(v);
        on_edge[static_cast<std::size_t>(idx)] = edge ? 1 : 0;
      }
    });
    if (level == 0) {
      for (std::size_t i = 0; i < mags.size(); ++i) {
        peak = std::max(peak, mags[i]);
        if (on_edge[i]) boundary = std::max(boundary, mags[i]);
      }
      if (boundary > spec.edge_tolerance * peak) throw NumericalFailure("quadrature box too small");
    }
    levels.push_back(pairwise_sum(std::span<const Complex>(cells)));
  }
  return {levels.back(), std::abs(levels.back() - levels[levels.size() - 2]), finest};
}

}  // namespace stategeo::oracle
