#include "stategeo/gaussian_algebra.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace stategeo {

int worker_threads() { return omp_get_max_threads(); }

// ---------------------------------------------------------------------------
// Kernel spec

KernelSpec KernelSpec::translation(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("translation kernel: sigma must be positive");
  return KernelSpec(TranslationKernel{sigma});
}

KernelSpec KernelSpec::confined(double alpha, double beta) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("confined kernel: alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("confined kernel: beta must be positive");
  return KernelSpec(ConfinedKernel{alpha, beta});
}

double KernelSpec::length_scale() const {
  if (is_translation()) return as_translation().sigma;
  return 1.0 / std::sqrt(as_confined().alpha);
}

std::string KernelSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (is_translation()) {
    os << "translation:" << as_translation().sigma;
  } else {
    os << "confined:" << as_confined().alpha << "," << as_confined().beta;
  }
  return os.str();
}

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw DomainError("cannot parse " + what + " from '" + text + "'");
  }
  if (used != text.size()) throw DomainError("trailing characters in " + what + ": '" + text + "'");
  return v;
}

}  // namespace

KernelSpec KernelSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "translation") {
    return translation(args.empty() ? 1.0 : parse_real(args, "sigma"));
  }
  if (name == "confined") {
    if (args.empty()) throw DomainError("confined kernel needs alpha: 'confined:<alpha>[,<beta>]'");
    const auto comma = args.find(',');
    const double alpha = parse_real(args.substr(0, comma), "alpha");
    const double beta = comma == std::string::npos ? 1.0 : parse_real(args.substr(comma + 1), "beta");
    return confined(alpha, beta);
  }
  throw DomainError("unknown kernel '" + text + "' (expected translation:<sigma> or confined:<alpha>[,<beta>])");
}

// ---------------------------------------------------------------------------
// Vectors and primitives

VecD make_vec(std::span<const double> components) {
  if (components.empty() || components.size() > static_cast<std::size_t>(kMaxDim)) {
    throw DomainError("vector dimension must be 1, 2 or 3");
  }
  VecD v(static_cast<Eigen::Index>(components.size()));
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (!std::isfinite(components[i])) throw DomainError("vector components must be finite");
    v[static_cast<Eigen::Index>(i)] = components[i];
  }
  return v;
}

VecD make_vec(std::initializer_list<double> components) {
  return make_vec(std::span<const double>(components.begin(), components.size()));
}

VecD zero_vec(int dim) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("vector dimension must be 1, 2 or 3");
  return VecD::Zero(dim);
}

namespace {

void check_vec(const VecD& v, const char* what) {
  if (v.size() < 1 || v.size() > kMaxDim) throw DomainError(std::string(what) + ": dimension must be 1, 2 or 3");
  if (!v.allFinite()) throw DomainError(std::string(what) + ": components must be finite");
}

std::string fmt_vec(const VecD& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

Primitive make_delta(const VecD& center) {
  check_vec(center, "delta center");
  return Delta{center};
}

Primitive make_plane_wave(const VecD& momentum) {
  check_vec(momentum, "plane-wave momentum");
  return PlaneWave{momentum};
}

Primitive make_packet(const VecD& center, double width) {
  return make_packet(center, width, VecD::Zero(center.size()));
}

Primitive make_packet(const VecD& center, double width, const VecD& momentum) {
  check_vec(center, "packet center");
  check_vec(momentum, "packet momentum");
  if (center.size() != momentum.size()) throw DomainError("packet center and momentum dimensions differ");
  if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("packet width must be positive");
  return Packet{center, width, momentum};
}

int dimension(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> int {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PlaneWave>) {
          return static_cast<int>(p.momentum.size());
        } else {
          return static_cast<int>(p.center.size());
        }
      },
      prim);
}

bool is_delta(const Primitive& prim) { return std::holds_alternative<Delta>(prim); }
bool is_packet(const Primitive& prim) { return std::holds_alternative<Packet>(prim); }

std::string describe(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Delta>) {
          return "delta" + fmt_vec(p.center);
        } else if constexpr (std::is_same_v<T, PlaneWave>) {
          return "plane_wave" + fmt_vec(p.momentum);
        } else {
          std::ostringstream os;
          os << "packet(center=" << fmt_vec(p.center) << ",width=" << p.width << ",momentum=" << fmt_vec(p.momentum)
             << ")";
          return os.str();
        }
      },
      prim);
}

Primitive coordinate_slice(const Primitive& prim, int axis) {
  return std::visit(
      [axis](const auto& p) -> Primitive {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Delta>) {
          return Delta{VecD::Constant(1, p.center[axis])};
        } else if constexpr (std::is_same_v<T, PlaneWave>) {
          return PlaneWave{VecD::Constant(1, p.momentum[axis])};
        } else {
          return Packet{VecD::Constant(1, p.center[axis]), p.width, VecD::Constant(1, p.momentum[axis])};
        }
      },
      prim);
}

// ---------------------------------------------------------------------------
// Expressions

template <std::size_t Arity>
ProductExpr<Arity>::ProductExpr(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw DomainError("state expression must have at least one term");
  dim_ = dimension(terms_.front().factors[0]);
  bool any_nonzero = false;
  for (const auto& t : terms_) {
    if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag())) {
      throw DomainError("state coefficients must be finite");
    }
    any_nonzero = any_nonzero || t.coeff != Complex{};
    for (const auto& f : t.factors) {
      if (dimension(f) != dim_) throw DomainError("all primitives of a state must share one dimension");
    }
  }
  if (!any_nonzero) throw DomainError("state expression has only zero coefficients");
}

template <std::size_t Arity>
ProductExpr<Arity> ProductExpr<Arity>::scaled(Complex factor) const {
  std::vector<Term> out = terms_;
  for (auto& t : out) t.coeff *= factor;
  return ProductExpr(std::move(out));
}

template <std::size_t Arity>
ProductExpr<Arity> ProductExpr<Arity>::combine(Complex a, const ProductExpr& lhs, Complex b, const ProductExpr& rhs) {
  std::vector<Term> out;
  out.reserve(lhs.size() + rhs.size());
  for (const auto& t : lhs.terms_) {
    if (const Complex c = a * t.coeff; c != Complex{}) out.push_back({c, t.factors});
  }
  for (const auto& t : rhs.terms_) {
    if (const Complex c = b * t.coeff; c != Complex{}) out.push_back({c, t.factors});
  }
  return ProductExpr(std::move(out));
}

template class ProductExpr<1>;
template class ProductExpr<2>;

StateExpr single(const Primitive& prim, Complex coeff) { return StateExpr({Term1{coeff, {prim}}}); }

PairStateExpr product(const Primitive& left, const Primitive& right, Complex coeff) {
  return PairStateExpr({Term2{coeff, {left, right}}});
}

// ---------------------------------------------------------------------------
// Gaussian integral

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

QuadForm::Matrix symmetric_part(const QuadForm::Matrix& a) { return 0.5 * (a + a.transpose()); }

bool real_part_spd(const QuadForm::Matrix& a) {
  using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, QuadForm::kMaxN, QuadForm::kMaxN>;
  const RealMatrix re = a.real();
  if (!re.allFinite()) return false;
  Eigen::LLT<RealMatrix> llt(re);
  return llt.info() == Eigen::Success;
}

}  // namespace

Complex gaussian_integral(const QuadForm& q, const IntegralOptions& opts) {
  const int n = q.n();
  if (q.a.cols() != n || q.b.size() != n) throw DomainError("quadratic form: inconsistent sizes");
  if (n == 0) return std::exp(q.c);

  const QuadForm::Matrix a = symmetric_part(q.a);
  if (!real_part_spd(a)) throw DomainError("quadratic form: Re(A) is not symmetric positive definite");

  Complex log_det;
  Complex quad;
  double cond = 1.0;
  if (n == 1) {
    log_det = std::log(a(0, 0));
    quad = q.b[0] * q.b[0] / a(0, 0);
  } else if (n == 2) {
    // Both eigenvalues have positive real part, so arg(l1) + arg(l2) lies in
    // (-pi, pi) and the principal log of det equals log(l1) + log(l2).
    const Complex det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const Complex half_trace = 0.5 * (a(0, 0) + a(1, 1));
    const Complex disc = std::sqrt(half_trace * half_trace - det);
    const double l1 = std::abs(half_trace + disc);
    const double l2 = std::abs(half_trace - disc);
    cond = std::max(l1, l2) / std::min(l1, l2);
    log_det = std::log(det);
    const Complex b0 = q.b[0];
    const Complex b1 = q.b[1];
    quad = (a(1, 1) * b0 * b0 - 2.0 * a(0, 1) * b0 * b1 + a(0, 0) * b1 * b1) / det;
  } else {
    Eigen::ComplexEigenSolver<QuadForm::Matrix> eig(a, /*computeEigenvectors=*/false);
    if (eig.info() != Eigen::Success) throw NumericalFailure("quadratic form: eigen-decomposition failed");
    double lmax = 0.0;
    double lmin = std::numeric_limits<double>::infinity();
    log_det = 0.0;
    for (int k = 0; k < n; ++k) {
      const Complex lambda = eig.eigenvalues()[k];
      log_det += std::log(lambda);
      lmax = std::max(lmax, std::abs(lambda));
      lmin = std::min(lmin, std::abs(lambda));
    }
    cond = lmax / lmin;
    const QuadForm::Vector x = a.partialPivLu().solve(q.b);
    quad = (q.b.transpose() * x)(0, 0);
  }
  if (!(cond <= opts.condition_cap)) {
    throw NumericalFailure("quadratic form: condition number exceeds cap");
  }
  const Complex exponent = 0.5 * n * kLog2Pi - 0.5 * log_det + 0.5 * quad + q.c;
  return std::exp(exponent);
}

// ---------------------------------------------------------------------------
// Pair compilation

namespace {

struct FullForm {
  QuadForm::Matrix a;
  QuadForm::Vector b;
  Complex c{0.0, 0.0};
};

constexpr Complex kI{0.0, 1.0};

// Adds the amplitude of `prim` (conjugated if `conjugate`) on the variable
// block starting at `offset`. Deltas contribute nothing here; they are
// substituted afterwards.
void add_primitive(FullForm& form, const Primitive& prim, int offset, int d, bool conjugate) {
  const double sign = conjugate ? -1.0 : 1.0;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PlaneWave>) {
          for (int i = 0; i < d; ++i) form.b[offset + i] += sign * kI * p.momentum[i];
        } else if constexpr (std::is_same_v<T, Packet>) {
          const double inv = 1.0 / (2.0 * p.width * p.width);
          for (int i = 0; i < d; ++i) {
            form.a(offset + i, offset + i) += inv;
            form.b[offset + i] += p.center[i] * inv + sign * kI * p.momentum[i];
          }
          form.c -= 0.5 * inv * p.center.squaredNorm();
        }
      },
      prim);
}

void add_kernel(FullForm& form, const KernelSpec& kernel, int d) {
  double diag = 0.0;
  double off = 0.0;
  if (kernel.is_translation()) {
    const double s = kernel.as_translation().sigma;
    diag = 1.0 / (s * s);
    off = -diag;
  } else {
    const auto& k = kernel.as_confined();
    diag = 2.0 * (k.alpha + k.beta);
    off = -2.0 * k.beta;
  }
  for (int i = 0; i < d; ++i) {
    form.a(i, i) += diag;
    form.a(d + i, d + i) += diag;
    form.a(i, d + i) += off;
    form.a(d + i, i) += off;
  }
}

const VecD& delta_center(const Primitive& prim) { return std::get<Delta>(prim).center; }

QuadForm build_form(const Primitive& f, const Primitive& g, const KernelSpec& kernel) {
  const int d = dimension(f);
  if (dimension(g) != d) throw DomainError("compile_pair: primitive dimensions differ");
  FullForm full{QuadForm::Matrix::Zero(2 * d, 2 * d), QuadForm::Vector::Zero(2 * d), {}};
  add_kernel(full, kernel, d);
  add_primitive(full, f, 0, d, /*conjugate=*/false);
  add_primitive(full, g, d, d, /*conjugate=*/true);

  // Partition variables into fixed (delta-substituted) and free.
  std::array<int, QuadForm::kMaxN> free_idx{};
  std::array<int, QuadForm::kMaxN> fixed_idx{};
  std::array<double, QuadForm::kMaxN> fixed_val{};
  int n_free = 0;
  int n_fixed = 0;
  for (int block = 0; block < 2; ++block) {
    const Primitive& prim = block == 0 ? f : g;
    for (int i = 0; i < d; ++i) {
      const int idx = block * d + i;
      if (is_delta(prim)) {
        fixed_idx[n_fixed] = idx;
        fixed_val[n_fixed] = delta_center(prim)[i];
        ++n_fixed;
      } else {
        free_idx[n_free++] = idx;
      }
    }
  }

  QuadForm q;
  q.a.resize(n_free, n_free);
  q.b.resize(n_free);
  q.c = full.c;
  for (int r = 0; r < n_free; ++r) {
    for (int s = 0; s < n_free; ++s) q.a(r, s) = full.a(free_idx[r], free_idx[s]);
    Complex br = full.b[free_idx[r]];
    for (int k = 0; k < n_fixed; ++k) br -= full.a(free_idx[r], fixed_idx[k]) * fixed_val[k];
    q.b[r] = br;
  }
  for (int k = 0; k < n_fixed; ++k) {
    q.c += full.b[fixed_idx[k]] * fixed_val[k];
    for (int l = 0; l < n_fixed; ++l) q.c -= 0.5 * full.a(fixed_idx[k], fixed_idx[l]) * fixed_val[k] * fixed_val[l];
  }

  if (n_free > 0 && !real_part_spd(q.a)) {
    throw DivergenceError("inner product of " + describe(f) + " and " + describe(g) + " diverges under kernel " +
                          kernel.to_string());
  }
  return q;
}

}  // namespace

QuadForm compile_pair(const Primitive& f, const Primitive& g, const KernelSpec& kernel) {
  return build_form(f, g, kernel);
}

Complex primitive_inner(const Primitive& f, const Primitive& g, const KernelSpec& kernel) {
  const int d = dimension(f);
  if (dimension(g) != d) throw DomainError("inner product: primitive dimensions differ");
  if (d == 1) return gaussian_integral(build_form(f, g, kernel));
  Complex value{1.0, 0.0};
  for (int axis = 0; axis < d; ++axis) {
    try {
      value *= gaussian_integral(build_form(coordinate_slice(f, axis), coordinate_slice(g, axis), kernel));
    } catch (const DivergenceError&) {
      throw DivergenceError("inner product of " + describe(f) + " and " + describe(g) + " diverges under kernel " +
                            kernel.to_string());
    }
  }
  return value;
}

// ---------------------------------------------------------------------------
// Sesquilinear sums

namespace {

template <std::size_t Arity>
Complex factor_product(const ProductTerm<Arity>& lhs, const ProductTerm<Arity>& rhs, const KernelSpec& kernel) {
  Complex v{1.0, 0.0};
  for (std::size_t k = 0; k < Arity; ++k) v *= primitive_inner(lhs.factors[k], rhs.factors[k], kernel);
  return v;
}

template <std::size_t Arity>
void check_dims(std::span<const ProductTerm<Arity>> lhs, std::span<const ProductTerm<Arity>> rhs) {
  if (lhs.empty() || rhs.empty()) return;
  if (dimension(lhs.front().factors[0]) != dimension(rhs.front().factors[0])) {
    throw DomainError("inner product: state dimensions differ");
  }
}

// Relative size of the imaginary part tolerated on a diagonal Gram entry.
constexpr double kImagResidue = 1e-10;

// Real sum_ij c_i conj(c_j) G_ij over the upper triangle, exactly real.
template <std::size_t Arity>
double hermitian_sum(std::span<const ProductTerm<Arity>> terms, const KernelSpec& kernel, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(terms.size());
  std::vector<double> cells(static_cast<std::size_t>(n * (n + 1) / 2));
  // Errors cannot propagate out of an OpenMP region; record and rethrow.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  for_each_index(n, exec, [&](std::ptrdiff_t i) {
    try {
      const std::ptrdiff_t row = i * n - i * (i - 1) / 2;
      const auto& ti = terms[static_cast<std::size_t>(i)];
      const Complex gii = factor_product(ti, ti, kernel);
      if (std::abs(gii.imag()) > kImagResidue * std::max(1.0, std::abs(gii.real()))) {
        throw NumericalFailure("diagonal Gram entry has a non-negligible imaginary part");
      }
      cells[static_cast<std::size_t>(row)] = std::norm(ti.coeff) * gii.real();
      for (std::ptrdiff_t j = i + 1; j < n; ++j) {
        const auto& tj = terms[static_cast<std::size_t>(j)];
        const Complex g = factor_product(ti, tj, kernel);
        cells[static_cast<std::size_t>(row + (j - i))] = 2.0 * (ti.coeff * std::conj(tj.coeff) * g).real();
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return pairwise_sum(std::span<const double>(cells));
}

template <std::size_t Arity>
Complex cross_sum(std::span<const ProductTerm<Arity>> lhs, std::span<const ProductTerm<Arity>> rhs,
                  const KernelSpec& kernel, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(lhs.size());
  const auto m = static_cast<std::ptrdiff_t>(rhs.size());
  std::vector<Complex> cells(static_cast<std::size_t>(n * m));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  for_each_index(n, exec, [&](std::ptrdiff_t i) {
    try {
      const auto& ti = lhs[static_cast<std::size_t>(i)];
      for (std::ptrdiff_t j = 0; j < m; ++j) {
        const auto& tj = rhs[static_cast<std::size_t>(j)];
        cells[static_cast<std::size_t>(i * m + j)] = ti.coeff * std::conj(tj.coeff) * factor_product(ti, tj, kernel);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return pairwise_sum(std::span<const Complex>(cells));
}

}  // namespace

template <std::size_t Arity>
Complex inner(const ProductExpr<Arity>& lhs, const ProductExpr<Arity>& rhs, const KernelSpec& kernel, Exec exec) {
  using Span = std::span<const ProductTerm<Arity>>;
  check_dims(Span(lhs.terms()), Span(rhs.terms()));
  if (&lhs == &rhs || lhs == rhs) return {hermitian_sum(Span(lhs.terms()), kernel, exec), 0.0};
  return cross_sum(Span(lhs.terms()), Span(rhs.terms()), kernel, exec);
}

template Complex inner<1>(const ProductExpr<1>&, const ProductExpr<1>&, const KernelSpec&, Exec);
template Complex inner<2>(const ProductExpr<2>&, const ProductExpr<2>&, const KernelSpec&, Exec);

Complex inner_product(const StateExpr& phi, const StateExpr& psi, const KernelSpec& kernel, Exec exec) {
  return inner(phi, psi, kernel, exec);
}

Complex pair_inner_product(const PairStateExpr& phi, const PairStateExpr& psi, const KernelSpec& kernel, Exec exec) {
  return inner(phi, psi, kernel, exec);
}

template <std::size_t Arity>
double norm_squared_of_terms(std::span<const ProductTerm<Arity>> terms, const KernelSpec& kernel, Exec exec) {
  if (terms.empty()) return 0.0;
  return std::max(0.0, hermitian_sum(terms, kernel, exec));
}

template double norm_squared_of_terms<1>(std::span<const ProductTerm<1>>, const KernelSpec&, Exec);
template double norm_squared_of_terms<2>(std::span<const ProductTerm<2>>, const KernelSpec&, Exec);

template <std::size_t Arity>
double norm_squared(const ProductExpr<Arity>& expr, const KernelSpec& kernel, Exec exec) {
  return norm_squared_of_terms(std::span<const ProductTerm<Arity>>(expr.terms()), kernel, exec);
}

template double norm_squared<1>(const ProductExpr<1>&, const KernelSpec&, Exec);
template double norm_squared<2>(const ProductExpr<2>&, const KernelSpec&, Exec);

template <std::size_t Arity>
std::vector<ProductTerm<Arity>> merge_like_terms(std::span<const ProductTerm<Arity>> terms) {
  std::vector<ProductTerm<Arity>> out;
  out.reserve(terms.size());
  for (const auto& t : terms) {
    bool merged = false;
    for (auto& o : out) {
      if (o.factors == t.factors) {
        o.coeff += t.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(t);
  }
  return out;
}

template std::vector<ProductTerm<1>> merge_like_terms<1>(std::span<const ProductTerm<1>>);
template std::vector<ProductTerm<2>> merge_like_terms<2>(std::span<const ProductTerm<2>>);

// ---------------------------------------------------------------------------
// L2 and Gram

Complex l2_inner_product(const StateExpr& phi, const StateExpr& psi) {
  if (phi.dim() != psi.dim()) throw DomainError("l2 inner product: state dimensions differ");
  const auto require_packet = [](const Primitive& p) -> const Packet& {
    if (!is_packet(p)) throw DomainError("l2 inner product is only defined for packets, got " + describe(p));
    return std::get<Packet>(p);
  };
  std::vector<Complex> cells;
  cells.reserve(phi.size() * psi.size());
  for (const auto& s : phi.terms()) {
    const Packet& f = require_packet(s.factors[0]);
    for (const auto& t : psi.terms()) {
      const Packet& g = require_packet(t.factors[0]);
      const double inv_f = 1.0 / (2.0 * f.width * f.width);
      const double inv_g = 1.0 / (2.0 * g.width * g.width);
      Complex value{1.0, 0.0};
      for (int i = 0; i < phi.dim(); ++i) {
        QuadForm q;
        q.a.resize(1, 1);
        q.b.resize(1);
        q.a(0, 0) = inv_f + inv_g;
        q.b[0] = f.center[i] * inv_f + g.center[i] * inv_g + kI * (f.momentum[i] - g.momentum[i]);
        q.c = -0.5 * (inv_f * f.center[i] * f.center[i] + inv_g * g.center[i] * g.center[i]);
        value *= gaussian_integral(q);
      }
      cells.push_back(s.coeff * std::conj(t.coeff) * value);
    }
  }
  return pairwise_sum(std::span<const Complex>(cells));
}

Eigen::MatrixXcd primitive_gram(std::span<const Primitive> prims, const KernelSpec& kernel, Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(prims.size());
  Eigen::MatrixXcd gram(n, n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  for_each_index(n, exec, [&](std::ptrdiff_t i) {
    try {
      for (std::ptrdiff_t j = 0; j < n; ++j) {
        gram(i, j) = primitive_inner(prims[static_cast<std::size_t>(i)], prims[static_cast<std::size_t>(j)], kernel);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return gram;
}

}  // namespace stategeo
