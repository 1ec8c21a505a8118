#include "stategeo/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace stategeo {

namespace {

// Below this Re-overlap the angle comes from arccos; above it from the chord,
// where arccos loses half the significant digits.
constexpr double kChordSwitch = 0.9;

template <std::size_t Arity>
void require_same_kernel(const SphereState<Arity>& a, const SphereState<Arity>& b) {
  if (!(a.kernel == b.kernel)) {
    throw DomainError("states belong to different kernels: " + a.kernel.to_string() + " vs " + b.kernel.to_string());
  }
}

}  // namespace

template <std::size_t Arity>
SphereState<Arity> normalize(const ProductExpr<Arity>& expr, const KernelSpec& kernel, Exec exec) {
  const double n2 = norm_squared(expr, kernel, exec);
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw DomainError("cannot normalize a state of zero or non-finite norm");
  const double n = std::sqrt(n2);
  return {expr.scaled(1.0 / n), kernel, n};
}

template <std::size_t Arity>
Complex overlap(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, Exec exec) {
  require_same_kernel(psi0, psi1);
  return inner(psi0.expr, psi1.expr, psi0.kernel, exec);
}

template <std::size_t Arity>
double chord_distance(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, Exec exec) {
  require_same_kernel(psi0, psi1);
  std::vector<ProductTerm<Arity>> diff = psi0.expr.terms();
  for (auto t : psi1.expr.terms()) {
    t.coeff = -t.coeff;
    diff.push_back(std::move(t));
  }
  const auto merged = merge_like_terms(std::span<const ProductTerm<Arity>>(diff));
  return std::sqrt(norm_squared_of_terms(std::span<const ProductTerm<Arity>>(merged), psi0.kernel, exec));
}

template <std::size_t Arity>
double chord_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, Exec exec) {
  const double c = chord_distance(psi0, psi1, exec);
  return 2.0 * std::asin(std::clamp(0.5 * c, 0.0, 1.0));
}

template <std::size_t Arity>
double sphere_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, Exec exec) {
  const double re = std::clamp(overlap(psi0, psi1, exec).real(), -1.0, 1.0);
  if (re > kChordSwitch) return chord_angle(psi0, psi1, exec);
  return std::acos(re);
}

template <std::size_t Arity>
double fs_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, Exec exec) {
  const Complex ov = overlap(psi0, psi1, exec);
  const double m = std::clamp(std::abs(ov), 0.0, 1.0);
  if (m > kChordSwitch) {
    // Rotate psi1 onto the phase of the overlap and measure the chord.
    SphereState<Arity> aligned{psi1.expr.scaled(std::polar(1.0, std::arg(ov))), psi1.kernel, psi1.norm};
    return chord_angle(psi0, aligned, exec);
  }
  return std::acos(m);
}

template <std::size_t Arity>
GeodesicPath<Arity> make_geodesic(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1, bool align_phase,
                                  Exec exec) {
  require_same_kernel(psi0, psi1);
  double gamma = 0.0;
  if (align_phase) {
    const Complex ov = overlap(psi0, psi1, exec);
    if (std::abs(ov) > 0.0) gamma = std::arg(ov);
  }
  SphereState<Arity> end{gamma == 0.0 ? psi1.expr : psi1.expr.scaled(std::polar(1.0, gamma)), psi1.kernel, psi1.norm};
  const double theta = sphere_angle(psi0, end, exec);
  return {psi0, std::move(end), theta, gamma};
}

template <std::size_t Arity>
SphereState<Arity> geodesic_at(const GeodesicPath<Arity>& path, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("geodesic parameter t must lie in [0, 1]");
  const double theta = path.theta;
  if (theta == 0.0) return path.start;
  if (1.0 + std::cos(theta) < 1e-12) {
    throw NonUniqueGeodesic("endpoints are antipodal; the great circle through them is not unique");
  }
  if (t == 0.0) return path.start;
  if (t == 1.0) return path.end_aligned;
  const double s = std::sin(theta);
  const double a = std::sin((1.0 - t) * theta) / s;
  const double b = std::sin(t * theta) / s;
  return {ProductExpr<Arity>::combine(a, path.start.expr, b, path.end_aligned.expr), path.start.kernel, 1.0};
}

double collapse_time(double angle, const UnitSystem& units, double speed_m_per_s) {
  if (!(speed_m_per_s > 0.0)) throw DomainError("collapse speed must be positive");
  if (!(angle >= 0.0) || !std::isfinite(angle)) throw DomainError("collapse angle must be finite and nonnegative");
  if (!(units.planck_length_m > 0.0) || !(units.light_speed_m_per_s > 0.0)) {
    throw DomainError("unit system constants must be positive");
  }
  return angle * units.planck_length_m / speed_m_per_s;
}

double collapse_time(double angle, const UnitSystem& units) {
  return collapse_time(angle, units, units.light_speed_m_per_s);
}

double classical_path_length(const VecD& a, const VecD& b) {
  if (a.size() != b.size()) throw DomainError("points have different dimensions");
  return (a - b).norm();
}

#define STATEGEO_SPHERE_INSTANTIATE(N)                                                                       \
  template SphereState<N> normalize<N>(const ProductExpr<N>&, const KernelSpec&, Exec);                      \
  template Complex overlap<N>(const SphereState<N>&, const SphereState<N>&, Exec);                           \
  template double sphere_angle<N>(const SphereState<N>&, const SphereState<N>&, Exec);                       \
  template double fs_angle<N>(const SphereState<N>&, const SphereState<N>&, Exec);                           \
  template double chord_distance<N>(const SphereState<N>&, const SphereState<N>&, Exec);                     \
  template double chord_angle<N>(const SphereState<N>&, const SphereState<N>&, Exec);                        \
  template GeodesicPath<N> make_geodesic<N>(const SphereState<N>&, const SphereState<N>&, bool, Exec);       \
  template SphereState<N> geodesic_at<N>(const GeodesicPath<N>&, double);

STATEGEO_SPHERE_INSTANTIATE(1)
STATEGEO_SPHERE_INSTANTIATE(2)

#undef STATEGEO_SPHERE_INSTANTIATE

}  // namespace stategeo
