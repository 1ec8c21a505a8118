#pragma once

// Points of the unit sphere of a kernel Hilbert space, angles between them,
// great-circle paths, and conversion of arc length to collapse time.

#include "stategeo/gaussian_algebra.hpp"

namespace stategeo {

/// A state scaled to unit norm. `expr` already carries the 1/norm factor;
/// `norm` is the norm of the expression that was passed to normalize().
template <std::size_t Arity>
struct SphereState {
  ProductExpr<Arity> expr;
  KernelSpec kernel;
  double norm = 1.0;

  [[nodiscard]] ProductExpr<Arity> raw() const { return expr.scaled(norm); }
};

using Sphere1 = SphereState<1>;
using Sphere2 = SphereState<2>;

/// Throws DomainError when the norm is zero or not finite.
template <std::size_t Arity>
[[nodiscard]] SphereState<Arity> normalize(const ProductExpr<Arity>& expr, const KernelSpec& kernel,
                                           Exec exec = Exec::Parallel);

/// <psi0, psi1>_K of two unit states. Throws DomainError on kernel mismatch.
template <std::size_t Arity>
[[nodiscard]] Complex overlap(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                              Exec exec = Exec::Parallel);

/// arccos(Re <psi0, psi1>) in [0, pi]: the great-circle distance on the real sphere.
template <std::size_t Arity>
[[nodiscard]] double sphere_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                                  Exec exec = Exec::Parallel);

/// arccos |<psi0, psi1>| in [0, pi/2]: insensitive to a global phase.
template <std::size_t Arity>
[[nodiscard]] double fs_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                              Exec exec = Exec::Parallel);

/// ||psi0 - psi1||_K computed from merged coefficients, so it stays accurate
/// for nearby states where 2 - 2 Re<psi0, psi1> would cancel.
template <std::size_t Arity>
[[nodiscard]] double chord_distance(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                                    Exec exec = Exec::Parallel);

/// 2 asin(chord / 2): the same angle as sphere_angle, accurate near zero.
template <std::size_t Arity>
[[nodiscard]] double chord_angle(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                                 Exec exec = Exec::Parallel);

template <std::size_t Arity>
struct GeodesicPath {
  SphereState<Arity> start;
  SphereState<Arity> end_aligned;
  double theta = 0.0;
  /// Phase gamma applied to the end state, end_aligned = e^{i gamma} end.
  double alignment_phase = 0.0;
};

/// Great circle from psi0 to psi1. Without phase alignment theta is
/// sphere_angle and the path lies on the real sphere. With alignment the end
/// state is rotated by e^{i arg <psi0, psi1>} so the overlap becomes
/// |<psi0, psi1>| and theta is fs_angle.
template <std::size_t Arity>
[[nodiscard]] GeodesicPath<Arity> make_geodesic(const SphereState<Arity>& psi0, const SphereState<Arity>& psi1,
                                                bool align_phase = false, Exec exec = Exec::Parallel);

/// [sin((1-t) theta) psi0 + sin(t theta) psi1] / sin(theta).
/// theta = 0 returns psi0 for all t. Throws DomainError for t outside [0, 1]
/// and NonUniqueGeodesic for antipodal endpoints.
template <std::size_t Arity>
[[nodiscard]] SphereState<Arity> geodesic_at(const GeodesicPath<Arity>& path, double t);

/// Arc length on the unit sphere, in Planck lengths.
template <std::size_t Arity>
[[nodiscard]] double arc_length(const GeodesicPath<Arity>& path) {
  return path.theta;
}

struct UnitSystem {
  double planck_length_m = 1.6e-35;
  double light_speed_m_per_s = 2.99792458e8;

  [[nodiscard]] double planck_time_s() const { return planck_length_m / light_speed_m_per_s; }
};

/// Seconds needed to traverse `angle` Planck lengths at the given speed.
/// Throws DomainError for a nonpositive speed.
[[nodiscard]] double collapse_time(double angle, const UnitSystem& units, double speed_m_per_s);
[[nodiscard]] double collapse_time(double angle, const UnitSystem& units = {});

template <std::size_t Arity>
[[nodiscard]] double collapse_time(const GeodesicPath<Arity>& path, const UnitSystem& units = {}) {
  return collapse_time(path.theta, units);
}

/// Length of the straight segment from a to b measured along the position
/// manifold; the induced metric there is Euclidean, so this is |a - b|.
[[nodiscard]] double classical_path_length(const VecD& a, const VecD& b);

}  // namespace stategeo
