#pragma once

// The two worked scenarios: an electron passing a double slit, drawn as a
// path of states ending in a geodesic collapse on the detector, and a
// position-correlated particle pair whose measurement collapses it onto the
// pair-position or pair-momentum manifold.

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stategeo/embeddings.hpp"
#include "stategeo/sphere_geometry.hpp"

namespace stategeo {

// ---------------------------------------------------------------------------
// Double slit
// ---------------------------------------------------------------------------

struct SlitConfig {
  std::array<double, 2> slit_positions{-10.0, 10.0};
  std::array<Complex, 2> coefficients{Complex(0.5 * std::numbers::sqrt2, 0.0), Complex(0.5 * std::numbers::sqrt2, 0.0)};
  double packet_width = 0.1;
  double wavenumber = 2.0 * std::numbers::pi;
  double screen_to_detector = 1000.0;
  double detector_min = -200.0;
  double detector_max = 200.0;
  int detector_count = 1601;
  bool which_path = false;
  /// Transverse coordinate of the detection event. Defaults to the slit
  /// position where the two-path intensity is largest (first slit on a tie).
  std::optional<double> detected_point;

  /// Longitudinal distance covered by each propagation segment of the trajectory.
  double propagation_distance = 5.0;
  int samples_per_segment = 17;
  /// Widen packets behind the slits with the free-Gaussian law instead of keeping the width fixed.
  bool spread_width = false;
  KernelSpec kernel = KernelSpec::translation(1.0);

  /// Throws DomainError on an invalid configuration.
  void validate() const;
};

enum class SegmentKind { Propagation, RefractionSplit, Collapse };

[[nodiscard]] std::string to_string(SegmentKind kind);

struct TrajectorySample {
  /// Segment-local parameter in [0, 1].
  double t = 0.0;
  /// Arc length travelled since the start of the trajectory.
  double arc = 0.0;
  Sphere1 state;
};

struct Segment {
  SegmentKind kind = SegmentKind::Propagation;
  std::vector<TrajectorySample> samples;
  /// Exact great-circle angle for collapse segments, sum of sample chord angles otherwise.
  double arc_length = 0.0;
  std::optional<double> collapse_time_s;
  /// Largest angle between a sample and its nearest position delta.
  double max_residual_angle = 0.0;
};

struct Trajectory {
  std::vector<Segment> segments;
  /// Largest angle between the last state of a segment and the first state of the next.
  double max_junction_angle = 0.0;
  double detected_point = 0.0;
};

/// States live in two dimensions: coordinate 0 runs along the slit screen,
/// coordinate 1 along the beam, with the screen at 0 and the detector at
/// propagation_distance. Throws NonUniqueGeodesic for antipodal collapse endpoints.
[[nodiscard]] Trajectory build_double_slit_trajectory(const SlitConfig& cfg);

struct DetectorCurve {
  std::vector<double> x;
  std::vector<double> intensity;
  /// (Imax - Imin) / (Imax + Imin) over one fringe period either side of the slit midpoint.
  double visibility = 0.0;
  /// Mean distance between intensity maxima within three periods of the midpoint; NaN with fewer than two.
  double fringe_spacing = 0.0;
  /// Small-angle prediction 2 pi L / (k |x1 - x2|).
  double expected_spacing = 0.0;
  double detected_point = 0.0;
};

/// Two-path Huygens sum at distance L behind the slits:
/// A(x) = sum_j c_j exp(i k r_j(x)) g(x - x_j), r_j = sqrt(L^2 + (x - x_j)^2),
/// with g the envelope of a packet of the slit width after free spreading
/// over L. With which_path set only the slit nearest the detected point contributes.
[[nodiscard]] DetectorCurve detector_intensity(const SlitConfig& cfg);

// ---------------------------------------------------------------------------
// Correlated pair
// ---------------------------------------------------------------------------

struct EPRConfig {
  double x0 = 1.0;
  double envelope_width = 5.0;
  int discretization_n = 128;
  double confined_alpha = 0.1;
  std::optional<double> measured_position;
  std::optional<double> measured_momentum;

  /// Throws DomainError on invalid values or when both measurements are set.
  void validate() const;
};

/// sum_j w_j exp(-u_j^2 / (2 W^2)) delta_{u_j} (x) delta_{x0 + u_j}, u_j uniform on
/// [-4W, 4W] with trapezoid weights, scaled to unit norm under `kernel`.
[[nodiscard]] PairStateExpr build_epr_state(const EPRConfig& cfg, const KernelSpec& kernel = KernelSpec::translation(1.0));

/// Re <phi, delta_a (x) delta_b normalized> for each b.
[[nodiscard]] std::vector<double> position_profile(const Sphere2& phi, double a, std::span<const double> b_grid);

/// The b in b_grid maximizing the position profile (first on a tie).
[[nodiscard]] double position_ridge(const Sphere2& phi, double a, std::span<const double> b_grid);

struct MomentumCell {
  double q1 = 0.0;
  double q2 = 0.0;
  /// |<phi, e^{i q1 x1} e^{i q2 x2} normalized>|.
  double overlap = 0.0;
};

/// Requires a confined kernel on phi; plane waves diverge otherwise.
[[nodiscard]] std::vector<MomentumCell> momentum_correlation_profile(const Sphere2& phi, std::span<const double> q1_grid,
                                                                     std::span<const double> q2_grid);

/// The q2 in q2_grid maximizing the momentum overlap at q1 (first on a tie).
[[nodiscard]] double momentum_ridge(const Sphere2& phi, double q1, std::span<const double> q2_grid);

/// Geodesic from phi to delta_a (x) delta_{x0 + a}.
[[nodiscard]] GeodesicPath<2> position_collapse(const Sphere2& phi, double a, const EPRConfig& cfg);

/// Geodesic from phi to e^{i q x1} e^{-i q x2}. Under a translation kernel the
/// target has no finite norm and DivergenceError is thrown.
[[nodiscard]] GeodesicPath<2> momentum_collapse(const Sphere2& phi, double q, const EPRConfig& cfg);

/// Uniform grid of `count` points on [lo, hi].
[[nodiscard]] std::vector<double> linspace(double lo, double hi, int count);

}  // namespace stategeo
