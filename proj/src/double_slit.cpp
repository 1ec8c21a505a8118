#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "stategeo/experiments.hpp"

namespace stategeo {

void SlitConfig::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(slit_positions[0]) || !finite(slit_positions[1]) || slit_positions[0] == slit_positions[1]) {
    throw DomainError("slit positions must be finite and distinct");
  }
  for (const auto& c : coefficients) {
    if (!finite(c.real()) || !finite(c.imag())) throw DomainError("slit coefficients must be finite");
  }
  if (coefficients[0] == Complex{} && coefficients[1] == Complex{}) {
    throw DomainError("at least one slit coefficient must be nonzero");
  }
  if (!(packet_width > 0.0) || !finite(packet_width)) throw DomainError("packet_width must be positive");
  if (!(wavenumber > 0.0) || !finite(wavenumber)) throw DomainError("wavenumber must be positive");
  if (!(screen_to_detector > 0.0) || !finite(screen_to_detector)) {
    throw DomainError("screen_to_detector must be positive");
  }
  if (!(detector_min < detector_max) || !finite(detector_min) || !finite(detector_max)) {
    throw DomainError("detector grid needs min < max");
  }
  if (detector_count < 2) throw DomainError("detector grid needs at least 2 points");
  if (detected_point && !finite(*detected_point)) throw DomainError("detected_point must be finite");
  if (!(propagation_distance > 0.0) || !finite(propagation_distance)) {
    throw DomainError("propagation_distance must be positive");
  }
  if (samples_per_segment < 2) throw DomainError("samples_per_segment must be at least 2");
}

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::Propagation: return "propagation";
    case SegmentKind::RefractionSplit: return "refraction_split";
    case SegmentKind::Collapse: return "collapse";
  }
  return "?";
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw DomainError("linspace needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return out;
}

namespace {

constexpr Complex kI{0.0, 1.0};

// Width of a free Gaussian packet of initial width w0 after travelling a
// distance z at wavenumber k.
double spread(double w0, double k, double z) {
  const double zr = 2.0 * k * w0 * w0;
  return w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
}

Complex huygens_amplitude(const SlitConfig& cfg, double x, const std::array<bool, 2>& open) {
  const double L = cfg.screen_to_detector;
  const double envelope = spread(cfg.packet_width, cfg.wavenumber, L);
  Complex a{};
  for (int j = 0; j < 2; ++j) {
    if (!open[static_cast<std::size_t>(j)]) continue;
    const double u = x - cfg.slit_positions[static_cast<std::size_t>(j)];
    const double r = std::hypot(L, u);
    a += cfg.coefficients[static_cast<std::size_t>(j)] * std::exp(kI * (cfg.wavenumber * r)) *
         std::exp(-u * u / (4.0 * envelope * envelope));
  }
  return a;
}

double resolve_detected_point(const SlitConfig& cfg) {
  if (cfg.detected_point) return *cfg.detected_point;
  const double i1 = std::norm(huygens_amplitude(cfg, cfg.slit_positions[0], {true, true}));
  const double i2 = std::norm(huygens_amplitude(cfg, cfg.slit_positions[1], {true, true}));
  return i2 > i1 * (1.0 + 1e-12) ? cfg.slit_positions[1] : cfg.slit_positions[0];
}

int nearest_slit(const SlitConfig& cfg, double x) {
  return std::abs(x - cfg.slit_positions[1]) < std::abs(x - cfg.slit_positions[0]) ? 1 : 0;
}

Primitive packet_at(double x, double z, double w) { return make_packet(make_vec({x, z}), w); }

double width_behind(const SlitConfig& cfg, double z) {
  return cfg.spread_width ? spread(cfg.packet_width, cfg.wavenumber, z) : cfg.packet_width;
}

// c1 G(x1, z) + c2 G(x2, z), skipping closed slits.
StateExpr superposition(const SlitConfig& cfg, double z, Complex phase) {
  std::vector<Term1> terms;
  for (int j = 0; j < 2; ++j) {
    const Complex c = cfg.coefficients[static_cast<std::size_t>(j)];
    if (c == Complex{}) continue;
    terms.push_back({phase * c, {packet_at(cfg.slit_positions[static_cast<std::size_t>(j)], z, width_behind(cfg, z))}});
  }
  return StateExpr(std::move(terms));
}

Segment sampled(SegmentKind kind, const SlitConfig& cfg, const std::function<Sphere1(double)>& state_at) {
  Segment seg;
  seg.kind = kind;
  for (double t : linspace(0.0, 1.0, cfg.samples_per_segment)) seg.samples.push_back({t, 0.0, state_at(t)});
  return seg;
}

Segment collapse_segment(const SlitConfig& cfg, const Sphere1& from, const Sphere1& to) {
  const auto path = make_geodesic(from, to);
  Segment seg = sampled(SegmentKind::Collapse, cfg, [&](double t) { return geodesic_at(path, t); });
  seg.arc_length = arc_length(path);
  seg.collapse_time_s = collapse_time(path);
  return seg;
}

}  // namespace

Trajectory build_double_slit_trajectory(const SlitConfig& cfg) {
  cfg.validate();
  const KernelSpec& kernel = cfg.kernel;
  const double D = cfg.propagation_distance;
  const double x1 = cfg.slit_positions[0];
  const double x2 = cfg.slit_positions[1];
  // The incoming packet is aimed at the slit with the larger amplitude
  // (the first on a tie), so a single open slit gives a split of angle zero
  // and the split never moves farther from M3 than the superposition it
  // produces.
  const double source_x = std::abs(cfg.coefficients[1]) > std::abs(cfg.coefficients[0]) ? x2 : x1;

  Trajectory traj;
  traj.detected_point = resolve_detected_point(cfg);

  const auto incoming = [&](double z) { return normalize(single(packet_at(source_x, z, cfg.packet_width)), kernel); };
  const Sphere1 at_screen = incoming(0.0);
  // Global phase of the split state chosen so its overlap with the incoming
  // packet is real and nonnegative; the interpolation then never passes through zero.
  const Sphere1 raw_split = normalize(superposition(cfg, 0.0, 1.0), kernel);
  const Complex ov = overlap(raw_split, at_screen);
  const Complex phase = std::abs(ov) > 0.0 ? std::polar(1.0, -std::arg(ov)) : Complex(1.0, 0.0);

  traj.segments.push_back(sampled(SegmentKind::Propagation, cfg, [&](double t) { return incoming(-D + t * D); }));

  const Sphere1 split = normalize(superposition(cfg, 0.0, phase), kernel);
  traj.segments.push_back(sampled(SegmentKind::RefractionSplit, cfg, [&](double t) {
    return normalize(StateExpr::combine(1.0 - t, at_screen.expr, t, split.expr), kernel);
  }));

  if (cfg.which_path) {
    const double xj = cfg.slit_positions[static_cast<std::size_t>(nearest_slit(cfg, traj.detected_point))];
    const Sphere1 measured = normalize(single(packet_at(xj, 0.0, cfg.packet_width)), kernel);
    traj.segments.push_back(collapse_segment(cfg, split, measured));
    traj.segments.push_back(sampled(SegmentKind::Propagation, cfg, [&](double t) {
      return normalize(single(packet_at(xj, t * D, width_behind(cfg, t * D))), kernel);
    }));
  } else {
    traj.segments.push_back(sampled(SegmentKind::Propagation, cfg, [&](double t) {
      return normalize(superposition(cfg, t * D, phase), kernel);
    }));
    const Sphere1 target = normalize(single(packet_at(traj.detected_point, D, width_behind(cfg, D))), kernel);
    traj.segments.push_back(collapse_segment(cfg, traj.segments.back().samples.back().state, target));
  }

  // Arc-length bookkeeping, junction continuity and distance from M3.
  const double lo = std::min({x1, x2, traj.detected_point}) - 3.0;
  const double hi = std::max({x1, x2, traj.detected_point}) + 3.0;
  SearchBox box{Eigen::Vector2d(lo, -D - 3.0), Eigen::Vector2d(hi, D + 3.0)};
  ProjectionOptions proj;
  proj.coarse_points = 61;
  double arc = 0.0;
  for (std::size_t s = 0; s < traj.segments.size(); ++s) {
    auto& seg = traj.segments[s];
    if (s > 0) {
      traj.max_junction_angle = std::max(
          traj.max_junction_angle, chord_angle(traj.segments[s - 1].samples.back().state, seg.samples.front().state));
    }
    const double start = arc;
    double local = 0.0;
    for (std::size_t k = 0; k < seg.samples.size(); ++k) {
      auto& sample = seg.samples[k];
      if (seg.kind == SegmentKind::Collapse) {
        local = sample.t * seg.arc_length;
      } else if (k > 0) {
        local += chord_angle(seg.samples[k - 1].state, sample.state);
      }
      sample.arc = start + local;
      const auto nearest = nearest_classical_point(sample.state, ManifoldId::M3, box, proj);
      seg.max_residual_angle = std::max(seg.max_residual_angle, nearest.residual_angle);
    }
    if (seg.kind != SegmentKind::Collapse) seg.arc_length = local;
    arc = start + seg.arc_length;
  }
  return traj;
}

DetectorCurve detector_intensity(const SlitConfig& cfg) {
  cfg.validate();
  DetectorCurve out;
  out.detected_point = resolve_detected_point(cfg);
  std::array<bool, 2> open{cfg.coefficients[0] != Complex{}, cfg.coefficients[1] != Complex{}};
  if (cfg.which_path) {
    const int j = nearest_slit(cfg, out.detected_point);
    open = {j == 0, j == 1};
  }

  out.x = linspace(cfg.detector_min, cfg.detector_max, cfg.detector_count);
  out.intensity.resize(out.x.size());
  for_each_index(static_cast<std::ptrdiff_t>(out.x.size()), Exec::Parallel, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out.intensity[k] = std::norm(huygens_amplitude(cfg, out.x[k], open));
  });

  const double delta = std::abs(cfg.slit_positions[1] - cfg.slit_positions[0]);
  const double mid = 0.5 * (cfg.slit_positions[0] + cfg.slit_positions[1]);
  out.expected_spacing = 2.0 * std::numbers::pi * cfg.screen_to_detector / (cfg.wavenumber * delta);
  const double period = out.expected_spacing;

  double imax = 0.0;
  double imin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    if (std::abs(out.x[i] - mid) > period) continue;
    imax = std::max(imax, out.intensity[i]);
    imin = std::min(imin, out.intensity[i]);
  }
  if (imin == std::numeric_limits<double>::infinity()) {
    imax = *std::max_element(out.intensity.begin(), out.intensity.end());
    imin = *std::min_element(out.intensity.begin(), out.intensity.end());
  }
  out.visibility = imax + imin > 0.0 ? (imax - imin) / (imax + imin) : 0.0;

  std::vector<double> peaks;
  const double h = out.x.size() > 1 ? out.x[1] - out.x[0] : 0.0;
  for (std::size_t i = 1; i + 1 < out.x.size(); ++i) {
    if (std::abs(out.x[i] - mid) > 3.0 * period) continue;
    const double l = out.intensity[i - 1];
    const double c = out.intensity[i];
    const double r = out.intensity[i + 1];
    if (!(c > l && c >= r)) continue;
    const double curv = l - 2.0 * c + r;
    peaks.push_back(curv < 0.0 ? out.x[i] + 0.5 * h * (l - r) / curv : out.x[i]);
  }
  out.fringe_spacing = peaks.size() >= 2 ? (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1)
                                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace stategeo
