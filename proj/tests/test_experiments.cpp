#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stategeo/experiments.hpp"

using namespace stategeo;

TEST_CASE("slit configuration validation") {
  SlitConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.slit_positions = {1.0, 1.0};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.packet_width = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.coefficients = {Complex(0.0), Complex(0.0)};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.detector_count = 1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.detector_min = 5.0;
  cfg.detector_max = -5.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("two open slits give fringes at the small-angle spacing") {
  const SlitConfig cfg;
  const DetectorCurve c = detector_intensity(cfg);
  CHECK(c.x.size() == 1601);
  CHECK(c.intensity.size() == c.x.size());
  CHECK(c.visibility > 0.9);
  CHECK(c.expected_spacing == doctest::Approx(50.0));
  CHECK(std::abs(c.fringe_spacing - c.expected_spacing) < 0.1 * c.expected_spacing);
  for (double v : c.intensity) CHECK(v >= 0.0);
}

TEST_CASE("which-path information removes the fringes") {
  SlitConfig cfg;
  cfg.which_path = true;
  const DetectorCurve c = detector_intensity(cfg);
  CHECK(c.visibility < 0.01);
  CHECK(std::isnan(c.fringe_spacing));
}

TEST_CASE("fringe spacing scales inversely with slit separation") {
  SlitConfig cfg;
  cfg.slit_positions = {-5.0, 5.0};
  cfg.detector_count = 3201;
  const DetectorCurve c = detector_intensity(cfg);
  CHECK(c.expected_spacing == doctest::Approx(100.0));
  CHECK(std::abs(c.fringe_spacing - 100.0) < 10.0);
}

TEST_CASE("the double-slit trajectory is continuous and ends in a quarter-turn collapse") {
  const SlitConfig cfg;
  const Trajectory traj = build_double_slit_trajectory(cfg);
  REQUIRE(traj.segments.size() == 4);
  CHECK(traj.segments[0].kind == SegmentKind::Propagation);
  CHECK(traj.segments[1].kind == SegmentKind::RefractionSplit);
  CHECK(traj.segments[2].kind == SegmentKind::Propagation);
  CHECK(traj.segments[3].kind == SegmentKind::Collapse);
  CHECK(traj.max_junction_angle < 1e-9);

  const Segment& collapse = traj.segments[3];
  CHECK(collapse.arc_length == doctest::Approx(std::numbers::pi / 4).epsilon(1e-6));
  REQUIRE(collapse.collapse_time_s.has_value());
  CHECK(*collapse.collapse_time_s < 1e-43);
  CHECK(*collapse.collapse_time_s == doctest::Approx(4.19e-44).epsilon(1e-2));

  double last_arc = 0.0;
  for (const auto& seg : traj.segments) {
    CHECK(seg.samples.size() == static_cast<std::size_t>(cfg.samples_per_segment));
    for (const auto& s : seg.samples) {
      CHECK(s.arc >= last_arc - 1e-12);
      last_arc = s.arc;
      CHECK(std::abs(norm_squared(s.state.expr, cfg.kernel) - 1.0) < 1e-9);
    }
  }
  // The refraction segment stays no farther from the position manifold than the collapse does.
  CHECK(traj.segments[1].max_residual_angle <= collapse.max_residual_angle + 1e-9);
}

TEST_CASE("which-path trajectories collapse at the slit") {
  SlitConfig cfg;
  cfg.which_path = true;
  const Trajectory traj = build_double_slit_trajectory(cfg);
  REQUIRE(traj.segments.size() >= 3);
  bool has_collapse = false;
  for (const auto& seg : traj.segments) has_collapse = has_collapse || seg.kind == SegmentKind::Collapse;
  CHECK(has_collapse);
  CHECK(traj.max_junction_angle < 1e-9);
}

TEST_CASE("correlated pair configuration validation") {
  EPRConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.measured_position = 0.0;
  cfg.measured_momentum = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.discretization_n = 1;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = {};
  cfg.envelope_width = -1.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("linspace") {
  const auto g = linspace(-1.0, 1.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == doctest::Approx(0.0));
  CHECK(linspace(3.0, 4.0, 1) == std::vector<double>{3.0});
  CHECK_THROWS_AS((void)linspace(0.0, 1.0, 0), DomainError);
}

TEST_CASE("position measurements find the partner at x0 + a") {
  const EPRConfig cfg;
  const auto k = KernelSpec::translation(1.0);
  const Sphere2 phi = normalize(build_epr_state(cfg, k), k);
  const double w = cfg.envelope_width;
  const double spacing = 8.0 * w / (cfg.discretization_n - 1);
  for (double a : {-w, 0.0, w}) {
    const auto grid = linspace(cfg.x0 + a - 3.0, cfg.x0 + a + 3.0, 601);
    const double ridge = position_ridge(phi, a, grid);
    CHECK(std::abs(ridge - (cfg.x0 + a)) <= spacing);
  }
  const auto path = position_collapse(phi, 0.0, cfg);
  CHECK(path.theta > 0.0);
  CHECK(collapse_time(path) < 1e-43);
}

TEST_CASE("momentum measurements find the partner at -q under a confined kernel") {
  const EPRConfig cfg;
  const auto k = KernelSpec::confined(cfg.confined_alpha, 1.0);
  const Sphere2 phi = normalize(build_epr_state(cfg, k), k);
  const auto q2 = linspace(-3.0, 3.0, 25);
  for (double q1 : {-1.0, 0.0, 1.0}) {
    CHECK(std::abs(momentum_ridge(phi, q1, q2) + q1) <= 0.25 + 1e-12);
  }
  const auto path = momentum_collapse(phi, 1.0, cfg);
  CHECK(path.theta > 0.0);
  CHECK(path.theta < std::numbers::pi);

  const auto tphi = normalize(build_epr_state(cfg), KernelSpec::translation(1.0));
  CHECK_THROWS_AS((void)momentum_collapse(tphi, 1.0, cfg), DivergenceError);
}

TEST_CASE("the discretized pair state converges") {
  EPRConfig coarse;
  coarse.discretization_n = 64;
  const EPRConfig fine;
  const auto k = KernelSpec::translation(1.0);
  const Sphere2 a = normalize(build_epr_state(coarse, k), k);
  const Sphere2 b = normalize(build_epr_state(fine, k), k);
  CHECK(sphere_angle(a, b) < 1e-3);
}
