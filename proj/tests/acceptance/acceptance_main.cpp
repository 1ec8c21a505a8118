// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "stategeo/embeddings.hpp"
#include "stategeo/experiments.hpp"
#include "stategeo/kernels.hpp"
#include "stategeo/oracle.hpp"
#include "stategeo/sampling.hpp"
#include "stategeo/sphere_geometry.hpp"

using namespace stategeo;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> check;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

Sphere1 delta_state(double b) {
  const auto k = KernelSpec::translation(1.0);
  return normalize(single(make_delta(make_vec({b}))), k);
}

// Shared with criterion 4.
double far_superposition_collapse_time() {
  const auto k = KernelSpec::translation(1.0);
  const StateExpr sup = StateExpr::combine(1.0, single(make_delta(make_vec({-10.0}))), 1.0,
                                           single(make_delta(make_vec({10.0}))));
  return collapse_time(make_geodesic(normalize(sup, k), delta_state(10.0)));
}

Outcome delta_distance_law() {
  Outcome o;
  double worst = 0.0;
  double last = -1.0;
  double first_flat = NAN;
  double far = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double b = 0.5 * i;
    const double theta = sphere_angle(delta_state(0.0), delta_state(b));
    worst = std::max(worst, std::abs(theta - std::acos(std::exp(-0.5 * b * b))));
    if (!(theta > last) && std::isnan(first_flat)) first_flat = b;
    last = theta;
    if (b >= 6.0) far = std::max(far, std::abs(theta - 0.5 * kPi));
  }
  const bool monotone = std::isnan(first_flat);
  o.pass = worst <= 1e-12 && monotone && far <= 1e-6;
  o.detail = fmt("max |theta - arccos(exp(-b^2/2))| = %.2e, |theta - pi/2| for b >= 6 <= %.2e, ", worst, far);
  o.detail += monotone ? std::string("strictly increasing")
                       : fmt("not strictly increasing from b = %.1f (angle equals the double nearest pi/2)", first_flat);
  return o;
}

Outcome isometry() {
  Sampler s(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const MetricReport r = induced_metric(KernelSpec::translation(1.0), s.vec(3, -10.0, 10.0), 1e-3);
    worst = std::max(worst, r.deviation);
  }
  return {worst <= 1e-6, fmt("max |g - I| over 20 points = %.12e", worst)};
}

Outcome collapse_time_bound() {
  const double t = far_superposition_collapse_time();
  const double tp = UnitSystem{}.planck_time_s();
  const double bound = kPi * tp;
  Sampler s(kSeed);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const KernelSpec k = i % 2 == 0 ? KernelSpec::translation(1.0) : KernelSpec::confined(0.1, 1.0);
    const int dim = 1 + s.index(3);
    const Sphere1 a = normalize(random_state(s, dim, k), k);
    const Sphere1 b = normalize(random_state(s, dim, k), k);
    worst = std::max(worst, collapse_time(make_geodesic(a, b)));
  }
  const bool quarter = std::abs(t - 0.25 * kPi * tp) <= 1e-12 * tp;
  return {quarter && t < 1e-43 && worst <= bound,
          fmt("superposition collapse %.4e s (pi/4 t_P = %.4e s), max over 100 random pairs %.4e s <= pi t_P = %.4e s", t,
              0.25 * kPi * tp, worst, bound)};
}

Outcome transfer_speed() {
  const double speed = 1e27 / far_superposition_collapse_time();
  const double decades = std::abs(std::log10(speed) - 70.0);
  return {decades <= 1.0, fmt("1e27 m / collapse time = %.3e m/s (%.2f decades from 1e70)", speed, decades)};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  int checked = 0;
  int drawn = 0;
  for (const auto& k : {KernelSpec::translation(1.0), KernelSpec::confined(0.1, 1.0)}) {
    Sampler s(kSeed);
    const auto sweep = oracle::verify_random_pairs(s, k, 100);
    worst = std::max(worst, sweep.max_relative_error);
    checked += static_cast<int>(sweep.checks.size());
    drawn += sweep.drawn;
  }
  return {worst <= 1e-6 && checked == 200,
          fmt("%d pairs (100 per kernel, %d drawn), max relative error %.2e", checked, drawn, worst)};
}

Outcome completeness_proxy() {
  Sampler s(kSeed);
  std::vector<VecD> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(s.vec(3, -10.0, 10.0));
  const double lambda = gram_min_eigenvalue(pts, KernelSpec::translation(1.0));
  return {lambda > 0.0, fmt("min Gram eigenvalue of 50 random points = %.6e", lambda)};
}

Outcome double_slit() {
  const SlitConfig cfg;
  const DetectorCurve open = detector_intensity(cfg);
  const double expected =
      2.0 * kPi * cfg.screen_to_detector / (cfg.wavenumber * std::abs(cfg.slit_positions[1] - cfg.slit_positions[0]));
  const double spacing_error = std::abs(open.fringe_spacing - expected) / expected;
  SlitConfig wp = cfg;
  wp.which_path = true;
  const DetectorCurve closed = detector_intensity(wp);
  return {open.visibility > 0.9 && spacing_error <= 0.1 && closed.visibility < 0.01,
          fmt("visibility %.6f, fringe spacing %.3f vs %.3f (%.2f%%), which-path visibility %.2e", open.visibility,
              open.fringe_spacing, expected, 100.0 * spacing_error, closed.visibility)};
}

Outcome epr_correlations() {
  const EPRConfig cfg;
  const double w = cfg.envelope_width;

  const auto kt = KernelSpec::translation(1.0);
  const Sphere2 phi = normalize(build_epr_state(cfg, kt), kt);
  const double resolution = 8.0 * w / (cfg.discretization_n - 1);
  double pos_err = 0.0;
  for (double a : {-w, 0.0, w}) {
    const auto grid = linspace(cfg.x0 + a - 3.0, cfg.x0 + a + 3.0, 601);
    pos_err = std::max(pos_err, std::abs(position_ridge(phi, a, grid) - (cfg.x0 + a)));
  }

  const auto kc = KernelSpec::confined(cfg.confined_alpha, 1.0);
  const Sphere2 phic = normalize(build_epr_state(cfg, kc), kc);
  const double q_spacing = 0.25;
  const auto q2 = linspace(-3.0, 3.0, 25);
  double mom_err = 0.0;
  for (double q1 : {-1.0, -0.5, 0.0, 0.5, 1.0}) mom_err = std::max(mom_err, std::abs(momentum_ridge(phic, q1, q2) + q1));

  EPRConfig coarse = cfg;
  coarse.discretization_n = 64;
  EPRConfig fine = cfg;
  fine.discretization_n = 128;
  const double conv = sphere_angle(normalize(build_epr_state(coarse, kt), kt), normalize(build_epr_state(fine, kt), kt));

  return {pos_err <= resolution && mom_err <= q_spacing + 1e-12 && conv < 1e-3,
          fmt("position ridge error %.3f <= %.3f, momentum ridge error %.3f <= %.2f, angle(phi64, phi128) = %.2e",
              pos_err, resolution, mom_err, q_spacing, conv)};
}

Outcome geodesic_properties() {
  Sampler s(kSeed);
  double endpoint = 0.0;
  double norm = 0.0;
  double speed = 0.0;
  for (int i = 0; i < 50; ++i) {
    const KernelSpec k = i % 2 == 0 ? KernelSpec::translation(1.0) : KernelSpec::confined(0.1, 1.0);
    const int dim = 1 + s.index(3);
    const Sphere1 a = normalize(random_state(s, dim, k), k);
    const Sphere1 b = normalize(random_state(s, dim, k), k);
    const auto path = make_geodesic(a, b);
    endpoint = std::max({endpoint, chord_distance(geodesic_at(path, 0.0), a), chord_distance(geodesic_at(path, 1.0), b)});
    constexpr int kSteps = 10;
    Sphere1 prev = a;
    for (int j = 1; j <= kSteps; ++j) {
      const Sphere1 p = geodesic_at(path, static_cast<double>(j) / kSteps);
      norm = std::max(norm, std::abs(std::sqrt(norm_squared(p.expr, k)) - 1.0));
      speed = std::max(speed, std::abs(chord_angle(prev, p) - path.theta / kSteps));
      prev = p;
    }
  }
  return {endpoint <= 1e-10 && norm <= 1e-9 && speed <= 1e-6,
          fmt("50 pairs: endpoint error %.2e, norm error %.2e, speed deviation %.2e", endpoint, norm, speed)};
}

Outcome norm_comparison() {
  const double sigma = 1.0;
  const StateExpr wide = single(make_packet(make_vec({0.0, 0.0, 0.0}), 100.0 * sigma));
  const double r = norm_ratio(wide, KernelSpec::translation(sigma));
  return {std::abs(r - 1.0) <= 1e-3, fmt("norm ratio of a width-100 sigma packet = %.8f", r)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "delta-distance law", 1.0, delta_distance_law},
      {2, "isometry", 5.0, isometry},
      {3, "collapse-time bound", 10.0, collapse_time_bound},
      {4, "classical-transfer speed", 1.0, transfer_speed},
      {5, "oracle equivalence", 60.0, oracle_equivalence},
      {6, "completeness proxy", 5.0, completeness_proxy},
      {7, "double slit", 10.0, double_slit},
      {8, "correlated pair", 60.0, epr_correlations},
      {9, "geodesic properties", 10.0, geodesic_properties},
      {10, "norm comparison", 1.0, norm_comparison},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %2d %-26s %s; %.3f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.time_limit_s, in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
