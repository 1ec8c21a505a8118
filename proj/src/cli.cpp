#include "stategeo/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unistd.h>

#include "CLI11.hpp"
#include "stategeo/embeddings.hpp"
#include "stategeo/experiments.hpp"
#include "stategeo/kernels.hpp"
#include "stategeo/oracle.hpp"
#include "stategeo/sampling.hpp"
#include "stategeo/sphere_geometry.hpp"

namespace stategeo::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Value conversions
// ---------------------------------------------------------------------------

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json complex_json(Complex c) { return json::array({number(c.real()), number(c.imag())}); }

Complex complex_from(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw DomainError(what + ": expected a number or a [re, im] pair");
}

json vec_json(const VecD& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

VecD vec_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw DomainError(what + ": expected an array of numbers");
  std::vector<double> values;
  for (const auto& x : j) {
    if (!x.is_number()) throw DomainError(what + ": expected an array of numbers");
    values.push_back(x.get<double>());
  }
  return make_vec(values);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    double v = 0.0;
    const auto* first = item.data();
    const auto* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) {
      throw DomainError(what + ": cannot parse '" + text + "' as comma-separated numbers");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

json primitive_json(const Primitive& p) {
  return std::visit(
      [](const auto& prim) -> json {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Delta>) {
          return {{"type", "delta"}, {"center", vec_json(prim.center)}};
        } else if constexpr (std::is_same_v<T, PlaneWave>) {
          return {{"type", "plane_wave"}, {"momentum", vec_json(prim.momentum)}};
        } else {
          return {{"type", "packet"},
                  {"center", vec_json(prim.center)},
                  {"width", prim.width},
                  {"momentum", vec_json(prim.momentum)}};
        }
      },
      p);
}

Primitive primitive_from(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw DomainError("primitive: expected an object with a \"type\"");
  }
  const std::string type = j["type"];
  const auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw DomainError(std::string("primitive ") + type + ": missing \"" + key + "\"");
    return j[key];
  };
  if (type == "delta") return make_delta(vec_from(require("center"), "delta center"));
  if (type == "plane_wave") return make_plane_wave(vec_from(require("momentum"), "plane_wave momentum"));
  if (type == "packet") {
    const VecD c = vec_from(require("center"), "packet center");
    const json& w = require("width");
    if (!w.is_number()) throw DomainError("packet width must be a number");
    const VecD p = j.contains("momentum") ? vec_from(j["momentum"], "packet momentum") : zero_vec(static_cast<int>(c.size()));
    return make_packet(c, w.get<double>(), p);
  }
  throw DomainError("unknown primitive type '" + type + "'");
}

json state_json(const StateExpr& s) {
  json terms = json::array();
  for (const auto& t : s.terms()) terms.push_back({{"coeff", complex_json(t.coeff)}, {"primitive", primitive_json(t.factors[0])}});
  return {{"terms", terms}};
}

StateExpr state_from(const json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) {
    throw DomainError("state: expected an object with a \"terms\" array");
  }
  std::vector<Term1> terms;
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("primitive")) throw DomainError("state term: missing \"primitive\"");
    const Complex c = t.contains("coeff") ? complex_from(t["coeff"], "state coefficient") : Complex(1.0, 0.0);
    terms.push_back({c, {primitive_from(t["primitive"])}});
  }
  return StateExpr(std::move(terms));
}

// "--packet c1,c2;w;p1,p2" (momentum optional).
Primitive packet_from_text(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = text.find(';', pos);
    parts.push_back(text.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) {
    throw DomainError("--packet expects 'center;width[;momentum]', got '" + text + "'");
  }
  const VecD c = make_vec(parse_numbers(parts[0], "packet center"));
  const auto w = parse_numbers(parts[1], "packet width");
  if (w.size() != 1) throw DomainError("packet width must be a single number");
  const VecD p = parts.size() == 3 ? make_vec(parse_numbers(parts[2], "packet momentum")) : zero_vec(static_cast<int>(c.size()));
  return make_packet(c, w[0], p);
}

KernelSpec kernel_from(const json& params) { return KernelSpec::parse(params.at("kernel").get<std::string>()); }

std::vector<StateExpr> states_from(const json& params, std::size_t expected, const std::string& command) {
  const json& list = params.at("states");
  if (list.size() != expected) {
    throw DomainError(command + " needs exactly " + std::to_string(expected) + " states, got " +
                      std::to_string(list.size()));
  }
  std::vector<StateExpr> out;
  for (const auto& s : list) out.push_back(state_from(s));
  return out;
}

int int_param(const json& params, const char* key) {
  const json& v = params.at(key);
  if (!v.is_number_integer()) throw DomainError(std::string(key) + " must be an integer");
  return v.get<int>();
}

double num_param(const json& params, const char* key) { return params.at(key).get<double>(); }

std::optional<double> opt_param(const json& params, const char* key) {
  const json& v = params.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

json RunConfig::to_json() const {
  return {{"command", command},
          {"params", params},
          {"format", format},
          {"output_path", output_path ? json(*output_path) : json(nullptr)},
          {"seed", seed}};
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  const json& c = j.contains("config") ? j["config"] : j;
  if (!c.is_object()) throw DomainError("config must be a JSON object");
  for (const auto& [key, value] : c.items()) {
    if (key != "command" && key != "params" && key != "format" && key != "output_path" && key != "seed") {
      throw DomainError("unknown config key '" + key + "'");
    }
  }
  if (!c.contains("command") || !c["command"].is_string()) throw DomainError("config needs a \"command\" string");
  RunConfig out;
  out.command = c["command"];
  if (c.contains("params")) {
    if (!c["params"].is_object()) throw DomainError("\"params\" must be an object");
    out.params = c["params"];
  }
  if (c.contains("format")) out.format = c["format"].get<std::string>();
  if (c.contains("output_path") && !c["output_path"].is_null()) out.output_path = c["output_path"].get<std::string>();
  if (c.contains("seed")) {
    if (!c["seed"].is_number_unsigned()) throw DomainError("\"seed\" must be a nonnegative integer");
    out.seed = c["seed"].get<std::uint64_t>();
  }
  return out;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"distance",      "geodesic", "metric",        "gram",
                                              "double-slit",   "epr",      "oracle-verify", "constants"};
  return names;
}

json default_params(const std::string& command) {
  const UnitSystem units;
  const SlitConfig slit;
  const EPRConfig epr;
  if (command == "distance") return {{"kernel", "translation:1"}, {"states", json::array()}};
  if (command == "geodesic") {
    return {{"kernel", "translation:1"},
            {"states", json::array()},
            {"samples", 11},
            {"align_phase", false},
            {"planck_length_m", units.planck_length_m},
            {"light_speed_m_per_s", units.light_speed_m_per_s}};
  }
  if (command == "metric") return {{"kernel", "translation:1"}, {"point", {0.0, 0.0, 0.0}}, {"step", 1e-3}};
  if (command == "gram") {
    return {{"kernel", "translation:1"},
            {"points", json::array()},
            {"random_count", 50},
            {"random_dim", 3},
            {"random_half_range", 10.0}};
  }
  if (command == "double-slit") {
    return {{"kernel", slit.kernel.to_string()},
            {"slit_positions", {slit.slit_positions[0], slit.slit_positions[1]}},
            {"coefficients", {complex_json(slit.coefficients[0]), complex_json(slit.coefficients[1])}},
            {"packet_width", slit.packet_width},
            {"wavenumber", slit.wavenumber},
            {"screen_to_detector", slit.screen_to_detector},
            {"detector_grid", {slit.detector_min, slit.detector_max, slit.detector_count}},
            {"which_path", slit.which_path},
            {"detected_point", nullptr},
            {"propagation_distance", slit.propagation_distance},
            {"samples_per_segment", slit.samples_per_segment},
            {"spread_width", slit.spread_width}};
  }
  if (command == "epr") {
    return {{"x0", epr.x0},
            {"envelope_width", epr.envelope_width},
            {"discretization_n", epr.discretization_n},
            {"confined_alpha", epr.confined_alpha},
            {"measured_position", nullptr},
            {"measured_momentum", nullptr},
            {"profile_half_range", 3.0},
            {"profile_points", 601},
            {"q_range", 3.0},
            {"q_spacing", 0.25}};
  }
  if (command == "oracle-verify") {
    const oracle::QuadratureSpec q;
    return {{"kernel", "translation:1"},
            {"states", json::array()},
            {"count", 20},
            {"rule", oracle::to_string(q.rule)},
            {"nodes_per_axis", q.nodes_per_axis},
            {"refinement_levels", q.refinement_levels},
            {"box_halfwidth", q.box_halfwidth},
            {"tolerance", 1e-6},
            {"min_cancellation", 1e-6}};
  }
  if (command == "constants") {
    return {{"planck_length_m", units.planck_length_m}, {"light_speed_m_per_s", units.light_speed_m_per_s}};
  }
  throw DomainError("unknown command '" + command + "'");
}

namespace {

bool compatible(const json& def, const json& value) {
  if (def.is_null()) return value.is_null() || value.is_number();
  if (def.is_number_integer()) return value.is_number_integer();
  if (def.is_number()) return value.is_number();
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_array()) return value.is_array();
  return value.type() == def.type();
}

}  // namespace

RunConfig resolve(const RunConfig& config) {
  RunConfig out = config;
  out.params = default_params(config.command);
  if (!config.params.is_object()) throw DomainError("params must be a JSON object");
  for (const auto& [key, value] : config.params.items()) {
    if (!out.params.contains(key)) throw DomainError("unknown parameter '" + key + "' for " + config.command);
    if (!compatible(out.params[key], value)) {
      throw DomainError("parameter '" + key + "' has the wrong type (expected like " + out.params[key].dump() + ")");
    }
    out.params[key] = value;
  }
  if (out.format != "json" && out.format != "csv") throw DomainError("format must be json or csv");
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

json run_distance(const json& p) {
  const KernelSpec k = kernel_from(p);
  const auto states = states_from(p, 2, "distance");
  const auto a = normalize(states[0], k);
  const auto b = normalize(states[1], k);
  return {{"sphere_angle", sphere_angle(a, b)},
          {"fs_angle", fs_angle(a, b)},
          {"chord_distance", chord_distance(a, b)},
          {"overlap", complex_json(overlap(a, b))},
          {"norms", {a.norm, b.norm}}};
}

json run_geodesic(const json& p) {
  const KernelSpec k = kernel_from(p);
  const auto states = states_from(p, 2, "geodesic");
  const int samples = int_param(p, "samples");
  if (samples < 2) throw DomainError("samples must be at least 2");
  UnitSystem units{num_param(p, "planck_length_m"), num_param(p, "light_speed_m_per_s")};
  const auto path = make_geodesic(normalize(states[0], k), normalize(states[1], k), p.at("align_phase").get<bool>());
  json rows = json::array();
  for (double t : linspace(0.0, 1.0, samples)) {
    const auto s = geodesic_at(path, t);
    rows.push_back({{"t", t},
                    {"angle_from_start", chord_angle(path.start, s)},
                    {"angle_to_end", chord_angle(s, path.end_aligned)},
                    {"norm_error", std::abs(std::sqrt(norm_squared(s.expr, k)) - 1.0)}});
  }
  return {{"theta", path.theta},
          {"arc_length", arc_length(path)},
          {"alignment_phase", path.alignment_phase},
          {"collapse_time_s", collapse_time(path, units)},
          {"planck_time_s", units.planck_time_s()},
          {"samples", rows}};
}

json run_metric(const json& p) {
  const KernelSpec k = kernel_from(p);
  const auto report = induced_metric(k, vec_from(p.at("point"), "point"), num_param(p, "step"));
  json matrix = json::array();
  for (Eigen::Index i = 0; i < report.matrix.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < report.matrix.cols(); ++j) row.push_back(report.matrix(i, j));
    matrix.push_back(row);
  }
  return {{"point", vec_json(report.point)},
          {"matrix", matrix},
          {"reference", report.reference == MetricReference::Euclidean ? "euclidean" : "scaled_euclidean"},
          {"reference_factor", report.reference_factor},
          {"deviation", report.deviation},
          {"truncation_estimate", report.truncation_estimate}};
}

json run_gram(const json& p, std::uint64_t seed) {
  const KernelSpec k = kernel_from(p);
  std::vector<VecD> points;
  for (const auto& x : p.at("points")) points.push_back(vec_from(x, "point"));
  const bool random = points.empty();
  if (random) {
    const int count = int_param(p, "random_count");
    const int dim = int_param(p, "random_dim");
    const double half = num_param(p, "random_half_range");
    if (count < 1 || dim < 1 || dim > kMaxDim || !(half > 0.0)) throw DomainError("invalid random point settings");
    Sampler s(seed);
    for (int i = 0; i < count; ++i) points.push_back(s.vec(dim, -half, half));
  }
  const double min_eig = gram_min_eigenvalue(points, k);
  std::vector<Primitive> prims;
  for (const auto& x : points) prims.push_back(make_delta(x));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(primitive_gram(prims, k), Eigen::EigenvaluesOnly);
  json values = json::array();
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) values.push_back(eig.eigenvalues()[i]);
  json pts = json::array();
  for (const auto& x : points) pts.push_back(vec_json(x));
  return {{"min_eigenvalue", min_eig}, {"eigenvalues", values}, {"points", pts}, {"random_points", random}};
}

SlitConfig slit_from(const json& p) {
  SlitConfig cfg;
  cfg.kernel = kernel_from(p);
  const json& slits = p.at("slit_positions");
  const json& coeffs = p.at("coefficients");
  const json& grid = p.at("detector_grid");
  if (slits.size() != 2 || coeffs.size() != 2) throw DomainError("double-slit needs exactly two slits and coefficients");
  if (grid.size() != 3) throw DomainError("detector_grid is [min, max, count]");
  for (std::size_t j = 0; j < 2; ++j) {
    if (!slits[j].is_number()) throw DomainError("slit positions must be numbers");
    cfg.slit_positions[j] = slits[j].get<double>();
    cfg.coefficients[j] = complex_from(coeffs[j], "slit coefficient");
  }
  if (!grid[0].is_number() || !grid[1].is_number() || !grid[2].is_number_integer()) {
    throw DomainError("detector_grid is [min, max, count] with an integer count");
  }
  cfg.detector_min = grid[0].get<double>();
  cfg.detector_max = grid[1].get<double>();
  cfg.detector_count = grid[2].get<int>();
  cfg.packet_width = num_param(p, "packet_width");
  cfg.wavenumber = num_param(p, "wavenumber");
  cfg.screen_to_detector = num_param(p, "screen_to_detector");
  cfg.which_path = p.at("which_path").get<bool>();
  cfg.detected_point = opt_param(p, "detected_point");
  cfg.propagation_distance = num_param(p, "propagation_distance");
  cfg.samples_per_segment = int_param(p, "samples_per_segment");
  cfg.spread_width = p.at("spread_width").get<bool>();
  return cfg;
}

json run_double_slit(const json& p) {
  const SlitConfig cfg = slit_from(p);
  const DetectorCurve curve = detector_intensity(cfg);
  const Trajectory traj = build_double_slit_trajectory(cfg);
  json segments = json::array();
  for (const auto& seg : traj.segments) {
    json samples = json::array();
    for (const auto& s : seg.samples) samples.push_back({{"t", s.t}, {"arc", s.arc}});
    segments.push_back({{"kind", to_string(seg.kind)},
                        {"arc_length", seg.arc_length},
                        {"collapse_time_s", seg.collapse_time_s ? json(*seg.collapse_time_s) : json(nullptr)},
                        {"max_residual_angle", seg.max_residual_angle},
                        {"samples", samples}});
  }
  return {{"detector",
           {{"visibility", curve.visibility},
            {"fringe_spacing", number(curve.fringe_spacing)},
            {"expected_spacing", curve.expected_spacing},
            {"detected_point", curve.detected_point},
            {"x", curve.x},
            {"intensity", curve.intensity}}},
          {"trajectory",
           {{"detected_point", traj.detected_point},
            {"max_junction_angle", traj.max_junction_angle},
            {"segments", segments}}}};
}

EPRConfig epr_from(const json& p) {
  EPRConfig cfg;
  cfg.x0 = num_param(p, "x0");
  cfg.envelope_width = num_param(p, "envelope_width");
  cfg.discretization_n = int_param(p, "discretization_n");
  cfg.confined_alpha = num_param(p, "confined_alpha");
  cfg.measured_position = opt_param(p, "measured_position");
  cfg.measured_momentum = opt_param(p, "measured_momentum");
  cfg.validate();
  return cfg;
}

json run_epr(const json& p) {
  const EPRConfig cfg = epr_from(p);
  const double W = cfg.envelope_width;
  const double half = num_param(p, "profile_half_range");
  const int points = int_param(p, "profile_points");
  const double q_range = num_param(p, "q_range");
  const double q_spacing = num_param(p, "q_spacing");
  if (!(half > 0.0) || points < 3 || !(q_range > 0.0) || !(q_spacing > 0.0)) {
    throw DomainError("invalid profile or momentum grid settings");
  }
  const KernelSpec translation = KernelSpec::translation(1.0);
  const auto phi = normalize(build_epr_state(cfg, translation), translation);
  const double resolution = 8.0 * W / (cfg.discretization_n - 1);

  json position = json::array();
  for (double a : {-W, 0.0, W}) {
    const auto grid = linspace(cfg.x0 + a - half, cfg.x0 + a + half, points);
    const double ridge = position_ridge(phi, a, grid);
    position.push_back({{"a", a}, {"ridge_b", ridge}, {"expected_b", cfg.x0 + a}, {"resolution", resolution}});
  }

  EPRConfig doubled = cfg;
  doubled.discretization_n = 2 * cfg.discretization_n;
  const auto phi2 = normalize(build_epr_state(doubled, translation), translation);
  const double convergence = sphere_angle(phi, phi2);

  const KernelSpec confined = KernelSpec::confined(cfg.confined_alpha, 1.0);
  const auto phic = normalize(build_epr_state(cfg, confined), confined);
  const int q_count = static_cast<int>(std::floor(2.0 * q_range / q_spacing + 1e-9)) + 1;
  const auto q_grid = linspace(-q_range, -q_range + q_spacing * (q_count - 1), q_count);
  json momentum = json::array();
  for (double q1 : {-1.0, 0.0, 1.0}) {
    momentum.push_back({{"q1", q1}, {"ridge_q2", momentum_ridge(phic, q1, q_grid)}, {"expected_q2", -q1},
                        {"resolution", q_spacing}});
  }

  const double profile_a = cfg.measured_position.value_or(0.0);
  const auto profile_grid = linspace(cfg.x0 + profile_a - half, cfg.x0 + profile_a + half, points);
  const auto profile = position_profile(phi, profile_a, profile_grid);

  json result = {{"position_ridges", position},
                 {"momentum_ridges", momentum},
                 {"convergence_angle", convergence},
                 {"position_profile", {{"a", profile_a}, {"b", profile_grid}, {"overlap", profile}}},
                 {"collapse", nullptr}};
  if (cfg.measured_position) {
    const auto path = position_collapse(phi, *cfg.measured_position, cfg);
    result["collapse"] = {{"kind", "position"},
                          {"value", *cfg.measured_position},
                          {"theta", path.theta},
                          {"collapse_time_s", collapse_time(path)}};
  } else if (cfg.measured_momentum) {
    const auto path = momentum_collapse(phic, *cfg.measured_momentum, cfg);
    result["collapse"] = {{"kind", "momentum"},
                          {"value", *cfg.measured_momentum},
                          {"theta", path.theta},
                          {"collapse_time_s", collapse_time(path)}};
  }
  return result;
}

json run_oracle_verify(const json& p, std::uint64_t seed) {
  const KernelSpec k = kernel_from(p);
  oracle::QuadratureSpec spec;
  spec.rule = oracle::parse_rule(p.at("rule").get<std::string>());
  spec.nodes_per_axis = int_param(p, "nodes_per_axis");
  spec.refinement_levels = int_param(p, "refinement_levels");
  spec.box_halfwidth = num_param(p, "box_halfwidth");
  spec.validate();
  const double tol = num_param(p, "tolerance");

  if (!p.at("states").empty()) {
    const auto states = states_from(p, 2, "oracle-verify");
    const Complex closed = inner_product(states[0], states[1], k);
    const auto quad = oracle::quad_inner_product(states[0], states[1], k, spec);
    const double diff = std::abs(quad.value - closed);
    const double rel = diff == 0.0 ? 0.0 : diff / std::abs(closed);
    json row = {{"index", 0},
                {"closed", complex_json(closed)},
                {"quadrature", complex_json(quad.value)},
                {"error_estimate", quad.error_estimate},
                {"relative_error", number(rel)}};
    return {{"checks", json::array({row})}, {"max_relative_error", number(rel)}, {"passed", rel <= tol}, {"drawn", 1}};
  }

  const int count = int_param(p, "count");
  Sampler sampler(seed);
  const auto sweep = oracle::verify_random_pairs(sampler, k, count, spec, num_param(p, "min_cancellation"));
  json rows = json::array();
  for (std::size_t i = 0; i < sweep.checks.size(); ++i) {
    const auto& c = sweep.checks[i];
    rows.push_back({{"index", i},
                    {"f", primitive_json(c.f)},
                    {"g", primitive_json(c.g)},
                    {"closed", complex_json(c.closed)},
                    {"quadrature", complex_json(c.quad.value)},
                    {"error_estimate", c.quad.error_estimate},
                    {"relative_error", c.relative_error}});
  }
  return {{"checks", rows},
          {"max_relative_error", sweep.max_relative_error},
          {"passed", sweep.max_relative_error <= tol},
          {"drawn", sweep.drawn}};
}

json run_constants(const json& p) {
  const UnitSystem units{num_param(p, "planck_length_m"), num_param(p, "light_speed_m_per_s")};
  if (!(units.planck_length_m > 0.0) || !(units.light_speed_m_per_s > 0.0)) {
    throw DomainError("constants must be positive");
  }
  return {{"planck_length_m", units.planck_length_m},
          {"light_speed_m_per_s", units.light_speed_m_per_s},
          {"planck_time_s", units.planck_time_s()},
          {"max_collapse_time_s", collapse_time(std::numbers::pi, units)}};
}

}  // namespace

json execute(const RunConfig& config) {
  const RunConfig r = resolve(config);
  const json& p = r.params;
  json result;
  if (r.command == "distance") result = run_distance(p);
  else if (r.command == "geodesic") result = run_geodesic(p);
  else if (r.command == "metric") result = run_metric(p);
  else if (r.command == "gram") result = run_gram(p, r.seed);
  else if (r.command == "double-slit") result = run_double_slit(p);
  else if (r.command == "epr") result = run_epr(p);
  else if (r.command == "oracle-verify") result = run_oracle_verify(p, r.seed);
  else result = run_constants(p);
  return {{"schema_version", kSchemaVersion}, {"command", r.command}, {"config", r.to_json()}, {"result", result}};
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

std::string fmt(const json& v) {
  if (v.is_null()) return "nan";
  if (v.is_number_integer()) return v.dump();
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
  return ec == std::errc() ? std::string(buf, ptr) : v.dump();
}

void row(std::ostringstream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

}  // namespace

std::string to_csv(const json& record) {
  const std::string command = record.at("command");
  const json& r = record.at("result");
  std::ostringstream os;
  if (command == "distance") {
    row(os, {"parameter", "value"});
    row(os, {"sphere_angle", fmt(r["sphere_angle"])});
    row(os, {"fs_angle", fmt(r["fs_angle"])});
    row(os, {"chord_distance", fmt(r["chord_distance"])});
    row(os, {"overlap_re", fmt(r["overlap"][0])});
    row(os, {"overlap_im", fmt(r["overlap"][1])});
  } else if (command == "geodesic") {
    row(os, {"t", "angle_from_start", "angle_to_end", "norm_error"});
    for (const auto& s : r["samples"]) {
      row(os, {fmt(s["t"]), fmt(s["angle_from_start"]), fmt(s["angle_to_end"]), fmt(s["norm_error"])});
    }
  } else if (command == "metric") {
    row(os, {"entry", "value"});
    for (std::size_t i = 0; i < r["matrix"].size(); ++i) {
      for (std::size_t j = 0; j < r["matrix"][i].size(); ++j) {
        row(os, {"g" + std::to_string(i + 1) + std::to_string(j + 1), fmt(r["matrix"][i][j])});
      }
    }
  } else if (command == "gram") {
    row(os, {"index", "eigenvalue"});
    for (std::size_t i = 0; i < r["eigenvalues"].size(); ++i) row(os, {std::to_string(i), fmt(r["eigenvalues"][i])});
  } else if (command == "double-slit") {
    row(os, {"x", "intensity"});
    const json& d = r["detector"];
    for (std::size_t i = 0; i < d["x"].size(); ++i) row(os, {fmt(d["x"][i]), fmt(d["intensity"][i])});
  } else if (command == "epr") {
    row(os, {"b", "overlap"});
    const json& prof = r["position_profile"];
    for (std::size_t i = 0; i < prof["b"].size(); ++i) row(os, {fmt(prof["b"][i]), fmt(prof["overlap"][i])});
  } else if (command == "oracle-verify") {
    row(os, {"index", "relative_error", "error_estimate"});
    for (const auto& c : r["checks"]) row(os, {fmt(c["index"]), fmt(c["relative_error"]), fmt(c["error_estimate"])});
  } else {
    row(os, {"parameter", "value"});
    for (const char* key : {"planck_length_m", "light_speed_m_per_s", "planck_time_s", "max_collapse_time_s"}) {
      row(os, {key, fmt(r[key])});
    }
  }
  return os.str();
}

void write_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw DomainError("cannot open '" + tmp + "' for writing");
    f << text;
    f.flush();
    if (!f) throw DomainError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DomainError("cannot move output into place at '" + path + "'");
  }
}

namespace {

void report(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const json record = execute(config);
    const std::string json_text = record.dump(2) + "\n";
    if (config.format == "csv") {
      const std::string csv = to_csv(record);
      if (config.output_path) {
        write_atomically(*config.output_path, csv);
        out << json_text;
      } else {
        out << csv;
      }
    } else if (config.output_path) {
      write_atomically(*config.output_path, json_text);
    } else {
      out << json_text;
    }
    return kOk;
  } catch (const DomainError& e) {
    report(err, e.kind(), e.what());
    return kInvalidInput;
  } catch (const NumericalFailure& e) {
    report(err, e.kind(), e.what());
    return kNumericalFailure;
  } catch (const json::exception& e) {
    report(err, "invalid_input", e.what());
    return kInvalidInput;
  } catch (const std::exception& e) {
    report(err, "internal", e.what());
    return kNumericalFailure;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

namespace {

struct HelpRequested {
  std::string text;
};

struct Flags {
  std::string kernel;
  std::string format;
  std::string output;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;
  std::vector<std::string> deltas;
  std::vector<std::string> packets;
  std::vector<std::string> waves;
  std::vector<std::string> points;
  std::optional<int> count;
  std::string rule;
  bool which_path = false;
  std::optional<double> detected_point;
  std::optional<double> measure_position;
  std::optional<double> measure_momentum;
  std::optional<int> discretization;
};

const char* describe_command(const std::string& name) {
  if (name == "distance") return "Angle between two states on the unit sphere";
  if (name == "geodesic") return "Great-circle path between two states and its collapse time";
  if (name == "metric") return "Metric induced by the kernel on position space";
  if (name == "gram") return "Gram matrix eigenvalues of position deltas";
  if (name == "double-slit") return "Double-slit detector pattern and state trajectory";
  if (name == "epr") return "Correlated pair: position and momentum ridges, collapse";
  if (name == "oracle-verify") return "Compare closed-form inner products with quadrature";
  return "Physical constants and derived collapse-time bound";
}

RunConfig parse_impl(const std::vector<std::string>& args) {
  CLI::App app{"Geometry of quantum states in a Gaussian-kernel Hilbert space", "stategeo"};
  app.require_subcommand(1, 1);
  Flags f;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : commands()) {
    CLI::App* sub = app.add_subcommand(name, describe_command(name));
    subs[name] = sub;
    sub->add_option("--config", f.config_file, "JSON config or run record to start from");
    sub->add_option("--format", f.format, "json or csv");
    sub->add_option("--output", f.output, "Write output to this file (atomically)");
    sub->add_option("--seed", f.seed, "Seed for randomized runs");
    sub->add_option("--param", f.params, "Override a parameter: key=<json value>");
    if (name != "constants" && name != "epr") sub->add_option("--kernel", f.kernel, "translation:<sigma> or confined:<alpha>,<beta>");
    if (name == "distance" || name == "geodesic" || name == "oracle-verify") {
      sub->add_option("--delta", f.deltas, "State: delta at the given point, e.g. 0 or 1,2,3");
      sub->add_option("--packet", f.packets, "State: packet 'center;width[;momentum]'");
      sub->add_option("--wave", f.waves, "State: plane wave with the given momentum");
    }
    if (name == "metric" || name == "gram") sub->add_option("--point", f.points, "Point, e.g. 0,0,0");
    if (name == "gram" || name == "oracle-verify") sub->add_option("--count", f.count, "Number of random samples");
    if (name == "oracle-verify") sub->add_option("--rule", f.rule, "trapezoid or gauss-legendre");
    if (name == "double-slit") {
      sub->add_flag("--which-path", f.which_path, "Measure the path at the slits");
      sub->add_option("--detected-point", f.detected_point, "Transverse coordinate of the detection");
    }
    if (name == "epr") {
      sub->add_option("--measure-position", f.measure_position, "Collapse onto a position outcome");
      sub->add_option("--measure-momentum", f.measure_momentum, "Collapse onto a momentum outcome");
      sub->add_option("-n,--discretization", f.discretization, "Number of quadrature nodes");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::string text = app.help();
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) text = sub->help();
    }
    throw HelpRequested{text};
  } catch (const CLI::ParseError& e) {
    throw DomainError(e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  RunConfig cfg;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw DomainError("cannot read config file '" + f.config_file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DomainError("config file is not valid JSON: " + std::string(e.what()));
    }
    cfg = RunConfig::from_json(j);
    if (cfg.command != command) {
      throw DomainError("config file is for '" + cfg.command + "', not '" + command + "'");
    }
  } else {
    cfg.command = command;
  }
  if (!f.format.empty()) cfg.format = f.format;
  if (!f.output.empty()) cfg.output_path = f.output;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.kernel.empty()) cfg.params["kernel"] = f.kernel;

  // States in command-line order across the three state flags.
  std::size_t di = 0, pi = 0, wi = 0;
  json states = json::array();
  for (const CLI::Option* opt : sub->parse_order()) {
    const std::string n = opt->get_name();
    if (n == "--delta") {
      states.push_back(state_json(single(make_delta(make_vec(parse_numbers(f.deltas.at(di++), "--delta"))))));
    } else if (n == "--packet") {
      states.push_back(state_json(single(packet_from_text(f.packets.at(pi++)))));
    } else if (n == "--wave") {
      states.push_back(state_json(single(make_plane_wave(make_vec(parse_numbers(f.waves.at(wi++), "--wave"))))));
    }
  }
  if (!states.empty()) cfg.params["states"] = states;

  if (!f.points.empty()) {
    if (command == "metric") {
      if (f.points.size() != 1) throw DomainError("metric takes a single --point");
      cfg.params["point"] = vec_json(make_vec(parse_numbers(f.points[0], "--point")));
    } else {
      json pts = json::array();
      for (const auto& s : f.points) pts.push_back(vec_json(make_vec(parse_numbers(s, "--point"))));
      cfg.params["points"] = pts;
    }
  }
  if (f.count) cfg.params[command == "gram" ? "random_count" : "count"] = *f.count;
  if (!f.rule.empty()) cfg.params["rule"] = f.rule;
  if (f.which_path) cfg.params["which_path"] = true;
  if (f.detected_point) cfg.params["detected_point"] = *f.detected_point;
  if (f.measure_position) cfg.params["measured_position"] = *f.measure_position;
  if (f.measure_momentum) cfg.params["measured_momentum"] = *f.measure_momentum;
  if (f.discretization) cfg.params["discretization_n"] = *f.discretization;

  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    cfg.params[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  return cfg;
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
  try {
    return parse_impl(args);
  } catch (const HelpRequested& h) {
    throw DomainError(h.text);
  }
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_impl(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kOk;
  } catch (const Error& e) {
    report(err, e.kind(), e.what());
    return kInvalidInput;
  }
  return run(cfg, out, err);
}

}  // namespace stategeo::cli
