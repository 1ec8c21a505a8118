#include <algorithm>
#include <cmath>

#include "stategeo/experiments.hpp"

namespace stategeo {

void EPRConfig::validate() const {
  if (!std::isfinite(x0)) throw DomainError("x0 must be finite");
  if (!(envelope_width > 0.0) || !std::isfinite(envelope_width)) throw DomainError("envelope_width must be positive");
  if (discretization_n < 8) throw DomainError("discretization_n must be at least 8");
  if (!(confined_alpha > 0.0) || !std::isfinite(confined_alpha)) throw DomainError("confined_alpha must be positive");
  if (measured_position && measured_momentum) {
    throw DomainError("measure either position or momentum, not both");
  }
  if (measured_position && !std::isfinite(*measured_position)) throw DomainError("measured_position must be finite");
  if (measured_momentum && !std::isfinite(*measured_momentum)) throw DomainError("measured_momentum must be finite");
}

PairStateExpr build_epr_state(const EPRConfig& cfg, const KernelSpec& kernel) {
  cfg.validate();
  const double W = cfg.envelope_width;
  const int n = cfg.discretization_n;
  const auto u = linspace(-4.0 * W, 4.0 * W, n);
  const double h = 8.0 * W / (n - 1);
  std::vector<Term2> terms;
  terms.reserve(u.size());
  for (int j = 0; j < n; ++j) {
    const double uj = u[static_cast<std::size_t>(j)];
    const double w = (j == 0 || j == n - 1) ? 0.5 * h : h;
    terms.push_back({w * std::exp(-uj * uj / (2.0 * W * W)),
                     {make_delta(make_vec({uj})), make_delta(make_vec({cfg.x0 + uj}))}});
  }
  const PairStateExpr raw(std::move(terms));
  return normalize(raw, kernel).expr;
}

namespace {

Complex normalized_target_overlap(const Sphere2& phi, const PairStateExpr& target) {
  const double n2 = norm_squared(target, phi.kernel, Exec::Serial);
  return inner(phi.expr, target, phi.kernel, Exec::Serial) / std::sqrt(n2);
}

double argmax_on(std::span<const double> grid, const std::vector<double>& values) {
  if (grid.empty()) throw DomainError("empty search grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return grid[best];
}

}  // namespace

std::vector<double> position_profile(const Sphere2& phi, double a, std::span<const double> b_grid) {
  std::vector<double> out(b_grid.size());
  for_each_index(static_cast<std::ptrdiff_t>(b_grid.size()), Exec::Parallel, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    out[k] = normalized_target_overlap(phi, embed_pair_position(make_vec({a}), make_vec({b_grid[k]}))).real();
  });
  return out;
}

double position_ridge(const Sphere2& phi, double a, std::span<const double> b_grid) {
  return argmax_on(b_grid, position_profile(phi, a, b_grid));
}

std::vector<MomentumCell> momentum_correlation_profile(const Sphere2& phi, std::span<const double> q1_grid,
                                                       std::span<const double> q2_grid) {
  std::vector<MomentumCell> out(q1_grid.size() * q2_grid.size());
  for_each_index(static_cast<std::ptrdiff_t>(out.size()), Exec::Parallel, [&](std::ptrdiff_t i) {
    const auto k = static_cast<std::size_t>(i);
    const double q1 = q1_grid[k / q2_grid.size()];
    const double q2 = q2_grid[k % q2_grid.size()];
    const Complex ov = normalized_target_overlap(phi, embed_pair_momentum(make_vec({q1}), make_vec({q2})));
    out[k] = {q1, q2, std::abs(ov)};
  });
  return out;
}

double momentum_ridge(const Sphere2& phi, double q1, std::span<const double> q2_grid) {
  const double q1s[] = {q1};
  const auto cells = momentum_correlation_profile(phi, q1s, q2_grid);
  std::vector<double> values;
  values.reserve(cells.size());
  for (const auto& c : cells) values.push_back(c.overlap);
  return argmax_on(q2_grid, values);
}

GeodesicPath<2> position_collapse(const Sphere2& phi, double a, const EPRConfig& cfg) {
  cfg.validate();
  const auto target = normalize(embed_pair_position(make_vec({a}), make_vec({cfg.x0 + a})), phi.kernel);
  return make_geodesic(phi, target);
}

GeodesicPath<2> momentum_collapse(const Sphere2& phi, double q, const EPRConfig& cfg) {
  cfg.validate();
  const auto target = normalize(embed_pair_momentum(make_vec({q}), make_vec({-q})), phi.kernel);
  return make_geodesic(phi, target);
}

}  // namespace stategeo
