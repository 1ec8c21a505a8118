#include "stategeo/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace stategeo {

std::string to_string(ManifoldId id) {
  switch (id) {
    case ManifoldId::M3: return "M3";
    case ManifoldId::M3Tilde: return "M3tilde";
    case ManifoldId::M6: return "M6";
    case ManifoldId::M6Tilde: return "M6tilde";
  }
  return "?";
}

ManifoldId parse_manifold(const std::string& text) {
  if (text == "M3") return ManifoldId::M3;
  if (text == "M3tilde") return ManifoldId::M3Tilde;
  if (text == "M6") return ManifoldId::M6;
  if (text == "M6tilde") return ManifoldId::M6Tilde;
  throw DomainError("unknown manifold '" + text + "' (expected M3, M3tilde, M6 or M6tilde)");
}

int manifold_arity(ManifoldId id) { return id == ManifoldId::M3 || id == ManifoldId::M3Tilde ? 1 : 2; }

StateExpr embed_position(const VecD& u) { return single(make_delta(u)); }
StateExpr embed_momentum(const VecD& p) { return single(make_plane_wave(p)); }
PairStateExpr embed_pair_position(const VecD& u, const VecD& v) { return product(make_delta(u), make_delta(v)); }
PairStateExpr embed_pair_momentum(const VecD& p, const VecD& q) {
  return product(make_plane_wave(p), make_plane_wave(q));
}

double gram_min_eigenvalue(std::span<const VecD> points, const KernelSpec& kernel) {
  if (points.empty()) throw DomainError("gram_min_eigenvalue: no points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (vec_equal(points[i], points[j])) {
        throw DomainError("gram_min_eigenvalue: points " + std::to_string(i) + " and " + std::to_string(j) +
                          " coincide");
      }
    }
  }
  std::vector<Primitive> prims;
  prims.reserve(points.size());
  for (const auto& p : points) prims.push_back(make_delta(p));
  const Eigen::MatrixXcd g = primitive_gram(prims, kernel);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalFailure("gram_min_eigenvalue: eigensolver failed");
  return eig.eigenvalues().minCoeff();
}

namespace {

VecD slice(const Eigen::VectorXd& params, int offset, int d) {
  VecD v(d);
  for (int k = 0; k < d; ++k) v[k] = params[offset + k];
  return v;
}

StateExpr embed1(ManifoldId m, const Eigen::VectorXd& params) {
  const VecD v = slice(params, 0, static_cast<int>(params.size()));
  return m == ManifoldId::M3 ? embed_position(v) : embed_momentum(v);
}

PairStateExpr embed2(ManifoldId m, const Eigen::VectorXd& params) {
  const int d = static_cast<int>(params.size()) / 2;
  const VecD u = slice(params, 0, d);
  const VecD v = slice(params, d, d);
  return m == ManifoldId::M6 ? embed_pair_position(u, v) : embed_pair_momentum(u, v);
}

template <std::size_t Arity>
ProductExpr<Arity> embed(ManifoldId m, const Eigen::VectorXd& params) {
  if constexpr (Arity == 1) {
    return embed1(m, params);
  } else {
    return embed2(m, params);
  }
}

// Overlap of psi with the normalized manifold state at `params`.
template <std::size_t Arity>
Complex normalized_overlap(const SphereState<Arity>& psi, ManifoldId m, const Eigen::VectorXd& params) {
  const auto e = embed<Arity>(m, params);
  const double n2 = norm_squared(e, psi.kernel, Exec::Serial);
  return inner(psi.expr, e, psi.kernel, Exec::Serial) / std::sqrt(n2);
}

double score(Complex ov, ProjectionMode mode) { return mode == ProjectionMode::RealPart ? ov.real() : std::abs(ov); }

bool adjacent(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (std::abs(a[k] - b[k]) > 1) return false;
  }
  return true;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

// Maximizes f over [lo, hi] to within tol by golden-section search.
double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol, int& evals) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  evals += 2;
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
    ++evals;
  }
  return fc >= fd ? c : d;
}

struct Candidate {
  Eigen::VectorXd point;
  double value = 0.0;
  int iterations = 0;
};

template <std::size_t Arity>
ProjectionResult project(const SphereState<Arity>& psi, ManifoldId manifold, const SearchBox& box,
                         const ProjectionOptions& opts) {
  if (manifold_arity(manifold) != static_cast<int>(Arity)) {
    throw DomainError("manifold " + to_string(manifold) + " does not match the arity of the state");
  }
  const int params = static_cast<int>(Arity) * psi.expr.dim();
  if (box.lo.size() != params || box.hi.size() != params) {
    throw DomainError("search box must have " + std::to_string(params) + " parameters");
  }
  for (int k = 0; k < params; ++k) {
    if (!(box.lo[k] <= box.hi[k])) throw DomainError("search box is empty");
  }
  if (opts.coarse_points < 2) throw DomainError("coarse grid needs at least 2 points per axis");

  const auto objective = [&](const Eigen::VectorXd& x) {
    return score(normalized_overlap(psi, manifold, x), opts.mode);
  };

  // Coarse scan. Cells are independent; the reduction below is serial and
  // ordered, so the result does not depend on the thread count.
  const int n = opts.coarse_points;
  std::ptrdiff_t total = 1;
  for (int k = 0; k < params; ++k) {
    total *= n;
    if (total > 4'000'000) throw DomainError("coarse projection grid is too large");
  }
  const auto index_of = [&](std::ptrdiff_t cell) {
    std::vector<int> idx(static_cast<std::size_t>(params));
    for (int k = params - 1; k >= 0; --k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(cell % n);
      cell /= n;
    }
    return idx;
  };
  const auto point_of = [&](const std::vector<int>& idx) {
    Eigen::VectorXd x(params);
    for (int k = 0; k < params; ++k) {
      const double t = static_cast<double>(idx[static_cast<std::size_t>(k)]) / (n - 1);
      x[k] = box.lo[k] + t * (box.hi[k] - box.lo[k]);
    }
    return x;
  };
  std::vector<double> values(static_cast<std::size_t>(total));
  for_each_index(total, Exec::Parallel,
                 [&](std::ptrdiff_t cell) { values[static_cast<std::size_t>(cell)] = objective(point_of(index_of(cell))); });

  const double best = *std::max_element(values.begin(), values.end());
  std::vector<std::vector<int>> seeds;
  bool tie = false;
  for (std::ptrdiff_t cell = 0; cell < total; ++cell) {
    if (values[static_cast<std::size_t>(cell)] < best - opts.tie_tolerance) continue;
    const auto idx = index_of(cell);
    bool near_existing = false;
    for (const auto& s : seeds) near_existing = near_existing || adjacent(s, idx);
    if (near_existing) continue;
    if (!seeds.empty()) tie = true;
    seeds.push_back(idx);
  }

  Eigen::VectorXd spacing(params);
  for (int k = 0; k < params; ++k) spacing[k] = (box.hi[k] - box.lo[k]) / (n - 1);

  std::vector<Candidate> refined;
  for (const auto& seed : seeds) {
    Candidate c{point_of(seed), 0.0, 0};
    for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
      double moved = 0.0;
      for (int k = 0; k < params; ++k) {
        if (spacing[k] == 0.0) continue;
        const double lo = std::max(box.lo[k], c.point[k] - spacing[k]);
        const double hi = std::min(box.hi[k], c.point[k] + spacing[k]);
        Eigen::VectorXd x = c.point;
        int evals = 0;
        const auto along = [&](double v) {
          x[k] = v;
          return objective(x);
        };
        double v = golden_max(along, lo, hi, 1e-3 * opts.parameter_tolerance + 1e-7 * spacing[k], evals);
        // Newton polish on finite-difference derivatives: golden section
        // alone stalls at ~sqrt(machine epsilon) on a flat maximum.
        const double h = 1e-4 * spacing[k];
        for (int it = 0; it < 6; ++it) {
          const double fp = along(v + h);
          const double fm = along(v - h);
          const double f0 = along(v);
          evals += 3;
          const double curv = (fp - 2.0 * f0 + fm) / (h * h);
          if (!(curv < 0.0)) break;
          const double step = -((fp - fm) / (2.0 * h)) / curv;
          if (!(std::abs(step) < 10.0 * h)) break;
          const double next = std::clamp(v + step, lo, hi);
          if (along(next) < f0) break;
          ++evals;
          v = next;
          if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(v))) break;
        }
        c.iterations += evals;
        moved = std::max(moved, std::abs(v - c.point[k]));
        c.point[k] = v;
      }
      if (moved < opts.parameter_tolerance) break;
    }
    c.value = objective(c.point);
    // The coarse cell itself may be the exact maximizer.
    const Eigen::VectorXd start = point_of(seed);
    const double start_value = objective(start);
    if (start_value > c.value) c = {start, start_value, c.iterations};
    refined.push_back(std::move(c));
  }

  const Candidate* pick = &refined.front();
  for (const auto& c : refined) {
    if (c.value > pick->value + opts.tie_tolerance ||
        (std::abs(c.value - pick->value) <= opts.tie_tolerance && lex_less(c.point, pick->point))) {
      pick = &c;
    }
  }

  ProjectionResult out;
  out.point = pick->point;
  out.overlap = pick->value;
  out.iterations = pick->iterations;
  out.tie = tie;
  out.residual_angle = std::acos(std::clamp(pick->value, -1.0, 1.0));
  if (pick->value > 0.9) {
    // Chord-based angle: accurate where arccos is not.
    auto target = normalize(embed<Arity>(manifold, pick->point), psi.kernel, Exec::Serial);
    if (opts.mode == ProjectionMode::RealPart) {
      out.residual_angle = chord_angle(psi, target, Exec::Serial);
    } else {
      out.residual_angle = fs_angle(psi, target, Exec::Serial);
    }
  }
  return out;
}

}  // namespace

ProjectionResult nearest_classical_point(const Sphere1& psi, ManifoldId manifold, const SearchBox& box,
                                         const ProjectionOptions& opts) {
  return project(psi, manifold, box, opts);
}

ProjectionResult nearest_classical_point(const Sphere2& psi, ManifoldId manifold, const SearchBox& box,
                                         const ProjectionOptions& opts) {
  return project(psi, manifold, box, opts);
}

namespace {

template <std::size_t Arity>
SeparationResult separation(const Eigen::VectorXd& p, ManifoldId a, ManifoldId b, const KernelSpec& kernel,
                            const SampleGrid& grid) {
  const auto ref = normalize(embed<Arity>(a, p), kernel, Exec::Serial);
  const int params = static_cast<int>(p.size());
  std::ptrdiff_t total = 1;
  for (int k = 0; k < params; ++k) {
    total *= grid.count;
    if (total > 4'000'000) throw DomainError("separation grid is too large");
  }
  const auto sample_point = [&](std::ptrdiff_t cell) {
    Eigen::VectorXd x(params);
    for (int k = params - 1; k >= 0; --k) {
      const double t = grid.count == 1 ? 0.5 : static_cast<double>(cell % grid.count) / (grid.count - 1);
      x[k] = -grid.half_range + 2.0 * grid.half_range * t;
      cell /= grid.count;
    }
    return x;
  };
  std::vector<double> moduli(static_cast<std::size_t>(total));
  for_each_index(total, Exec::Parallel, [&](std::ptrdiff_t cell) {
    moduli[static_cast<std::size_t>(cell)] = std::abs(normalized_overlap(ref, b, sample_point(cell)));
  });

  SeparationResult out;
  out.samples = static_cast<std::size_t>(total);
  double best = -1.0;
  for (std::ptrdiff_t cell = 0; cell < total; ++cell) {
    if (moduli[static_cast<std::size_t>(cell)] > best) {
      best = moduli[static_cast<std::size_t>(cell)];
      out.closest = sample_point(cell);
    }
  }
  if (a == b) {
    const double self = std::abs(normalized_overlap(ref, b, p));
    ++out.samples;
    if (self >= best) {
      best = self;
      out.closest = p;
    }
  }
  best = std::min(best, 1.0);
  out.epsilon = 1.0 - best;
  out.min_angle = std::acos(best);
  return out;
}

}  // namespace

SeparationResult manifold_separation(const Eigen::VectorXd& p, ManifoldId a, ManifoldId b, const KernelSpec& kernel,
                                     const SampleGrid& grid) {
  if (manifold_arity(a) != manifold_arity(b)) throw DomainError("manifolds live in different state spaces");
  if (grid.count < 1 || !(grid.half_range >= 0.0)) throw DomainError("invalid sample grid");
  const int arity = manifold_arity(a);
  if (p.size() % arity != 0 || p.size() / arity < 1 || p.size() / arity > kMaxDim) {
    throw DomainError("parameter vector has the wrong length for " + to_string(a));
  }
  return arity == 1 ? separation<1>(p, a, b, kernel, grid) : separation<2>(p, a, b, kernel, grid);
}

}  // namespace stategeo
