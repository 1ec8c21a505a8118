#pragma once

// Seeded generators of random points, primitives and states for the
// randomized verification drivers. Values depend only on the seed: the
// mapping from engine output to doubles is fixed here rather than left to
// the standard library's distributions.

#include <cstdint>
#include <random>
#include <utility>

#include "stategeo/gaussian_algebra.hpp"

namespace stategeo {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform on {0, ..., n - 1}.
  int index(int n) { return static_cast<int>(uniform(0.0, static_cast<double>(n))); }

  VecD vec(int dim, double lo, double hi) {
    VecD v(dim);
    for (int k = 0; k < dim; ++k) v[k] = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct PrimitiveRanges {
  double center_abs = 10.0;
  double width_min = 0.1;
  double width_max = 3.0;
  double momentum_abs = 3.0;
};

/// A delta, plane wave or packet with parameters drawn from `ranges`.
[[nodiscard]] Primitive random_primitive(Sampler& s, int dim, const PrimitiveRanges& ranges = {});

/// Two primitives of a common random dimension whose kernel inner product is
/// finite: plane-wave pairs are redrawn under translation kernels.
[[nodiscard]] std::pair<Primitive, Primitive> random_convergent_pair(Sampler& s, const KernelSpec& kernel,
                                                                     const PrimitiveRanges& ranges = {});

/// Superposition of 1..max_terms random primitives with random complex
/// coefficients. Plane waves are included only under confined kernels.
[[nodiscard]] StateExpr random_state(Sampler& s, int dim, const KernelSpec& kernel, int max_terms = 3,
                                     const PrimitiveRanges& ranges = {});

}  // namespace stategeo
