#include "stategeo/sampling.hpp"

namespace stategeo {

Primitive random_primitive(Sampler& s, int dim, const PrimitiveRanges& ranges) {
  switch (s.index(3)) {
    case 0: return make_delta(s.vec(dim, -ranges.center_abs, ranges.center_abs));
    case 1: return make_plane_wave(s.vec(dim, -ranges.momentum_abs, ranges.momentum_abs));
    default: {
      const VecD c = s.vec(dim, -ranges.center_abs, ranges.center_abs);
      const double w = s.uniform(ranges.width_min, ranges.width_max);
      return make_packet(c, w, s.vec(dim, -ranges.momentum_abs, ranges.momentum_abs));
    }
  }
}

std::pair<Primitive, Primitive> random_convergent_pair(Sampler& s, const KernelSpec& kernel,
                                                       const PrimitiveRanges& ranges) {
  const int dim = 1 + s.index(kMaxDim);
  while (true) {
    Primitive f = random_primitive(s, dim, ranges);
    Primitive g = random_primitive(s, dim, ranges);
    const bool both_waves = std::holds_alternative<PlaneWave>(f) && std::holds_alternative<PlaneWave>(g);
    if (both_waves && kernel.is_translation()) continue;
    return {std::move(f), std::move(g)};
  }
}

StateExpr random_state(Sampler& s, int dim, const KernelSpec& kernel, int max_terms, const PrimitiveRanges& ranges) {
  const int count = 1 + s.index(max_terms);
  std::vector<Term1> terms;
  while (static_cast<int>(terms.size()) < count) {
    Primitive p = random_primitive(s, dim, ranges);
    if (kernel.is_translation() && std::holds_alternative<PlaneWave>(p)) continue;
    const Complex c(s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0));
    if (c == Complex{}) continue;
    terms.push_back({c, {std::move(p)}});
  }
  return StateExpr(std::move(terms));
}

}  // namespace stategeo
