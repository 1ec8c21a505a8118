// Serial reference path against the OpenMP path for the data-parallel kernels.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include "stategeo/experiments.hpp"
#include "stategeo/oracle.hpp"
#include "stategeo/sampling.hpp"

namespace {

using namespace stategeo;

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_PrimitiveGram(benchmark::State& state) {
  Sampler s(7);
  const KernelSpec k = KernelSpec::translation(1.0);
  std::vector<Primitive> prims;
  for (int i = 0; i < static_cast<int>(state.range(1)); ++i) {
    prims.push_back(i % 2 == 0 ? make_delta(s.vec(3, -10, 10)) : make_packet(s.vec(3, -10, 10), s.uniform(0.1, 3)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(primitive_gram(prims, k, exec_of(state)));
  label(state);
}
BENCHMARK(BM_PrimitiveGram)->ArgsProduct({{0, 1}, {64, 256}})->Unit(benchmark::kMillisecond);

void BM_PairNorm(benchmark::State& state) {
  EPRConfig cfg;
  cfg.discretization_n = static_cast<int>(state.range(1));
  const KernelSpec k = KernelSpec::translation(1.0);
  const PairStateExpr phi = build_epr_state(cfg, k);
  for (auto _ : state) benchmark::DoNotOptimize(norm_squared(phi, k, exec_of(state)));
  label(state);
}
BENCHMARK(BM_PairNorm)->ArgsProduct({{0, 1}, {128, 512}})->Unit(benchmark::kMillisecond);

void BM_QuadraturePair(benchmark::State& state) {
  const KernelSpec k = KernelSpec::translation(1.0);
  const Primitive f = make_packet(make_vec({0.5, -1.0}), 0.3, make_vec({1.0, 0.0}));
  const Primitive g = make_packet(make_vec({-0.5, 2.0}), 1.5);
  for (auto _ : state) benchmark::DoNotOptimize(oracle::quad_primitive_pair(f, g, k, {}, exec_of(state)));
  label(state);
}
BENCHMARK(BM_QuadraturePair)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
