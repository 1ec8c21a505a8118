#include <atomic>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "stategeo/embeddings.hpp"
#include "stategeo/oracle.hpp"
#include "stategeo/parallel.hpp"
#include "stategeo/sampling.hpp"

using namespace stategeo;

namespace {

StateExpr big_state(Sampler& s, int terms, int dim, const KernelSpec& k) {
  StateExpr acc = random_state(s, dim, k);
  while (static_cast<int>(acc.size()) < terms) acc = StateExpr::combine(1.0, acc, 1.0, random_state(s, dim, k));
  return acc;
}

}  // namespace

TEST_CASE("pairwise sums are order-fixed") {
  std::vector<double> v;
  for (int i = 0; i < 1000; ++i) v.push_back(1.0 / (i + 1));
  const double a = pairwise_sum(std::span<const double>(v));
  const double b = pairwise_sum(std::span<const double>(v));
  CHECK(a == b);
  CHECK(a == doctest::Approx(7.485470860550345));
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
}

TEST_CASE("for_each_index visits every index once on both paths") {
  for (Exec exec : {Exec::Serial, Exec::Parallel}) {
    std::vector<int> hits(1000, 0);
    for_each_index(1000, exec, [&](std::ptrdiff_t i) { hits[static_cast<std::size_t>(i)] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("exceptions escape the parallel path") {
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(for_each_index(1000, Exec::Parallel,
                                 [&](std::ptrdiff_t i) {
                                   ++ran;
                                   if (i == 500) throw std::runtime_error("boom");
                                 }),
                  std::runtime_error);
  CHECK(ran.load() > 0);
  CHECK(worker_threads() >= 1);
}

TEST_CASE("inner products are bitwise identical on the serial and parallel paths") {
  Sampler s(51);
  for (const auto& k : {KernelSpec::translation(1.0), KernelSpec::confined(0.1, 1.0)}) {
    const StateExpr a = big_state(s, 40, 3, k);
    const StateExpr b = big_state(s, 40, 3, k);
    CHECK(inner_product(a, b, k, Exec::Serial) == inner_product(a, b, k, Exec::Parallel));
    CHECK(norm_squared(a, k, Exec::Serial) == norm_squared(a, k, Exec::Parallel));
  }
}

TEST_CASE("Gram matrices agree bitwise") {
  Sampler s(52);
  std::vector<Primitive> prims;
  for (int i = 0; i < 60; ++i) prims.push_back(make_delta(s.vec(3, -10.0, 10.0)));
  const auto k = KernelSpec::translation(1.0);
  CHECK(primitive_gram(prims, k, Exec::Serial) == primitive_gram(prims, k, Exec::Parallel));
}

TEST_CASE("quadrature agrees bitwise") {
  const auto f = make_packet(make_vec({0.3, -1.0}), 0.5, make_vec({1.0, 0.5}));
  const auto g = make_packet(make_vec({-0.2, 0.4}), 0.8, make_vec({-0.5, 0.0}));
  const auto k = KernelSpec::translation(1.0);
  const auto serial = oracle::quad_primitive_pair(f, g, k, {}, Exec::Serial);
  const auto parallel = oracle::quad_primitive_pair(f, g, k, {}, Exec::Parallel);
  CHECK(serial.value == parallel.value);
  CHECK(serial.error_estimate == parallel.error_estimate);
}

TEST_CASE("sphere geometry agrees bitwise") {
  Sampler s(53);
  const auto k = KernelSpec::confined(0.1, 1.0);
  const StateExpr e = big_state(s, 30, 2, k);
  const Sphere1 a = normalize(e, k, Exec::Serial);
  const Sphere1 b = normalize(big_state(s, 30, 2, k), k, Exec::Serial);
  const Sphere1 ap = normalize(e, k, Exec::Parallel);
  CHECK(a.norm == ap.norm);
  CHECK(sphere_angle(a, b, Exec::Serial) == sphere_angle(a, b, Exec::Parallel));
  CHECK(chord_distance(a, b, Exec::Serial) == chord_distance(a, b, Exec::Parallel));
}
