#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stategeo/gaussian_algebra.hpp"
#include "stategeo/sampling.hpp"

using namespace stategeo;

namespace {

constexpr double kPi = std::numbers::pi;

bool close_rel(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("kernel specs parse, print and validate") {
  CHECK(KernelSpec::parse("translation:1").to_string() == "translation:1");
  CHECK(KernelSpec::parse("confined:0.1,1") == KernelSpec::confined(0.1, 1.0));
  CHECK(KernelSpec::parse("confined:0.25") == KernelSpec::confined(0.25, 1.0));
  CHECK(KernelSpec::parse(KernelSpec::translation(2.5).to_string()) == KernelSpec::translation(2.5));
  CHECK_THROWS_AS((void)KernelSpec::translation(0.0), DomainError);
  CHECK_THROWS_AS((void)KernelSpec::confined(-1.0), DomainError);
  CHECK_THROWS_AS((void)KernelSpec::parse("gaussian:1"), DomainError);
  CHECK_THROWS_AS((void)KernelSpec::parse("translation:1x"), DomainError);
}

TEST_CASE("vectors and primitives reject malformed input") {
  CHECK_THROWS_AS((void)make_vec({1.0, 2.0, 3.0, 4.0}), DomainError);
  CHECK_THROWS_AS((void)make_vec({std::nan("")}), DomainError);
  CHECK_THROWS_AS((void)make_packet(make_vec({0.0}), 0.0), DomainError);
  CHECK_THROWS_AS((void)make_packet(make_vec({0.0}), 1.0, make_vec({0.0, 1.0})), DomainError);
  CHECK_THROWS_AS((void)StateExpr(std::vector<Term1>{}), DomainError);
  CHECK_THROWS_AS((void)StateExpr({{1.0, {make_delta(make_vec({0.0}))}}, {1.0, {make_delta(make_vec({0.0, 1.0}))}}}),
                  DomainError);
  CHECK_THROWS_AS((void)StateExpr({{0.0, {make_delta(make_vec({0.0}))}}}), DomainError);
}

TEST_CASE("delta overlaps follow the kernel") {
  const auto k = KernelSpec::translation(1.0);
  for (double b = 0.0; b <= 10.0; b += 0.5) {
    const Complex v = primitive_inner(make_delta(make_vec({0.0})), make_delta(make_vec({b})), k);
    CHECK(v.real() == doctest::Approx(std::exp(-0.5 * b * b)).epsilon(1e-14));
    CHECK(v.imag() == 0.0);
  }
  const auto k2 = KernelSpec::translation(2.0);
  const VecD a = make_vec({1.0, -2.0, 0.5});
  const VecD c = make_vec({-0.5, 1.0, 2.0});
  const double d2 = (a - c).squaredNorm();
  CHECK(primitive_inner(make_delta(a), make_delta(c), k2).real() ==
        doctest::Approx(std::exp(-d2 / 8.0)).epsilon(1e-14));
  // Every delta has unit norm under a translation kernel.
  CHECK(norm_squared(single(make_delta(a)), k) == doctest::Approx(1.0).epsilon(1e-15));

  const auto kc = KernelSpec::confined(0.2, 1.5);
  CHECK(primitive_inner(make_delta(a), make_delta(a), kc).real() ==
        doctest::Approx(std::exp(-0.4 * a.squaredNorm())).epsilon(1e-14));
}

TEST_CASE("closed forms agree with independently integrated values") {
  // 2 pi / sqrt(det A) with A = [[3/2, -1], [-1, 3/2]].
  const Primitive g = make_packet(make_vec({0.0}), 1.0);
  CHECK(primitive_inner(g, g, KernelSpec::translation(1.0)).real() ==
        doctest::Approx(2.0 * kPi / std::sqrt(1.25)).epsilon(1e-14));

  // Reference values below come from 30-digit adaptive quadrature of the
  // defining double integral.
  const Complex pp = primitive_inner(make_packet(make_vec({0.5}), 0.7, make_vec({1.2})),
                                     make_packet(make_vec({-0.3}), 1.1, make_vec({-0.4})), KernelSpec::translation(0.8));
  CHECK(close_rel(pp, {1.31758935826557712, 0.618384070292239541}, 1e-13));

  const Complex dp = primitive_inner(make_delta(make_vec({0.3})), make_packet(make_vec({1.0}), 0.5, make_vec({2.0})),
                                     KernelSpec::confined(0.2, 1.5));
  CHECK(close_rel(dp, {0.244114564364048961, -0.450350920900049457}, 1e-13));

  const Complex ww =
      primitive_inner(make_plane_wave(make_vec({0.7})), make_plane_wave(make_vec({-0.4})), KernelSpec::confined(0.1, 1.0));
  CHECK(close_rel(ww, {1.50259951341562778, 0.0}, 1e-13));
}

TEST_CASE("plane waves under the confined kernel") {
  const double alpha = 0.1;
  const double beta = 1.0;
  const auto k = KernelSpec::confined(alpha, beta);
  for (double q : {0.0, 0.5, 1.0, 2.5}) {
    const Primitive w = make_plane_wave(make_vec({q}));
    const double norm2 =
        2.0 * kPi / std::sqrt(4.0 * alpha * alpha + 8.0 * alpha * beta) * std::exp(-q * q / (2.0 * (alpha + 2.0 * beta)));
    CHECK(primitive_inner(w, w, k).real() == doctest::Approx(norm2).epsilon(1e-13));
    const Complex dw = primitive_inner(make_delta(make_vec({0.0})), w, k);
    CHECK(dw.real() ==
          doctest::Approx(std::sqrt(kPi / (alpha + beta)) * std::exp(-q * q / (4.0 * (alpha + beta)))).epsilon(1e-13));
    CHECK(std::abs(dw.imag()) < 1e-15);
  }
  // Separable in d = 3.
  const Primitive w3 = make_plane_wave(make_vec({0.5, -1.0, 0.0}));
  Complex product = 1.0;
  for (double q : {0.5, -1.0, 0.0}) {
    const Primitive w1 = make_plane_wave(make_vec({q}));
    product *= primitive_inner(w1, w1, k);
  }
  CHECK(close_rel(primitive_inner(w3, w3, k), product, 1e-13));
}

TEST_CASE("a delta against a plane wave under the translation kernel") {
  const double sigma = 1.3;
  const double q = 0.8;
  const double c = 2.0;
  const Complex v = primitive_inner(make_delta(make_vec({c})), make_plane_wave(make_vec({q})),
                                    KernelSpec::translation(sigma));
  const Complex expected = std::sqrt(2.0 * kPi) * sigma * std::exp(-0.5 * sigma * sigma * q * q) *
                           std::exp(Complex(0.0, -q * c));
  CHECK(close_rel(v, expected, 1e-13));
}

TEST_CASE("two plane waves diverge under the translation kernel") {
  const Primitive a = make_plane_wave(make_vec({1.0}));
  const Primitive b = make_plane_wave(make_vec({-2.0}));
  const auto k = KernelSpec::translation(1.0);
  CHECK_THROWS_AS((void)primitive_inner(a, b, k), DivergenceError);
  CHECK_THROWS_AS((void)compile_pair(a, b, k), DivergenceError);
  try {
    (void)primitive_inner(a, b, k);
  } catch (const DivergenceError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("plane_wave") != std::string::npos);
    CHECK(msg.find("translation:1") != std::string::npos);
  }
  CHECK_THROWS_AS((void)norm_squared(single(a), k), DivergenceError);
}

TEST_CASE("gaussian_integral validates its input") {
  QuadForm q;
  q.a = QuadForm::Matrix::Identity(2, 2);
  q.a(1, 1) = -1.0;
  q.b = QuadForm::Vector::Zero(2);
  CHECK_THROWS_AS((void)gaussian_integral(q), DomainError);

  q.a = QuadForm::Matrix::Identity(2, 2);
  q.a(1, 1) = 1e-14;
  CHECK_THROWS_AS((void)gaussian_integral(q), NumericalFailure);

  // One dimension: sqrt(2 pi / a) exp(b^2 / (2 a) + c).
  QuadForm one;
  one.a = QuadForm::Matrix::Constant(1, 1, Complex(2.0, 1.0));
  one.b = QuadForm::Vector::Constant(1, Complex(0.3, -0.7));
  one.c = Complex(0.1, 0.2);
  const Complex a = one.a(0, 0);
  const Complex b = one.b(0);
  const Complex expected = std::sqrt(2.0 * kPi / a) * std::exp(b * b / (2.0 * a) + one.c);
  CHECK(close_rel(gaussian_integral(one), expected, 1e-14));
}

TEST_CASE("per-coordinate evaluation matches the full quadratic form") {
  Sampler s(1);
  for (const auto& k : {KernelSpec::translation(1.0), KernelSpec::translation(0.6), KernelSpec::confined(0.1, 1.0),
                        KernelSpec::confined(0.3, 2.0)}) {
    for (int i = 0; i < 200; ++i) {
      const auto [f, g] = random_convergent_pair(s, k);
      const Complex fast = primitive_inner(f, g, k);
      const QuadForm q = compile_pair(f, g, k);
      const Complex full = q.n() == 0 ? std::exp(q.c) : gaussian_integral(q);
      INFO(describe(f), " vs ", describe(g), " under ", k.to_string());
      CHECK(std::abs(fast - full) <= 1e-10 * std::max(std::abs(full), 1e-300));
    }
  }
}

TEST_CASE("the inner product is Hermitian and sesquilinear") {
  Sampler s(2);
  for (const auto& k : {KernelSpec::translation(1.0), KernelSpec::confined(0.1, 1.0)}) {
    for (int i = 0; i < 100; ++i) {
      const int dim = 1 + s.index(3);
      const StateExpr phi = random_state(s, dim, k);
      const StateExpr psi = random_state(s, dim, k);
      const StateExpr chi = random_state(s, dim, k);
      const Complex pq = inner_product(phi, psi, k);
      const Complex qp = inner_product(psi, phi, k);
      CHECK(std::abs(pq - std::conj(qp)) <= 1e-12 * std::max(1.0, std::abs(pq)));

      const Complex a(s.uniform(-1, 1), s.uniform(-1, 1));
      const Complex b(s.uniform(-1, 1), s.uniform(-1, 1));
      const StateExpr mix = StateExpr::combine(a, phi, b, psi);
      const Complex lhs = inner_product(mix, chi, k);
      const Complex rhs = a * inner_product(phi, chi, k) + b * inner_product(psi, chi, k);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
      const Complex conj_lin = inner_product(chi, mix, k);
      const Complex conj_rhs = std::conj(a) * inner_product(chi, phi, k) + std::conj(b) * inner_product(chi, psi, k);
      CHECK(std::abs(conj_lin - conj_rhs) <= 1e-12 * std::max(1.0, std::abs(conj_rhs)));

      const double n2 = norm_squared(phi, k);
      CHECK(n2 > 0.0);
      CHECK(inner_product(phi, phi, k).imag() == 0.0);
    }
  }
}

TEST_CASE("pair states factorize over the two particles") {
  const auto k = KernelSpec::confined(0.1, 1.0);
  const Primitive a = make_delta(make_vec({0.3}));
  const Primitive b = make_plane_wave(make_vec({-0.5}));
  const Primitive c = make_packet(make_vec({1.0}), 0.4, make_vec({0.2}));
  const Primitive d = make_delta(make_vec({-1.0}));
  const Complex pair = pair_inner_product(product(a, b), product(c, d), k);
  CHECK(close_rel(pair, primitive_inner(a, c, k) * primitive_inner(b, d, k), 1e-14));
  // A product of deltas has unit norm under the translation kernel.
  CHECK(norm_squared(product(a, make_delta(make_vec({2.0}))), KernelSpec::translation(1.0)) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("merging like terms sums their coefficients") {
  const Primitive a = make_delta(make_vec({0.0}));
  const Primitive b = make_delta(make_vec({1.0}));
  const std::vector<Term1> terms{{1.0, {a}}, {2.0, {b}}, {-1.0, {a}}};
  const auto merged = merge_like_terms(std::span<const Term1>(terms));
  REQUIRE(merged.size() == 2);
  CHECK(merged[0].coeff == Complex(0.0, 0.0));
  CHECK(merged[1].coeff == Complex(2.0, 0.0));
  CHECK(norm_squared_of_terms(std::span<const Term1>(merged), KernelSpec::translation(1.0)) ==
        doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("L2 inner products of packets") {
  const double w = 0.7;
  const StateExpr g = single(make_packet(make_vec({0.2}), w));
  CHECK(l2_inner_product(g, g).real() == doctest::Approx(std::sqrt(2.0 * kPi) * w).epsilon(1e-14));
  const StateExpr g3 = single(make_packet(make_vec({0.0, 1.0, 2.0}), w));
  CHECK(l2_inner_product(g3, g3).real() == doctest::Approx(std::pow(std::sqrt(2.0 * kPi) * w, 3)).epsilon(1e-14));
  CHECK_THROWS_AS((void)l2_inner_product(single(make_delta(make_vec({0.0}))), g), DomainError);
}

TEST_CASE("the Gram matrix of two deltas") {
  const std::vector<Primitive> prims{make_delta(make_vec({0.0})), make_delta(make_vec({1.0}))};
  const Eigen::MatrixXcd g = primitive_gram(prims, KernelSpec::translation(1.0));
  CHECK(g(0, 0).real() == doctest::Approx(1.0));
  CHECK(g(0, 1).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(g(1, 0) == std::conj(g(0, 1)));
}
