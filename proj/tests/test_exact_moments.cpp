#include <doctest.h>

#include "momgen/error.hpp"
#include "momgen/gaussian.hpp"
#include "momgen/io.hpp"
#include "support.hpp"

using namespace momgen;
using testing::rat;

namespace {

ExactPoly var(std::uint32_t v, const Rational& c = 1) { return ExactPoly::variable(v, c); }

ExactPoly mono(std::vector<Monomial::Factor> f, const Rational& c = 1) { return ExactPoly::monomial(Monomial(std::move(f)), c); }

}  // namespace

TEST_CASE("double factorial") {
  CHECK(double_factorial(5) == 15);
  CHECK(double_factorial(0) == 1);
  CHECK(double_factorial(1) == 1);
  CHECK(double_factorial(11) == 10395);
  CHECK(double_factorial(12) == 46080);
}

TEST_CASE("Gaussian monomial expectations") {
  CHECK(gaussian_monomial_expectation(Monomial({{0, 2}, {1, 4}})) == 3);
  CHECK(gaussian_monomial_expectation(Monomial({{0, 3}})) == 0);
  CHECK(gaussian_monomial_expectation(Monomial({{0, 6}})) == 15);
  CHECK(gaussian_monomial_expectation(Monomial()) == 1);

  // w1^2 w2^4 against sampling
  const auto mc = testing::monte_carlo(2, 10'000'000, 11, [](const std::vector<double>& w) {
    return w[0] * w[0] * std::pow(w[1], 4);
  });
  CHECK(std::abs(mc.mean - 3.0) <= 3 * mc.stderr_);
}

TEST_CASE("odd exponents give zero expectation") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> e(0, 7);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint32_t> ex{e(rng), e(rng), e(rng)};
    const bool odd = ex[0] % 2 || ex[1] % 2 || ex[2] % 2;
    const Rational v = gaussian_monomial_expectation(Monomial::from_exponents(ex));
    if (odd) {
      CHECK(v == 0);
    } else {
      CHECK(v == testing::normal_moment(ex[0]) * testing::normal_moment(ex[1]) * testing::normal_moment(ex[2]));
    }
  }
}

TEST_CASE("poly_mul examples") {
  CHECK(poly_mul(var(0), var(0)) == mono({{0, 2}}));
  CHECK(poly_mul(var(0) + var(1), var(0) - var(1)) == mono({{0, 2}}) - mono({{1, 2}}));
  CHECK(poly_mul(mono({{0, 3}}, 2), mono({{1, 3}}, 3)) == mono({{0, 3}, {1, 3}}, 6));
}

TEST_CASE("poly_mul term count bound") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto a = testing::random_poly(rng, 3, 4, 6);
    const auto b = testing::random_poly(rng, 3, 4, 6);
    CHECK(poly_mul(a, b).size() <= a.size() * b.size());
  }
}

TEST_CASE("poly_pow examples") {
  CHECK(poly_pow(var(0) + var(1), 2) == mono({{0, 2}}) + mono({{0, 1}, {1, 1}}, 2) + mono({{1, 2}}));
  const Rational lambda = rat(-3, 7);
  CHECK(poly_pow(mono({{0, 3}}, lambda), 3) == mono({{0, 9}}, lambda * lambda * lambda));
  const ExactPoly cubes = mono({{0, 3}}) + mono({{1, 3}});
  CHECK(poly_pow(cubes, 2) == mono({{0, 6}}) + mono({{0, 3}, {1, 3}}, 2) + mono({{1, 6}}));
  CHECK_THROWS_AS(poly_pow(cubes, 0), ValidationError);
}

TEST_CASE("poly_pow respects the term cap") {
  const ExactPoly s = var(0) + var(1) + var(2) + var(3);
  CHECK_THROWS_AS(poly_pow(s, 12, 100), TermCapExceeded);
  CHECK_NOTHROW(poly_pow(s, 3, 100));
}

TEST_CASE("gaussian_expectation examples") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const Rational a1 = testing::random_rational(rng), a2 = testing::random_rational(rng);
    const ExactPoly q = mono({{0, 3}}, a1) + mono({{1, 3}}, a2);
    CHECK(gaussian_expectation(poly_pow(q, 2)) == 15 * (a1 * a1 + a2 * a2));
  }
  CHECK(gaussian_expectation(mono({{0, 1}, {1, 1}})) == 0);

  // (w1^3 + w2^3)^4 by the binomial theorem over independent coordinates
  Rational oracle = 0;
  for (unsigned k = 0; k <= 4; ++k)
    oracle += Rational(binomial(4, k)) * testing::normal_moment(3 * k) * testing::normal_moment(3 * (4 - k));
  CHECK(oracle == 22140);
  CHECK(gaussian_expectation(poly_pow(mono({{0, 3}}) + mono({{1, 3}}), 4)) == 22140);
}

TEST_CASE("expectation of a square is non-negative") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 100; ++t) {
    const auto q = testing::random_poly(rng, 3, 4, 5);
    CHECK(gaussian_expectation(poly_pow(q, 2)) >= 0);
  }
}

TEST_CASE("expectation of m * p matches the materialised product") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 50; ++t) {
    const auto p = testing::random_poly(rng, 3, 5, 6);
    const Monomial m({{0, static_cast<std::uint32_t>(t % 3)}, {2, static_cast<std::uint32_t>(t % 4)}});
    CHECK(gaussian_expectation(m, p) == gaussian_expectation(poly_mul(ExactPoly::monomial(m), p)));
  }
}

TEST_CASE("poly_mul is commutative and associative") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto a = testing::random_poly(rng, 3, 3, 4);
    const auto b = testing::random_poly(rng, 3, 3, 4);
    const auto c = testing::random_poly(rng, 3, 3, 4);
    CHECK(poly_mul(a, b) == poly_mul(b, a));
    CHECK(poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c)));
  }
}

TEST_CASE("terms iterate in graded lexicographic order") {
  const ExactPoly p = poly_pow(var(0) + var(1) + ExactPoly::constant(1), 3);
  std::uint32_t prev = 0;
  for (const auto& [m, c] : p.terms()) {
    CHECK(m.degree() >= prev);
    prev = m.degree();
    CHECK(c != 0);
  }
}

TEST_CASE("polynomial JSON round trip") {
  std::mt19937_64 rng(37);
  const auto p = testing::random_poly(rng, 3, 5, 8);
  const json j = to_json(p);
  CHECK(poly_from_json(j) == p);
  const auto& first = j.at(0);
  CHECK(first.at("coeff").get<std::string>().find('/') != std::string::npos);
  CHECK(first.at("coeff").get<std::string>().find('.') == std::string::npos);
}

TEST_CASE("rational text form") {
  CHECK(to_string(rat(-6, 4)) == "-3/2");
  CHECK(to_string(rat(5)) == "5/1");
  CHECK(parse_rational("-3/2") == rat(-3, 2));
  CHECK(parse_rational("7") == 7);
  CHECK_THROWS_AS(parse_rational("1.5"), ValidationError);
  CHECK(nearest_double(exact(0.1)) == 0.1);
  CHECK(exact(0.5) == rat(1, 2));
}
