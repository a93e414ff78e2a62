#include <doctest.h>

#include <algorithm>

#include "momgen/ce_matrix.hpp"
#include "momgen/io.hpp"
#include "support.hpp"

using namespace momgen;
using testing::rat;

namespace {

// E[m * (sum_t lambda_t w_t^p)^n] by the multinomial theorem, coordinate by coordinate
Rational brute_entry(const Monomial& m, const std::vector<Rational>& lambda, int p, int n) {
  const int r = static_cast<int>(lambda.size());
  Rational total = 0;
  std::vector<int> k(static_cast<std::size_t>(r), 0);
  std::function<void(int, int)> rec = [&](int t, int left) {
    if (t == r - 1) {
      k[static_cast<std::size_t>(t)] = left;
      Rational term(factorial(static_cast<unsigned long>(n)));
      for (int s = 0; s < r; ++s) {
        const int ks = k[static_cast<std::size_t>(s)];
        term /= Rational(factorial(static_cast<unsigned long>(ks)));
        for (int c = 0; c < ks; ++c) term *= lambda[static_cast<std::size_t>(s)];
        term *= testing::normal_moment(m.exponent(static_cast<std::uint32_t>(s)) + static_cast<unsigned>(p * ks));
      }
      total += term;
      return;
    }
    for (int c = 0; c <= left; ++c) {
      k[static_cast<std::size_t>(t)] = c;
      rec(t + 1, left - c);
    }
  };
  rec(0, n);
  return total;
}

std::size_t index_of(const OddBasis& b, const Monomial& m) {
  const auto it = std::find(b.monomials.begin(), b.monomials.end(), m);
  REQUIRE(it != b.monomials.end());
  return static_cast<std::size_t>(it - b.monomials.begin());
}

std::vector<Rational> random_alpha(std::mt19937_64& rng, int r) {
  std::vector<Rational> a;
  for (int i = 0; i < r; ++i) a.push_back(testing::random_rational(rng, 9, 4));
  return a;
}

}  // namespace

TEST_CASE("basis sizes") {
  CHECK(enumerate_basis(2, 3).size() == 6);
  CHECK(enumerate_basis(1, 3).size() == 2);
  CHECK(enumerate_basis(3, 3).size() == 13);
  CHECK(enumerate_basis(2, 5).size() == 12);
  for (int r = 1; r <= 6; ++r) {
    CHECK(odd_basis_size(r, 3) == static_cast<std::size_t>(r * (r * r + 3 * r + 8) / 6));
    for (int p : {1, 3, 5}) {
      std::size_t closed = 0;
      for (int i = 1; i <= (p + 1) / 2; ++i)
        closed += binomial(static_cast<unsigned long>(r + 2 * i - 2), static_cast<unsigned long>(2 * i - 1)).get_ui();
      CHECK(enumerate_basis(r, p).size() == closed);
      CHECK(odd_basis_size(r, p) == closed);
    }
  }
}

TEST_CASE("basis order for r = 2, p = 3") {
  const auto b = enumerate_basis(2, 3);
  const std::vector<Monomial> expected{Monomial({{0, 3}}),         Monomial({{1, 3}}), Monomial({{0, 2}, {1, 1}}),
                                       Monomial({{0, 1}, {1, 2}}), Monomial({{0, 1}}), Monomial({{1, 1}})};
  CHECK(b.monomials == expected);
  CHECK(b.multiplicity(0) == 1);
  CHECK(b.multiplicity(2) == 3);
  CHECK(enumerate_basis(3, 3).multiplicity(9) == 6);  // w1 w2 w3
}

TEST_CASE("CE matrix examples") {
  const Rational lambda = rat(3, 2);
  const std::vector<Rational> a{lambda};
  const auto ce = build_ce_matrix(std::span<const Rational>(a), 3);
  const Rational l3 = lambda * lambda * lambda;
  CHECK(ce.exact(0, 0) == 15 * lambda);
  CHECK(ce.exact(0, 1) == 10395 * l3);
  CHECK(ce.exact(1, 0) == 3 * lambda);
  CHECK(ce.exact(1, 1) == 945 * l3);

  const std::vector<Rational> one{1};
  const auto lin = build_ce_matrix(std::span<const Rational>(one), 1);
  REQUIRE(lin.size() == 1);
  CHECK(lin.exact(0, 0) == 1);

  const std::vector<Rational> zero{0};
  const auto z = build_ce_matrix(std::span<const Rational>(zero), 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(z.exact(i, j) == 0);
}

TEST_CASE("CE entries match the multinomial oracle") {
  std::mt19937_64 rng(61);
  for (auto [r, p] : {std::pair{2, 3}, std::pair{3, 3}, std::pair{2, 5}}) {
    const auto a = random_alpha(rng, r);
    const auto ce = build_ce_matrix(std::span<const Rational>(a), p);
    for (std::size_t i = 0; i < ce.size(); ++i)
      for (std::size_t j = 0; j < ce.size(); ++j)
        CHECK(ce.exact(i, j) == brute_entry(ce.basis().monomials[i], a, p, static_cast<int>(2 * j + 1)));
  }
}

TEST_CASE("float mirror rounds the exact entries") {
  const std::vector<double> a{1.25, 2.5};
  const auto ce = build_ce_matrix(std::span<const double>(a), 3);
  const Eigen::MatrixXd f = ce.float_mirror();
  for (std::size_t i = 0; i < ce.size(); ++i)
    for (std::size_t j = 0; j < ce.size(); ++j) {
      CHECK(f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == nearest_double(ce.exact(i, j)));
      CHECK(std::ldexp(ce.scaled()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                       ce.column_exponent()(static_cast<Eigen::Index>(j))) ==
            doctest::Approx(f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))).epsilon(1e-15));
    }
}

TEST_CASE("flipping every weight flips every entry") {
  std::mt19937_64 rng(67);
  for (int r = 1; r <= 3; ++r) {
    auto a = random_alpha(rng, r);
    const auto ce = build_ce_matrix(std::span<const Rational>(a), 3);
    for (auto& x : a) x = -x;
    const auto neg = build_ce_matrix(std::span<const Rational>(a), 3);
    for (std::size_t i = 0; i < ce.size(); ++i)
      for (std::size_t j = 0; j < ce.size(); ++j) CHECK(neg.exact(i, j) == -ce.exact(i, j));
  }
}

TEST_CASE("generic condition check examples") {
  const auto c13 = generic_condition_check(1, 3, 4, 1);
  CHECK(c13.status == GenericStatus::Holds);
  CHECK(c13.witness == std::vector<long>{1});
  CHECK(c13.determinant == -17010);
  CHECK(15 * 945 - 3 * 10395 == -17010);

  const auto c11 = generic_condition_check(1, 1, 4, 1);
  CHECK(c11.status == GenericStatus::Holds);
  CHECK(c11.determinant == 1);
}

TEST_CASE("r = 1 determinant is -17010 lambda^4") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 10; ++t) {
    const std::vector<Rational> a{testing::random_rational(rng)};
    const auto ce = build_ce_matrix(std::span<const Rational>(a), 3);
    std::vector<Rational> flat;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) flat.push_back(ce.exact(i, j));
    const Rational l = a[0];
    CHECK(determinant(flat, 2) == -17010 * l * l * l * l);
  }
}

// Gaussian integration by parts in w_t and in w_s gives, for every s != t,
//   lambda_s E[w_s^2 w_t f(Q)] = lambda_t E[w_s w_t^2 f(Q)]   (p = 3),
// so each pair contributes a left null vector and det CE vanishes for r >= 2.
TEST_CASE("cubic CE matrices have one left null vector per coordinate pair") {
  std::mt19937_64 rng(73);
  for (int r = 2; r <= 3; ++r) {
    for (int t = 0; t < 3; ++t) {
      const auto a = random_alpha(rng, r);
      const auto ce = build_ce_matrix(std::span<const Rational>(a), 3);
      const std::size_t pairs = static_cast<std::size_t>(r * (r - 1) / 2);
      CHECK(ce.rank() == ce.size() - pairs);
      CHECK(ce.left_null_space().size() == pairs);
      for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(r); ++s)
        for (std::uint32_t u = s + 1; u < static_cast<std::uint32_t>(r); ++u) {
          const std::size_t i_ssu = index_of(ce.basis(), Monomial({{s, 2}, {u, 1}}));
          const std::size_t i_suu = index_of(ce.basis(), Monomial({{s, 1}, {u, 2}}));
          for (std::size_t j = 0; j < ce.size(); ++j)
            CHECK(a[s] * ce.exact(i_ssu, j) - a[u] * ce.exact(i_suu, j) == 0);
        }
      for (const auto& n : ce.left_null_space())
        for (std::size_t j = 0; j < ce.size(); ++j) {
          Rational acc = 0;
          for (std::size_t i = 0; i < ce.size(); ++i) acc += n[i] * ce.exact(i, j);
          CHECK(acc == 0);
        }
    }
  }
}

TEST_CASE("exact ranks at integer witnesses") {
  // frozen from exact elimination; the r >= 2 deficits follow from the pair relation above
  CHECK(generic_condition_check(2, 3, 3, 5).rank == 5);
  CHECK(generic_condition_check(2, 3, 3, 5).status == GenericStatus::Unknown);
  CHECK(generic_condition_check(2, 5, 2, 5).rank == 11);
  CHECK(generic_condition_check(2, 1, 2, 5).rank == 1);
  const std::vector<Rational> a{rat(1), rat(2)};
  CHECK(build_ce_matrix(std::span<const Rational>(a), 5).left_null_space().size() == 1);
}

TEST_CASE("r = 1 float determinant stays away from zero at smoothed weights") {
  std::mt19937_64 rng(79);
  std::normal_distribution<double> w(3.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> a{w(rng)};
    const Eigen::MatrixXd f = build_ce_matrix(std::span<const double>(a), 3).float_mirror();
    const double scale = f.cwiseAbs().rowwise().sum().prod();
    CHECK(std::abs(f.determinant()) > 1e-8 * scale);
  }
}

TEST_CASE("exact kernel and consistent solves") {
  // rows (1 2 3), (2 4 6), (1 0 1): rank 2, kernel spanned by (-1, -1, 1)
  std::vector<Rational> m{1, 2, 3, 2, 4, 6, 1, 0, 1};
  const auto k = null_space(m, 3, 3);
  CHECK(k.rank == 2);
  REQUIRE(k.basis.size() == 1);
  CHECK(k.basis[0] == std::vector<Rational>{-1, -1, 1});

  // overdetermined but consistent
  std::vector<Rational> a{1, 0, 0, 1, 1, 1};
  CHECK(solve_exact_consistent(a, {2, 3, 5}, 3, 2) == std::vector<Rational>{2, 3});
  CHECK_THROWS_AS(solve_exact_consistent(a, {2, 3, 6}, 3, 2), NumericalError);
  CHECK_THROWS_AS(solve_exact(m, {1, 1, 1}, 3), NumericalError);
}

TEST_CASE("CE export") {
  const std::vector<double> a{1.0, 2.0};
  const auto ce = build_ce_matrix(std::span<const double>(a), 3);
  const json j = to_json(ce);
  CHECK(j["entries"].size() == 6);
  CHECK(j["entries"][0][0].get<std::string>() == "15/1");
  CHECK(j["rank"].get<int>() == 5);
  const std::string csv = ce_csv(ce);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
