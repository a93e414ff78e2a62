#include <doctest.h>

#include <algorithm>

#include "momgen/error.hpp"
#include "momgen/gaussian.hpp"
#include "momgen/symmetric_functions.hpp"
#include "support.hpp"

using namespace momgen;
using testing::rat;

namespace {

ExactPoly weighted_powers(const std::vector<Rational>& alpha, int p) {
  ExactPoly q;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    q.add_term(Monomial::variable(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(p)), alpha[i]);
  return q;
}

// E[(sum_i alpha_i w_i^p)^{2n}] for n = 1..r straight from the Gaussian oracle
std::vector<Rational> oracle_moments(const std::vector<Rational>& alpha, int p) {
  const ExactPoly q = weighted_powers(alpha, p);
  std::vector<Rational> m;
  for (int n = 1; n <= static_cast<int>(alpha.size()); ++n)
    m.push_back(gaussian_expectation(poly_pow(q, static_cast<unsigned>(2 * n))));
  return m;
}

template <typename Scalar>
PowerSums<Scalar> power_sums_of(const std::vector<Scalar>& y, int upto) {
  PowerSums<Scalar> F;
  for (int n = 1; n <= upto; ++n) {
    Scalar s(0);
    for (const auto& v : y) {
      Scalar t(1);
      for (int k = 0; k < n; ++k) t *= v;
      s += t;
    }
    F.values.push_back(s);
  }
  return F;
}

}  // namespace

TEST_CASE("integer partitions") {
  CHECK(integer_partitions(4, 4).size() == 5);
  CHECK(integer_partitions(4, 2).size() == 3);
  CHECK(integer_partitions(6, 6).size() == 11);
  for (const auto& part : integer_partitions(5, 3)) {
    CHECK(std::is_sorted(part.begin(), part.end()));
    int s = 0;
    for (int a : part) s += a;
    CHECK(s == 5);
  }
}

TEST_CASE("moment_expansion_coeffs examples") {
  const auto c1 = moment_expansion_coeffs(1, 2, 3);
  REQUIRE(c1.size() == 1);
  CHECK(c1[0].partition == std::vector<int>{1});
  CHECK(c1[0].multiplier == 15);

  const auto c2 = moment_expansion_coeffs(2, 2, 3);
  REQUIRE(c2.size() == 2);
  CHECK(c2[0].partition == std::vector<int>{2});
  CHECK(c2[0].multiplier == 10395);
  CHECK(c2[1].partition == std::vector<int>{1, 1});
  CHECK(c2[1].multiplier == 675);

  const auto c3 = moment_expansion_coeffs(1, 1, 1);
  REQUIRE(c3.size() == 1);
  CHECK(c3[0].multiplier == 1);
}

TEST_CASE("n = 2 coefficients match the symbolic expansion") {
  // E[(a w1^3 + b w2^3)^4] = 10395 (a^4 + b^4) + 6 * 225 a^2 b^2; on the F basis the
  // cross term is F[1,1] = 2 a^2 b^2, so its multiplier is 675.
  const Rational a = rat(2, 3), b = rat(-5, 2);
  const Rational direct = gaussian_expectation(poly_pow(weighted_powers({a, b}, 3), 4));
  CHECK(direct == 10395 * (a * a * a * a + b * b * b * b) + 1350 * a * a * b * b);
}

TEST_CASE("f_value examples") {
  const auto F2 = power_sums_of<Rational>({1, 4}, 2);
  const std::vector<int> two{2}, one_one{1, 1};
  CHECK(f_value<Rational>(two, F2) == 17);
  CHECK(f_value<Rational>(one_one, F2) == 8);

  const auto F3 = power_sums_of<Rational>({1, 2, 3}, 3);
  const std::vector<int> ones{1, 1, 1};
  CHECK(f_value<Rational>(ones, F3) == 36);
}

TEST_CASE("f_value matches brute force over distinct indices") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    std::vector<Rational> y;
    for (int i = 0; i < 4; ++i) y.push_back(testing::random_rational(rng));
    const auto F = power_sums_of<Rational>(y, 6);
    const std::vector<int> part{1, 2, 3};
    Rational brute = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          if (i != j && j != k && i != k) brute += y[i] * y[j] * y[j] * y[k] * y[k] * y[k];
    CHECK(f_value<Rational>(part, F) == brute);
  }
}

TEST_CASE("single-block partition is the power sum itself") {
  std::mt19937_64 rng(43);
  std::vector<Rational> y;
  for (int i = 0; i < 3; ++i) y.push_back(testing::random_rational(rng));
  const auto F = power_sums_of<Rational>(y, 6);
  for (int n = 1; n <= 6; ++n) {
    const std::vector<int> part{n};
    CHECK(f_value<Rational>(part, F) == F(n));
  }
}

TEST_CASE("s_coefficient examples") {
  CHECK(s_coefficient(1, 3) == 15);
  CHECK(s_coefficient(2, 3) == 9720);
  CHECK(s_coefficient(1, 1) == 1);
}

TEST_CASE("M^4 = 675 F[1]^2 + 9720 F[2]") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 10; ++t) {
    const Rational a = testing::random_rational(rng), b = testing::random_rational(rng);
    const auto m = oracle_moments({a, b}, 3);
    const auto F = power_sums_of<Rational>({a * a, b * b}, 2);
    CHECK(m[1] == 675 * F(1) * F(1) + 9720 * F(2));
  }
}

TEST_CASE("S_n nonvanishing and leading-term dominance for p = 3") {
  for (int n = 1; n <= 10; ++n) {
    const auto s = s_coefficient_terms(n, 3);
    CHECK(abs(s.value) >= 1);
    if (n >= 3) CHECK(s.leading > s.others_abs);
  }
}

TEST_CASE("moments_to_power_sums examples") {
  const std::vector<Rational> m1{15};
  CHECK(moments_to_power_sums<Rational>(m1, 1, 3)(1) == 1);

  const auto m = oracle_moments({1, 2}, 3);
  const auto F = moments_to_power_sums<Rational>(m, 2, 3);
  CHECK(F(1) == 5);
  CHECK(F(2) == 17);

  const std::vector<Rational> m4{4};
  CHECK(moments_to_power_sums<Rational>(m4, 1, 1)(1) == 4);
  CHECK_THROWS_AS(moments_to_power_sums<Rational>(m4, 2, 1), ValidationError);
}

TEST_CASE("power_sums_to_weights examples") {
  const auto w = power_sums_to_weights(PowerSums<double>{{5.0, 13.0}});
  REQUIRE(w.alpha.size() == 2);
  CHECK(w.alpha[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(w.alpha[1] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(w.elementary[0] == doctest::Approx(5.0));
  CHECK(w.elementary[1] == doctest::Approx(6.0));

  const auto one = power_sums_to_weights(PowerSums<double>{{1.0}});
  CHECK(one.alpha == std::vector<double>{1.0});

  const auto twice = power_sums_to_weights(PowerSums<double>{{2.0, 2.0}});
  CHECK(twice.alpha[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(twice.alpha[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("power_sums_to_weights failure paths") {
  // y^2 - 2y + 5: roots 1 +- 2i
  CHECK_THROWS_AS(power_sums_to_weights(PowerSums<double>{{2.0, -6.0}}), NumericalError);
  // roots {-1, 3}
  CHECK_THROWS_AS(power_sums_to_weights(PowerSums<double>{{2.0, 10.0}}), NumericalError);
  // roots {-1e-9, 3}: clamped with a warning
  const double y0 = -1e-9, y1 = 3.0;
  const auto w = power_sums_to_weights(PowerSums<double>{{y0 + y1, y0 * y0 + y1 * y1}});
  CHECK(w.alpha[0] == 0.0);
  CHECK(!w.warnings.empty());
}

TEST_CASE("exact moments round trip to weights") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int p : {1, 3}) {
    // a linear output is Gaussian, so only sum alpha^2 is visible when p = 1
    for (int r = 1; r <= (p == 1 ? 1 : 4); ++r) {
      for (int t = 0; t < 3; ++t) {
        std::vector<double> alpha;
        while (static_cast<int>(alpha.size()) < r) {
          const double a = std::round(u(rng) * 64) / 64;  // dyadic, so exact
          bool distinct = true;
          for (double b : alpha) distinct &= std::abs(a - b) > 0.05;
          if (distinct) alpha.push_back(a);
        }
        std::vector<Rational> ar;
        for (double a : alpha) ar.push_back(exact(a));
        const auto F = moments_to_power_sums<Rational>(oracle_moments(ar, p), r, p);
        PowerSums<double> Fd;
        for (const auto& v : F.values) Fd.values.push_back(nearest_double(v));
        const auto w = power_sums_to_weights(Fd);
        std::sort(alpha.begin(), alpha.end());
        for (int i = 0; i < r; ++i) CHECK(std::abs(w.alpha[i] - alpha[i]) <= 1e-8);
      }
    }
  }
}

TEST_CASE("p = 1 cannot separate more than one weight") {
  CHECK(s_coefficient_terms(2, 1).value == 0);
  CHECK_THROWS_AS(s_coefficient(2, 1), NumericalError);
  const auto m = oracle_moments({1, 2}, 1);
  CHECK(m[1] == 3 * m[0] * m[0]);
  CHECK_THROWS_AS(moments_to_power_sums<Rational>(m, 2, 1), NumericalError);
}

TEST_CASE("expansion identity against the Gaussian oracle") {
  std::mt19937_64 rng(59);
  for (int r = 1; r <= 3; ++r) {
    std::vector<Rational> alpha;
    std::vector<Rational> y;
    for (int i = 0; i < r; ++i) {
      alpha.push_back(testing::random_rational(rng, 5, 3));
      y.push_back(alpha.back() * alpha.back());
    }
    const auto F = power_sums_of<Rational>(y, r);
    const auto oracle = oracle_moments(alpha, 3);
    for (int n = 1; n <= r; ++n) {
      Rational total = 0;
      for (const auto& c : moment_expansion_coeffs(n, r, 3)) total += c.multiplier * f_value<Rational>(c.partition, F);
      CHECK(total == oracle[static_cast<std::size_t>(n - 1)]);
    }
  }
}
