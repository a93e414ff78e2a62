#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "momgen/error.hpp"
#include "momgen/generator.hpp"
#include "momgen/io.hpp"
#include "momgen/tensor.hpp"

using namespace momgen;

namespace {

Eigen::VectorXd e(Eigen::Index n, Eigen::Index i) { return Eigen::VectorXd::Unit(n, i); }

SymTensor3d random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymTensor3d t(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      for (Eigen::Index k = j; k < n; ++k) t.set(i, j, k, g(rng));
  return t;
}

// T'_{ijk} = sum T_xyz G_ix G_jy G_kz by direct summation
SymTensor3d six_loops(const SymTensor3d& t, const Eigen::MatrixXd& g) {
  const Eigen::Index m = g.rows(), n = g.cols();
  SymTensor3d out(m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index k = 0; k < m; ++k) {
        double s = 0.0;
        for (Eigen::Index x = 0; x < n; ++x)
          for (Eigen::Index y = 0; y < n; ++y)
            for (Eigen::Index z = 0; z < n; ++z) s += t(x, y, z) * g(i, x) * g(j, y) * g(k, z);
        out.set(i, j, k, s);
      }
  return out;
}

// Largest error between recovered and true components after matching each
// true vector to its best-overlap recovered one.
double component_error(const DecompResult& res, const std::vector<double>& w, const std::vector<Eigen::VectorXd>& u) {
  double worst = 0.0;
  std::vector<bool> used(res.components.size(), false);
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::size_t best = 0;
    double overlap = -2.0;
    for (std::size_t c = 0; c < res.components.size(); ++c)
      if (!used[c] && res.components[c].vector.dot(u[i]) > overlap) {
        overlap = res.components[c].vector.dot(u[i]);
        best = c;
      }
    used[best] = true;
    worst = std::max(worst, (res.components[best].vector - u[i]).norm());
    worst = std::max(worst, std::abs(res.components[best].weight - w[i]) / w[i]);
  }
  return worst;
}

SymTensor3d harmonic_cubic() {
  SymTensor3d t(2);
  t.set(0, 0, 0, 1.0);
  t.set(0, 1, 1, -1.0);
  return t;
}

struct Instance {
  SymTensor3d t;
  std::vector<double> w;
  std::vector<Eigen::VectorXd> u;
};

// rank r, dimension n, generic unit vectors and weights in [0.5, 2]
Instance random_instance(Eigen::Index n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  Instance in{SymTensor3d(n), {}, {}};
  for (int i = 0; i < r; ++i) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = g(rng);
    v.normalize();
    in.u.push_back(v);
    in.w.push_back(wd(rng));
    in.t.add_rank_one(v, in.w.back());
  }
  return in;
}

}  // namespace

TEST_CASE("sym_eig examples") {
  const auto id = sym_eig(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.values.isApprox(Eigen::Vector3d(1, 1, 1)));

  const auto dg = sym_eig(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix());
  CHECK(dg.values(0) == doctest::Approx(3.0));
  CHECK(dg.values(1) == doctest::Approx(1.0));
  CHECK(dg.vectors.col(0).isApprox(e(2, 1)));
  CHECK(dg.vectors.col(1).isApprox(e(2, 0)));

  Eigen::Matrix2d a;
  a << 2, 1, 1, 2;
  const auto s = sym_eig(a);
  CHECK(s.values(0) == doctest::Approx(3.0));
  CHECK(s.values(1) == doctest::Approx(1.0));
  CHECK(s.vectors.col(0).isApprox(Eigen::Vector2d(1, 1) / std::sqrt(2.0)));
  // largest-magnitude entry positive; ties go to the first entry
  CHECK(s.vectors.col(1).isApprox(Eigen::Vector2d(1, -1) / std::sqrt(2.0)));
}

TEST_CASE("sym_eig residual and sign convention on random matrices") {
  std::mt19937_64 rng(83);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 8; ++n) {
    Eigen::MatrixXd m(n, n);
    for (auto& x : m.reshaped()) x = g(rng);
    m = (m + m.transpose()).eval();
    const auto s = sym_eig(m);
    CHECK((m * s.vectors - s.vectors * s.values.asDiagonal()).norm() <= 1e-10 * m.norm());
    CHECK((s.vectors.transpose() * s.vectors - Eigen::MatrixXd::Identity(n, n)).norm() <= 1e-12 * n);
    for (int i = 1; i < n; ++i) CHECK(s.values(i - 1) >= s.values(i));
    for (int c = 0; c < n; ++c) {
      Eigen::Index arg;
      s.vectors.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(s.vectors(arg, c) > 0);
    }
  }
  Eigen::Matrix2d bad;
  bad << 1, 2, 0, 1;
  CHECK_THROWS_AS(sym_eig(bad), ValidationError);
}

TEST_CASE("slice_combine examples") {
  const SymTensor3d t1 = SymTensor3d::rank_one(e(2, 0));
  CHECK(slice_combine(t1, e(2, 0)).isApprox(e(2, 0) * e(2, 0).transpose()));
  CHECK(slice_combine(t1, e(2, 1)).isZero());
  SymTensor3d t2 = t1;
  t2.add_rank_one(e(2, 1), 2.0);
  CHECK(slice_combine(t2, Eigen::Vector2d(1, 1)).isApprox(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix()));
}

TEST_CASE("contract examples") {
  std::mt19937_64 rng(89);
  const SymTensor3d t = random_symmetric(3, rng);
  CHECK((contract(t, Eigen::MatrixXd::Identity(3, 3)) - t).frobenius_norm() <= 1e-14);
  SymTensor3d scaled = t;
  scaled *= 8.0;
  CHECK((contract(t, 2.0 * Eigen::MatrixXd::Identity(3, 3)) - scaled).frobenius_norm() <= 1e-13);

  std::normal_distribution<double> g;
  Eigen::VectorXd v(3);
  for (auto& x : v) x = g(rng);
  Eigen::MatrixXd gm(3, 3);
  for (auto& x : gm.reshaped()) x = g(rng);
  const SymTensor3d rot = contract(SymTensor3d::rank_one(v), gm);
  CHECK((rot - SymTensor3d::rank_one(Eigen::VectorXd(gm * v))).frobenius_norm() <= 1e-12 * rot.frobenius_norm());
  CHECK((rot - six_loops(SymTensor3d::rank_one(v), gm)).frobenius_norm() <= 1e-12 * rot.frobenius_norm());

  Eigen::MatrixXd rect(2, 3);
  for (auto& x : rect.reshaped()) x = g(rng);
  CHECK((contract(t, rect) - six_loops(t, rect)).frobenius_norm() <= 1e-12 * t.frobenius_norm());
}

TEST_CASE("contracting with G then G^-1 is the identity") {
  std::mt19937_64 rng(97);
  std::normal_distribution<double> g;
  for (int n = 2; n <= 5; ++n) {
    const SymTensor3d t = random_symmetric(n, rng);
    Eigen::MatrixXd gm = Eigen::MatrixXd::Identity(n, n);
    for (auto& x : gm.reshaped()) x += 0.3 * g(rng);
    const SymTensor3d back = contract(contract(t, gm), Eigen::MatrixXd(gm.inverse()));
    CHECK((back - t).frobenius_norm() <= 1e-9 * t.frobenius_norm());
  }
}

TEST_CASE("find_separating_vector examples") {
  SymTensor3d t = SymTensor3d::rank_one(e(2, 0));
  t.add_rank_one(e(2, 1));
  CHECK(is_separating(t, Eigen::Vector2d(1, 1) / std::sqrt(2.0)));
  CHECK_FALSE(is_separating(t, Eigen::Vector2d(1, -1) / std::sqrt(2.0)));
  const auto sep = find_separating_vector(t, 10, 1);
  CHECK(sep.eigenvalues.minCoeff() > 0);
  CHECK(sep.x.norm() == doctest::Approx(1.0));

  // a single negative component is handled by the sign flip
  const auto neg = find_separating_vector(SymTensor3d::rank_one(e(1, 0), -1.0), 10, 1);
  CHECK(neg.x(0) < 0);

  // e1^3 - e2^3 is separated by (1, -1): an odd power absorbs the sign
  SymTensor3d mixed = SymTensor3d::rank_one(e(2, 0));
  mixed.add_rank_one(e(2, 1), -1.0);
  CHECK(is_separating(mixed, Eigen::Vector2d(1, -1) / std::sqrt(2.0)));

  // x^3 - 3 x y^2 has a trace-free slice for every x, so nothing is positive definite
  CHECK_THROWS_AS(find_separating_vector(harmonic_cubic(), 50, 1), NumericalError);
}

TEST_CASE("separating vectors are found when the positive cone is thin") {
  // random draws land in the cone {x : x . u_i > 0} with probability ~4e-5 here
  const Instance in = random_instance(4, 4, 4003);
  const auto sep = find_separating_vector(in.t, 200, 3);
  CHECK(is_separating(in.t, sep.x));
}

TEST_CASE("jennrich examples") {
  SymTensor3d t = SymTensor3d::rank_one(e(2, 0));
  t.add_rank_one(e(2, 1), 2.0);
  const auto res = jennrich(t, 2, 7);
  REQUIRE(res.components.size() == 2);
  CHECK(res.components[0].weight == doctest::Approx(2.0));
  CHECK(res.components[0].vector.isApprox(e(2, 1)));
  CHECK(res.components[1].weight == doctest::Approx(1.0));
  CHECK(res.components[1].vector.isApprox(e(2, 0)));
  CHECK(res.residual < 1e-10);

  const Eigen::MatrixXd q = haar_orthogonal_block(3, 3, 5);
  SymTensor3d rot(3);
  std::vector<Eigen::VectorXd> u;
  for (int i = 0; i < 3; ++i) {
    u.push_back(q.row(i).transpose());
    rot.add_rank_one(u.back());
  }
  const auto rr = jennrich(rot, 3, 11);
  CHECK(component_error(rr, {1.0, 1.0, 1.0}, u) <= 1e-8);
}

TEST_CASE("a negative weight becomes a flipped vector") {
  SymTensor3d mixed = SymTensor3d::rank_one(e(2, 0));
  mixed.add_rank_one(e(2, 1), -1.0);
  const auto res = jennrich(mixed, 2, 1);
  CHECK(component_error(res, {1.0, 1.0}, {e(2, 0), Eigen::VectorXd(-e(2, 1))}) <= 1e-10);
}

TEST_CASE("jennrich perturbation response on the rotated r = 3 instance") {
  const Eigen::MatrixXd q = haar_orthogonal_block(3, 3, 5);
  SymTensor3d rot(3);
  std::vector<Eigen::VectorXd> u;
  for (int i = 0; i < 3; ++i) {
    u.push_back(q.row(i).transpose());
    rot.add_rank_one(u.back());
  }
  std::mt19937_64 rng(101);
  SymTensor3d noise = random_symmetric(3, rng);
  noise *= 1e-4 * rot.frobenius_norm() / noise.frobenius_norm();
  SymTensor3d noisy = rot;
  noisy += noise;
  const auto res = jennrich(noisy, 3, 11);
  CHECK(component_error(res, {1.0, 1.0, 1.0}, u) <= 1e-2);
}

TEST_CASE("jennrich recovers exact rank-r tensors") {
  for (int r = 1; r <= 5; ++r) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const Instance in = random_instance(r, r, 1000 * r + s);
      const auto res = jennrich(in.t, r, s);
      CHECK(res.relative_residual <= 1e-8);
      CHECK(res.whitened_orthogonality <= 1e-8);
      CHECK(component_error(res, in.w, in.u) <= 1e-8);
      for (const auto& c : res.components) CHECK(c.weight > 0);
      for (std::size_t c = 1; c < res.components.size(); ++c)
        CHECK(res.components[c - 1].weight >= res.components[c].weight);
    }
  }
  // rank below the dimension
  const Instance low = random_instance(4, 2, 77);
  const auto res = jennrich(low.t, 2, 3);
  CHECK(res.relative_residual <= 1e-8);
  CHECK(component_error(res, low.w, low.u) <= 1e-8);
}

TEST_CASE("jennrich is deterministic") {
  const Instance in = random_instance(4, 4, 5);
  const auto a = jennrich(in.t, 4, 9);
  const auto b = jennrich(in.t, 4, 9);
  REQUIRE(a.components.size() == b.components.size());
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    CHECK(a.components[i].weight == b.components[i].weight);
    CHECK(a.components[i].vector == b.components[i].vector);
  }
  CHECK(a.residual == b.residual);
}

TEST_CASE("jennrich failure modes") {
  CHECK_THROWS_AS(jennrich(SymTensor3d(3), 2, 1), NumericalError);
  CHECK_THROWS_AS(jennrich(harmonic_cubic(), 2, 1), NumericalError);
  // a generic tensor is far from rank 2 in dimension 3
  std::mt19937_64 rng(103);
  CHECK_THROWS_AS(jennrich(random_symmetric(3, rng), 2, 1), NumericalError);
}

TEST_CASE("tensor storage and JSON") {
  std::mt19937_64 rng(107);
  const SymTensor3d t = random_symmetric(3, rng);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(t(i, j, k) == t(j, i, k));
        CHECK(t(i, j, k) == t(k, j, i));
      }
  const SymTensor3d back = tensor_from_json(to_json(t));
  CHECK(back.flat() == t.flat());
  std::vector<double> flat(8, 0.0);
  flat[1] = 1.0;  // (0, 0, 1) without its permutations
  CHECK_THROWS_AS(SymTensor3d::from_flat(2, flat), ValidationError);
  CHECK_THROWS_AS(SymTensor3d::from_flat(2, std::vector<double>(7, 0.0)), ValidationError);
}
