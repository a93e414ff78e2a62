#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "momgen/error.hpp"

namespace momgen {

/// Fully symmetric dim x dim x dim tensor, dense storage.
template <typename Scalar>
class SymTensor3 {
 public:
  using Index = Eigen::Index;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymTensor3() = default;
  explicit SymTensor3(Index dim) : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), Scalar(0)) {}

  static SymTensor3 zero(Index dim) { return SymTensor3(dim); }

  /// weight * v (x) v (x) v
  template <typename Derived>
  static SymTensor3 rank_one(const Eigen::MatrixBase<Derived>& v, Scalar weight = Scalar(1)) {
    SymTensor3 t(v.size());
    t.add_rank_one(v, weight);
    return t;
  }

  /// Reads a flat row-major dim^3 array; rejects asymmetric input.
  static SymTensor3 from_flat(Index dim, const std::vector<Scalar>& flat, Scalar tol = Scalar(1e-12)) {
    if (static_cast<Index>(flat.size()) != dim * dim * dim)
      throw ValidationError("tensor data has wrong length for dim " + std::to_string(dim));
    SymTensor3 t(dim);
    t.data_ = flat;
    Scalar scale(0);
    for (const auto& x : flat) scale = std::max<Scalar>(scale, std::abs(x));
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        for (Index k = 0; k < dim; ++k) {
          const Scalar a = t(i, j, k);
          if (std::abs(a - t(j, i, k)) > tol * std::max<Scalar>(Scalar(1), scale) ||
              std::abs(a - t(i, k, j)) > tol * std::max<Scalar>(Scalar(1), scale))
            throw ValidationError("tensor data is not symmetric");
        }
    return t;
  }

  Index dim() const { return dim_; }
  const std::vector<Scalar>& flat() const { return data_; }

  const Scalar& operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  /// Writes all index permutations.
  void set(Index i, Index j, Index k, Scalar v) {
    const Index idx[3] = {i, j, k};
    static constexpr int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perm) data_[offset(idx[p[0]], idx[p[1]], idx[p[2]])] = v;
  }

  template <typename Derived>
  void add_rank_one(const Eigen::MatrixBase<Derived>& v, Scalar weight = Scalar(1)) {
    if (v.size() != dim_) throw ValidationError("rank-one vector has wrong length");
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j)
        for (Index k = 0; k < dim_; ++k) data_[offset(i, j, k)] += weight * v(i) * v(j) * v(k);
  }

  Scalar frobenius_norm() const {
    Scalar s(0);
    for (const auto& x : data_) s += x * x;
    return std::sqrt(s);
  }

  /// T(v, v, v)
  template <typename Derived>
  Scalar apply(const Eigen::MatrixBase<Derived>& v) const {
    Scalar s(0);
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j)
        for (Index k = 0; k < dim_; ++k) s += (*this)(i, j, k) * v(i) * v(j) * v(k);
    return s;
  }

  /// sum_t T[:, t, t]
  Vector trace_vector() const {
    Vector out = Vector::Zero(dim_);
    for (Index i = 0; i < dim_; ++i)
      for (Index t = 0; t < dim_; ++t) out(i) += (*this)(i, t, t);
    return out;
  }

  SymTensor3& operator+=(const SymTensor3& o) {
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  SymTensor3& operator*=(Scalar s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  friend SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
  friend SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
  friend SymTensor3 operator*(Scalar s, SymTensor3 a) { return a *= s; }

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * dim_ + j) * dim_ + k);
  }

  Index dim_ = 0;
  std::vector<Scalar> data_;
};

using SymTensor3d = SymTensor3<double>;

/// sum_i x_i T[i, :, :]
template <typename Scalar, typename Derived>
typename SymTensor3<Scalar>::Matrix slice_combine(const SymTensor3<Scalar>& t,
                                                  const Eigen::MatrixBase<Derived>& x) {
  using Matrix = typename SymTensor3<Scalar>::Matrix;
  const auto n = t.dim();
  if (x.size() != n) throw ValidationError("slice_combine: vector length mismatch");
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) m(a, b) += x(i) * t(i, a, b);
  return m;
}

/// T'_{ijk} = sum_{xyz} T_{xyz} G_{ix} G_{jy} G_{kz}; v^{(x)3} maps to (G v)^{(x)3}.
/// G may be rectangular (m x dim); the result has dimension m.
template <typename Scalar, typename Derived>
SymTensor3<Scalar> contract(const SymTensor3<Scalar>& t, const Eigen::MatrixBase<Derived>& g) {
  using Index = Eigen::Index;
  const Index n = t.dim();
  const Index m = g.rows();
  if (g.cols() != n) throw ValidationError("contract: matrix columns must equal tensor dimension");
  // one mode at a time: O(m n^3)
  std::vector<Scalar> a(static_cast<std::size_t>(m * n * n), Scalar(0));
  for (Index i = 0; i < m; ++i)
    for (Index x = 0; x < n; ++x) {
      const Scalar gix = g(i, x);
      if (gix == Scalar(0)) continue;
      for (Index y = 0; y < n; ++y)
        for (Index z = 0; z < n; ++z) a[static_cast<std::size_t>((i * n + y) * n + z)] += gix * t(x, y, z);
    }
  std::vector<Scalar> b(static_cast<std::size_t>(m * m * n), Scalar(0));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index y = 0; y < n; ++y) {
        const Scalar gjy = g(j, y);
        if (gjy == Scalar(0)) continue;
        for (Index z = 0; z < n; ++z)
          b[static_cast<std::size_t>((i * m + j) * n + z)] += gjy * a[static_cast<std::size_t>((i * n + y) * n + z)];
      }
  SymTensor3<Scalar> out(m);
  std::vector<Scalar> c(static_cast<std::size_t>(m * m * m), Scalar(0));
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k) {
        Scalar s(0);
        for (Index z = 0; z < n; ++z) s += g(k, z) * b[static_cast<std::size_t>((i * m + j) * n + z)];
        c[static_cast<std::size_t>((i * m + j) * m + k)] = s;
      }
  // symmetrise away rounding so the invariant holds exactly
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      for (Index k = j; k < m; ++k) {
        auto at = [&](Index u, Index v, Index w) { return c[static_cast<std::size_t>((u * m + v) * m + w)]; };
        const Scalar avg = (at(i, j, k) + at(i, k, j) + at(j, i, k) + at(j, k, i) + at(k, i, j) + at(k, j, i)) / Scalar(6);
        out.set(i, j, k, avg);
      }
  return out;
}

template <typename Scalar>
struct SymEig {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;                // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // columns, orthonormal
  int sweeps = 0;
};

/// Cyclic Jacobi with threshold sweeps.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive
/// (first such entry on ties). Throws NumericalError after `max_sweeps`.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& input, int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;
  const Index n = input.rows();
  if (input.cols() != n) throw ValidationError("sym_eig: matrix is not square");
  Matrix a = input;
  const Scalar norm = a.norm();
  if (n > 0 && (a - a.transpose()).norm() > Scalar(1e-10) * std::max(norm, Scalar(1e-300)))
    throw ValidationError("sym_eig: matrix is not symmetric");
  a = (a + a.transpose()) / Scalar(2);
  Matrix v = Matrix::Identity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    Scalar off(0);
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= eps * std::max(norm, Scalar(1e-300)) / Scalar(4)) break;
    // larger threshold during the first sweeps
    const Scalar thresh = sweep < 3 ? Scalar(0.2) * std::sqrt(off) / Scalar(n * n) : Scalar(0);
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (std::abs(apq) <= thresh) continue;
        const Scalar small = Scalar(100) * std::abs(apq);
        if (sweep > 3 && std::abs(a(p, p)) + small == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + small == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }
        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        const Scalar t = (theta >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;
        for (Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps) throw NumericalError("eig", "Jacobi eigensolver did not converge");

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) > a(y, y); });

  SymEig<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweep;
  for (Index c = 0; c < n; ++c) {
    const Index src = order[static_cast<std::size_t>(c)];
    out.values(c) = a(src, src);
    auto col = v.col(src);
    Index arg = 0;
    for (Index k = 1; k < n; ++k)
      if (std::abs(col(k)) > std::abs(col(arg)) * (Scalar(1) + Scalar(1e-12))) arg = k;
    out.vectors.col(c) = col(arg) < 0 ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(-col) : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(col);
  }
  return out;
}

struct SeparatingVector {
  Eigen::VectorXd x;
  Eigen::VectorXd eigenvalues;  // of slice_combine(T, x), descending
  int tries = 0;
};

/// True when slice_combine(T, x) has every eigenvalue above pd_tol * spectral radius.
bool is_separating(const SymTensor3d& t, const Eigen::VectorXd& x, double pd_tol = 1e-9,
                   Eigen::Index rank = -1);

/// Finds a unit x with slice_combine(T, x) positive definite on its leading
/// `rank` eigenvalues (rank < 0 means the full dimension). The first candidate
/// is the normalised trace vector sum_t T[:, t, t]; later ones are Gaussian draws.
/// A negative definite draw is accepted with its sign flipped.
SeparatingVector find_separating_vector(const SymTensor3d& t, int max_tries, std::uint64_t seed,
                                        double pd_tol = 1e-9, Eigen::Index rank = -1);

struct JennrichOptions {
  int max_tries_x = 200;
  int y_retries = 20;
  double pd_tol = 1e-9;
  double gap_tol = 1e-6;                 // relative to the spectral radius of T_y
  double max_relative_residual = 0.25;   // reconstruction error gate
};

struct TensorComponent {
  double weight = 0.0;     // > 0
  Eigen::VectorXd vector;  // unit length
};

struct DecompResult {
  std::vector<TensorComponent> components;  // descending weight
  double residual = 0.0;                    // ||sum w u^3 - T||_F
  double relative_residual = 0.0;
  double whitened_orthogonality = 0.0;      // max |<G^T u_i, G^T u_j>| over i != j (normalised)
  double min_eigengap = 0.0;
  int x_tries = 0;
  int y_tries = 0;
};

/// Symmetric decomposition T = sum_i w_i u_i^{(x)3} with positive weights by
/// whitening along a separating slice, diagonalising a second random slice of
/// the whitened tensor, and un-whitening.
DecompResult jennrich(const SymTensor3d& t, Eigen::Index r_target, std::uint64_t seed,
                      const JennrichOptions& opts = {});

}  // namespace momgen
