#pragma once

// Small dense linear algebra, templated over double and Jet2 so that the same
// code produces values and exact derivatives.

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "kgsa/jet.hpp"

namespace kgsa {

/// Packed symmetric 3x3 matrix (00, 01, 02, 11, 12, 22).
template <class T>
using Sym3 = std::array<T, 6>;

template <class T>
using Vec3T = std::array<T, 3>;

template <class T>
using Mat4 = std::array<std::array<T, 4>, 4>;

using SymJet = Sym3<Jet2>;

template <class T>
const T& at(const Sym3<T>& m, int i, int j) {
  return m[sym_index(i, j)];
}

template <class T>
T det3(const Sym3<T>& m) {
  const T& a = m[0];
  const T& b = m[1];
  const T& c = m[2];
  const T& d = m[3];
  const T& e = m[4];
  const T& f = m[5];
  return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

/// Inverse via the adjugate; caller checks the determinant.
template <class T>
Sym3<T> inverse3(const Sym3<T>& m, const T& det) {
  const T& a = m[0];
  const T& b = m[1];
  const T& c = m[2];
  const T& d = m[3];
  const T& e = m[4];
  const T& f = m[5];
  const T inv = T(1.0) / det;
  return {(d * f - e * e) * inv, (c * e - b * f) * inv, (b * e - c * d) * inv,
          (a * f - c * c) * inv, (b * c - a * e) * inv, (a * d - b * b) * inv};
}

template <class T>
Vec3T<T> mul(const Sym3<T>& m, const Vec3T<T>& v) {
  Vec3T<T> r;
  for (int i = 0; i < 3; ++i)
    r[i] = at(m, i, 0) * v[0] + at(m, i, 1) * v[1] + at(m, i, 2) * v[2];
  return r;
}

template <class T>
T dot(const Vec3T<T>& a, const Vec3T<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Sym3<T> scaled(const Sym3<T>& m, const T& s) {
  Sym3<T> r;
  for (int k = 0; k < 6; ++k) r[k] = m[k] * s;
  return r;
}

/// LU factorization with partial pivoting (row pivots chosen on values).
template <class T, int N>
struct PivotedLU {
  std::array<std::array<T, N>, N> lu;
  std::array<int, N> perm{};
  int sign = 1;
  bool singular = false;

  explicit PivotedLU(std::array<std::array<T, N>, N> a) : lu(std::move(a)) {
    for (int i = 0; i < N; ++i) perm[i] = i;
    for (int k = 0; k < N; ++k) {
      int p = k;
      double best = std::abs(value_of(lu[k][k]));
      for (int i = k + 1; i < N; ++i) {
        const double v = std::abs(value_of(lu[i][k]));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == 0.0) {
        singular = true;
        return;
      }
      if (p != k) {
        std::swap(lu[p], lu[k]);
        std::swap(perm[p], perm[k]);
        sign = -sign;
      }
      for (int i = k + 1; i < N; ++i) {
        lu[i][k] = lu[i][k] / lu[k][k];
        for (int j = k + 1; j < N; ++j) lu[i][j] = lu[i][j] - lu[i][k] * lu[k][j];
      }
    }
  }

  T determinant() const {
    if (singular) return T(0.0);
    T d(static_cast<double>(sign));
    for (int k = 0; k < N; ++k) d = d * lu[k][k];
    return d;
  }

  std::array<std::array<T, N>, N> inverse() const {
    std::array<std::array<T, N>, N> inv;
    for (int col = 0; col < N; ++col) {
      std::array<T, N> x;
      for (int i = 0; i < N; ++i) {
        T s(perm[i] == col ? 1.0 : 0.0);
        for (int j = 0; j < i; ++j) s = s - lu[i][j] * x[j];
        x[i] = s;
      }
      for (int i = N - 1; i >= 0; --i) {
        T s = x[i];
        for (int j = i + 1; j < N; ++j) s = s - lu[i][j] * x[j];
        x[i] = s / lu[i][i];
      }
      for (int i = 0; i < N; ++i) inv[i][col] = x[i];
    }
    return inv;
  }
};

template <class T>
Mat4<T> assemble_block4(const T& g00, const Vec3T<T>& g0i, const Sym3<T>& gij) {
  Mat4<T> m;
  m[0][0] = g00;
  for (int i = 0; i < 3; ++i) {
    m[0][i + 1] = g0i[i];
    m[i + 1][0] = g0i[i];
    for (int j = 0; j < 3; ++j) m[i + 1][j + 1] = at(gij, i, j);
  }
  return m;
}

inline Sym3<double> values(const SymJet& m) {
  Sym3<double> r;
  for (int k = 0; k < 6; ++k) r[k] = m[k].value;
  return r;
}

inline Eigen::Matrix3d to_eigen(const Sym3<double>& m) {
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = at(m, i, j);
  return r;
}

inline Sym3<double> from_eigen(const Eigen::Matrix3d& m) {
  return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)};
}

/// True iff the matrix admits a Cholesky factorization.
inline bool is_positive_definite(const Sym3<double>& m) {
  Eigen::LLT<Eigen::Matrix3d> llt(to_eigen(m));
  return llt.info() == Eigen::Success;
}

/// Extreme eigenvalues of A relative to B (B positive definite), computed by
/// Cholesky reduction of B followed by a symmetric eigensolve.
inline std::pair<double, double> generalized_eigen_range(const Sym3<double>& a,
                                                         const Sym3<double>& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(
      to_eigen(a), to_eigen(b), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  const auto& ev = es.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

inline double min_eigenvalue(const Sym3<double>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(m),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace kgsa
