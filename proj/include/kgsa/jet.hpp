#pragma once

// Second-order forward-mode jets over three independent variables.

#include <array>
#include <cmath>

namespace kgsa {

/// Index of the (i, j) entry in packed symmetric 3x3 storage
/// (00, 01, 02, 11, 12, 22).
constexpr int sym_index(int i, int j) noexcept {
  if (i > j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i == 0 ? j : (i == 1 ? 2 + j : 5);
}

/// Value, gradient and Hessian of a scalar function of three variables.
/// The Hessian is stored packed, so it is symmetric exactly.
struct Jet2 {
  double value = 0.0;
  std::array<double, 3> grad{};
  std::array<double, 6> hess{};

  constexpr Jet2() = default;
  constexpr Jet2(double v) : value(v) {}  // NOLINT: constants promote implicitly

  static Jet2 variable(double v, int axis) {
    Jet2 j(v);
    j.grad[axis] = 1.0;
    return j;
  }

  double d(int i) const { return grad[i]; }
  double dd(int i, int j) const { return hess[sym_index(i, j)]; }
};

/// Applies a scalar function with known derivatives (f, f', f'') to a jet.
inline Jet2 chain(const Jet2& u, double f, double df, double ddf) {
  Jet2 r(f);
  for (int i = 0; i < 3; ++i) r.grad[i] = df * u.grad[i];
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      r.hess[sym_index(i, j)] =
          ddf * u.grad[i] * u.grad[j] + df * u.hess[sym_index(i, j)];
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(-a.value);
  for (int i = 0; i < 3; ++i) r.grad[i] = -a.grad[i];
  for (int i = 0; i < 6; ++i) r.hess[i] = -a.hess[i];
  return r;
}

inline Jet2& operator+=(Jet2& a, const Jet2& b) {
  a.value += b.value;
  for (int i = 0; i < 3; ++i) a.grad[i] += b.grad[i];
  for (int i = 0; i < 6; ++i) a.hess[i] += b.hess[i];
  return a;
}

inline Jet2& operator-=(Jet2& a, const Jet2& b) {
  a.value -= b.value;
  for (int i = 0; i < 3; ++i) a.grad[i] -= b.grad[i];
  for (int i = 0; i < 6; ++i) a.hess[i] -= b.hess[i];
  return a;
}

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.value * b.value);
  for (int i = 0; i < 3; ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const int k = sym_index(i, j);
      r.hess[k] = a.value * b.hess[k] + b.value * a.hess[k] +
                  a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
    }
  return r;
}

inline Jet2& operator*=(Jet2& a, const Jet2& b) { return a = a * b; }

inline Jet2 reciprocal(const Jet2& b) {
  const double inv = 1.0 / b.value;
  return chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }
inline Jet2& operator/=(Jet2& a, const Jet2& b) { return a = a / b; }

inline Jet2 sin(const Jet2& u) {
  const double s = std::sin(u.value);
  return chain(u, s, std::cos(u.value), -s);
}

inline Jet2 cos(const Jet2& u) {
  const double c = std::cos(u.value);
  return chain(u, c, -std::sin(u.value), -c);
}

inline Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.value);
  return chain(u, e, e, e);
}

/// Caller guarantees u.value > 0.
inline Jet2 log(const Jet2& u) {
  const double inv = 1.0 / u.value;
  return chain(u, std::log(u.value), inv, -inv * inv);
}

/// Caller guarantees u.value > 0.
inline Jet2 sqrt(const Jet2& u) {
  const double s = std::sqrt(u.value);
  return chain(u, s, 0.5 / s, -0.25 / (s * u.value));
}

/// Caller guarantees u.value != 0.
inline Jet2 abs(const Jet2& u) { return u.value < 0.0 ? -u : u; }

/// u^p for a constant exponent. Negative bases are allowed only for integral p.
inline Jet2 pow(const Jet2& u, double p) {
  if (p == 0.0) return Jet2(1.0);
  if (p == 1.0) return u;
  if (p == 2.0) return u * u;
  const double f = std::pow(u.value, p);
  const double df = p * std::pow(u.value, p - 1.0);
  const double ddf = p * (p - 1.0) * std::pow(u.value, p - 2.0);
  return chain(u, f, df, ddf);
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet2& x) { return x.value; }

}  // namespace kgsa
