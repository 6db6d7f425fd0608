#pragma once

// Kerr family in Boyer-Lindquist coordinates (r, theta, phi), the ergoregion,
// azimuthal mode operators and the auxiliary diagonal metrics used for
// completeness arguments.

#include <cmath>
#include <complex>

#include "kgsa/kgop.hpp"

namespace kgsa {

struct KerrParams {
  double M = 1.0;
  double a = 0.0;

  /// Throws Error unless M > 0 and M^2 >= a^2.
  void validate() const;
  /// Outer horizon M + sqrt(M^2 - a^2).
  double r_plus() const;
};

template <class T>
struct KerrScalars {
  T U;       // r^2 + a^2 cos^2
  T Delta;   // r^2 - 2 M r + a^2
  T sigma2;  // (r^2 + a^2) U + 2 M r a^2 sin^2
};

template <class T>
KerrScalars<T> kerr_scalars(const KerrParams& k, const T& r, const T& theta) {
  using std::cos;
  using std::sin;
  const T c = cos(theta);
  const T s = sin(theta);
  const T r2 = r * r;
  const T U = r2 + k.a * k.a * c * c;
  const T Delta = r2 - 2.0 * k.M * r + k.a * k.a;
  const T sigma2 = (r2 + k.a * k.a) * U + 2.0 * k.M * r * k.a * k.a * s * s;
  return {U, Delta, sigma2};
}

/// Covariant components in (t, r, theta, phi) order, obtained by expanding
///   -(Delta/U)(dt - a sin^2 dphi)^2 + U(dr^2/Delta + dtheta^2)
///     + (sin^2/U)(a dt - (r^2+a^2) dphi)^2.
template <class T>
Mat4<T> kerr_covariant(const KerrParams& k, const T& r, const T& theta) {
  using std::sin;
  const KerrScalars<T> q = kerr_scalars(k, r, theta);
  const T s2 = sin(theta) * sin(theta);
  const T ra = r * r + k.a * k.a;
  // one-form coefficients: e1 = dt - a s2 dphi, e2 = a dt - ra dphi
  const T e1t(1.0), e1p = -k.a * s2;
  const T e2t(k.a), e2p = -ra;
  const T c1 = -q.Delta / q.U;
  const T c2 = s2 / q.U;
  Mat4<T> g{};
  for (auto& row : g) row.fill(T(0.0));
  g[0][0] = c1 * e1t * e1t + c2 * e2t * e2t;
  g[0][3] = c1 * e1t * e1p + c2 * e2t * e2p;
  g[3][0] = g[0][3];
  g[3][3] = c1 * e1p * e1p + c2 * e2p * e2p;
  g[1][1] = q.U / q.Delta;
  g[2][2] = q.U;
  return g;
}

/// Throws Error if the chart touches r <= r_+ or the axis.
void validate_kerr_chart(const KerrParams& params, const Box& chart);

/// Kerr metric with lapse and shift taken from the 4x4 inverse:
/// N^2 = -1/g^00, N^i = -g^0i/g^00, g_ij the spatial block.
StationaryMetric kerr_metric(const KerrParams& params, const Box& chart);

enum class ErgoClass { outside, inside, on_surface };
const char* to_string(ErgoClass c);

struct ErgoResult {
  ErgoClass region = ErgoClass::outside;
  double value = 0.0;  // r^2 - 2 M r + a^2 cos^2
  double g00 = 0.0;    // from the metric blocks
  bool consistent = true;
};

inline constexpr double kErgoBand = 1e-10;

ErgoResult ergoregion_test(const KerrParams& params, const Point3& p, double band = kErgoBand);

struct LapseDiagnostics {
  double lapse = 0.0;              // sqrt(-1/g^00)
  double squared_residual = 0.0;   // |N^2 - Delta U / sigma^2| / N^2
  double unsquared_residual = 0.0; // |N - Delta U / sigma^2| / N
};

LapseDiagnostics lapse_diagnostics(const KerrParams& params, const Point3& p);

/// The k-th azimuthal sector of w^2 for the Kerr metric, acting on functions
/// u(r, theta) through e^{ik phi} w^2 e^{-ik phi}.
class ModeOperator {
 public:
  ModeOperator(KerrParams params, int k, ScalarField m2, Box chart);

  const KerrParams& params() const { return params_; }
  int k() const { return k_; }
  const Box& chart() const { return chart_; }
  const StationaryMetric& metric() const { return op_.metric(); }
  const SpatialOperator& spatial_operator() const { return op_; }
  const ScalarField& potential() const { return op_.potential(); }
  /// (N^-2 g, N^-2 mu_g): its weighted Laplacian is N^2 Delta_{mu,g}.
  const WeightedManifold& reduced() const { return reduced_; }

  /// Closed form k N^3.
  double beta(const Point3& p) const;
  /// 2 k |N^phi|, whose square over four is the sector's negative part.
  double beta_comparison(const Point3& p) const;
  /// k^2 (N^2 g^phiphi - (N^phi)^2) + V, the zeroth-order coefficient of the sector.
  double sector_potential(const Point3& p) const;

 private:
  KerrParams params_;
  int k_;
  Box chart_;
  SpatialOperator op_;
  WeightedManifold reduced_;
};

ModeOperator mode_operator(const KerrParams& params, int k, const ScalarField& m2, const Box& chart);

/// e^{ik phi} w^2 (e^{-ik phi} u) at p, with w^2 in its kerr_mode form.
/// u is treated as a function of (r, theta) only.
std::complex<double> apply_mode(const ModeOperator& op, const ScalarField& u, const Point3& p);

/// Same sector operator written out as
///   -N^2 Delta^{(r,theta)}_{mu,g} u + sector_potential u.
double apply_mode_sector(const ModeOperator& op, const ScalarField& u, const Point3& p);

/// -Delta_{mu~,g~} - beta^2/4 + V with beta = k N^3, Delta~ applied in the sector.
double apply_mode_closed_form(const ModeOperator& op, const ScalarField& u, const Point3& p);

struct ConjugationCheck {
  std::complex<double> first;
  std::complex<double> second;
  double phi_residual = 0.0;   // |first - second| / scale
  double imag_residual = 0.0;  // max |Im| / scale
  double scale = 0.0;
};

/// Evaluates apply_mode at (r, theta, phi1) and (r, theta, phi2).
ConjugationCheck conjugation_check(const ModeOperator& op, const ScalarField& u, const Point3& p,
                                   double phi2);

/// diag(sigma^2/Delta^2, sigma^2/Delta, sigma^2 sin^2/Delta).
SymMetricField hat_metric(const KerrParams& params);
/// diag(r^4/Delta^2, r^4/Delta, r^4 sin^2/Delta).
SymMetricField hat_metric_warped(const KerrParams& params);

/// |sigma^2/U^2 - (1 + a^2 sin^2/U + 2 M r a^2 sin^2/U^2)| / (sigma^2/U^2).
double sigma_ratio_identity_residual(const KerrParams& params, double r, double theta);

}  // namespace kgsa
