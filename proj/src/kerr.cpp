#include "kgsa/kerr.hpp"

#include <algorithm>
#include <cmath>

namespace kgsa {

void KerrParams::validate() const {
  if (!(M > 0.0)) throw Error("Kerr mass must be positive");
  if (!(M * M >= a * a)) throw Error("Kerr parameters must satisfy M^2 >= a^2");
}

double KerrParams::r_plus() const { return M + std::sqrt(M * M - a * a); }

void validate_kerr_chart(const KerrParams& params, const Box& chart) {
  params.validate();
  if (!(chart.lo[0] > params.r_plus()))
    throw Error("Kerr chart must satisfy r_min > r_+ = " + std::to_string(params.r_plus()));
  if (!(chart.hi[0] > chart.lo[0])) throw Error("Kerr chart has empty r range");
  if (!(chart.lo[1] > 0.0 && chart.hi[1] < M_PI && chart.hi[1] > chart.lo[1]))
    throw Error("Kerr chart must keep theta inside (0, pi)");
}

namespace {

template <class T>
struct KerrBlocks {
  T lapse;
  std::array<T, 3> shift;
  Sym3<T> spatial;
};

template <class T>
KerrBlocks<T> kerr_blocks(const KerrParams& k, const T& r, const T& theta, const Point3& where) {
  const Mat4<T> g = kerr_covariant(k, r, theta);
  const PivotedLU<T, 4> lu(g);
  if (lu.singular) throw DegenerateError("singular Kerr metric", where);
  const Mat4<T> inv = lu.inverse();
  const T ginv00 = inv[0][0];
  if (!(value_of(ginv00) < 0.0)) throw DegenerateError("g^00 is not negative", where);
  using std::sqrt;
  KerrBlocks<T> b;
  b.lapse = sqrt(-1.0 / ginv00);
  for (int i = 0; i < 3; ++i) b.shift[i] = -inv[0][i + 1] / ginv00;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) b.spatial[sym_index(i, j)] = g[i + 1][j + 1];
  return b;
}

}  // namespace

StationaryMetric kerr_metric(const KerrParams& params, const Box& chart) {
  validate_kerr_chart(params, chart);
  auto jets = [params](const Point3& p) {
    const KerrBlocks<Jet2> b =
        kerr_blocks(params, Jet2::variable(p[0], 0), Jet2::variable(p[1], 1), p);
    return MetricJets{b.lapse, b.shift, b.spatial};
  };
  auto values = [params](const Point3& p) {
    const KerrBlocks<double> b = kerr_blocks(params, p[0], p[1], p);
    return MetricValues{b.lapse, b.shift, b.spatial};
  };
  return StationaryMetric(jets, values, chart);
}

const char* to_string(ErgoClass c) {
  switch (c) {
    case ErgoClass::outside: return "outside";
    case ErgoClass::inside: return "inside";
    case ErgoClass::on_surface: return "on_surface";
  }
  return "?";
}

ErgoResult ergoregion_test(const KerrParams& params, const Point3& p, double band) {
  const double r = p[0];
  const double c = std::cos(p[1]);
  ErgoResult e;
  e.value = r * r - 2.0 * params.M * r + params.a * params.a * c * c;
  if (e.value > band)
    e.region = ErgoClass::outside;
  else if (e.value < -band)
    e.region = ErgoClass::inside;
  else
    e.region = ErgoClass::on_surface;

  // g_tt from the line element itself, so the test also works on the axis
  e.g00 = kerr_covariant(params, r, p[1])[0][0];
  const double g00_scale = 1.0 + 2.0 * params.M * r / kerr_scalars(params, r, p[1]).U;
  switch (e.region) {
    case ErgoClass::outside: e.consistent = e.g00 < 0.0; break;
    case ErgoClass::inside: e.consistent = e.g00 > 0.0; break;
    case ErgoClass::on_surface: e.consistent = std::abs(e.g00) <= 1e-8 * g00_scale; break;
  }
  return e;
}

LapseDiagnostics lapse_diagnostics(const KerrParams& params, const Point3& p) {
  const KerrBlocks<double> b = kerr_blocks(params, p[0], p[1], p);
  const KerrScalars<double> q = kerr_scalars(params, p[0], p[1]);
  const double printed = q.Delta * q.U / q.sigma2;
  LapseDiagnostics d;
  d.lapse = b.lapse;
  d.squared_residual = std::abs(b.lapse * b.lapse - printed) / (b.lapse * b.lapse);
  d.unsquared_residual = std::abs(b.lapse - printed) / b.lapse;
  return d;
}

ModeOperator::ModeOperator(KerrParams params, int k, ScalarField m2, Box chart)
    : params_(params),
      k_(k),
      chart_(chart),
      op_(assemble_w2(kerr_metric(params, chart), m2, std::nullopt, OperatorForm::kerr_mode)),
      reduced_(conformal_rescale(
          op_.spatial_manifold(),
          ScalarField(
              [lapse = op_.lapse()](const Point3& p) {
                const Jet2 n = lapse.jet(p);
                return Jet2(1.0) / (n * n);
              },
              {}, chart))) {}

double ModeOperator::beta(const Point3& p) const {
  const double n = op_.lapse().value(p);
  return k_ * n * n * n;
}

double ModeOperator::beta_comparison(const Point3& p) const {
  return 2.0 * std::abs(k_) * std::abs(op_.metric().values(p).shift[2]);
}

double ModeOperator::sector_potential(const Point3& p) const {
  const MetricValues m = op_.metric().values(p);
  const Sym3<double> inv = inverse3(m.spatial, det3(m.spatial));
  const double kk = static_cast<double>(k_) * k_;
  return kk * (m.lapse * m.lapse * at(inv, 2, 2) - m.shift[2] * m.shift[2]) +
         op_.potential().value(p);
}

ModeOperator mode_operator(const KerrParams& params, int k, const ScalarField& m2, const Box& chart) {
  return ModeOperator(params, k, m2, chart);
}

namespace {

// u(r, theta) with its phi derivatives dropped.
Jet2 axial_jet(const ScalarField& u, const Point3& p) {
  Jet2 j = u.jet(p);
  j.grad[2] = 0.0;
  j.hess[sym_index(0, 2)] = 0.0;
  j.hess[sym_index(1, 2)] = 0.0;
  j.hess[sym_index(2, 2)] = 0.0;
  return j;
}

template <class Apply>
std::complex<double> conjugate(int k, const Jet2& u, const Point3& p, Apply apply) {
  const Jet2 phase = Jet2(static_cast<double>(k)) * Jet2::variable(p[2], 2);
  const double re = apply(u * cos(phase));
  const double im = apply(-(u * sin(phase)));
  const std::complex<double> back(std::cos(phase.value), std::sin(phase.value));
  return back * std::complex<double>(re, im);
}

}  // namespace

std::complex<double> apply_mode(const ModeOperator& op, const ScalarField& u, const Point3& p) {
  return conjugate(op.k(), axial_jet(u, p), p,
                   [&](const Jet2& f) { return apply_w2(op.spatial_operator(), f, p); });
}

double apply_mode_sector(const ModeOperator& op, const ScalarField& u, const Point3& p) {
  const Jet2 uj = axial_jet(u, p);
  const double n = op.spatial_operator().lapse().value(p);
  return -n * n * apply_weighted_laplacian(op.spatial_operator().spatial_manifold(), uj, p) +
         op.sector_potential(p) * uj.value;
}

double apply_mode_closed_form(const ModeOperator& op, const ScalarField& u, const Point3& p) {
  const Jet2 uj = axial_jet(u, p);
  const std::complex<double> lap = conjugate(op.k(), uj, p, [&](const Jet2& f) {
    return -apply_weighted_laplacian(op.reduced(), f, p);
  });
  const double b = op.beta(p);
  return lap.real() + (-0.25 * b * b + op.potential().value(p)) * uj.value;
}

ConjugationCheck conjugation_check(const ModeOperator& op, const ScalarField& u, const Point3& p,
                                   double phi2) {
  ConjugationCheck c;
  c.first = apply_mode(op, u, p);
  c.second = apply_mode(op, u, {p[0], p[1], phi2});
  // Scale by the magnitude of the sector's individual terms so that a small
  // result does not inflate the relative residual.
  const Jet2 uj = axial_jet(u, p);
  const MetricValues m = op.metric().values(p);
  const Sym3<double> inv = inverse3(m.spatial, det3(m.spatial));
  double lap = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) lap += std::abs(at(inv, i, j) * uj.dd(i, j));
  lap += std::abs(uj.grad[0]) + std::abs(uj.grad[1]);
  const double kk = static_cast<double>(op.k()) * op.k();
  c.scale = m.lapse * m.lapse * lap +
            kk * (m.lapse * m.lapse * at(inv, 2, 2) + m.shift[2] * m.shift[2]) * std::abs(uj.value) +
            std::abs(op.potential().value(p) * uj.value);
  c.scale = std::max({c.scale, std::abs(c.first), std::abs(c.second)});
  c.phi_residual = std::abs(c.first - c.second) / c.scale;
  c.imag_residual = std::max(std::abs(c.first.imag()), std::abs(c.second.imag())) / c.scale;
  return c;
}

namespace {

SymMetricField diagonal_kerr(const KerrParams& params, bool warped) {
  auto make = [params, warped](const auto& r, const auto& theta) {
    using T = std::decay_t<decltype(r)>;
    using std::sin;
    const KerrScalars<T> q = kerr_scalars(params, r, theta);
    const T num = warped ? T(r * r * r * r) : q.sigma2;
    const T s = sin(theta);
    Sym3<T> g{};
    g.fill(T(0.0));
    g[sym_index(0, 0)] = num / (q.Delta * q.Delta);
    g[sym_index(1, 1)] = num / q.Delta;
    g[sym_index(2, 2)] = num * s * s / q.Delta;
    return g;
  };
  return SymMetricField(
      [make](const Point3& p) { return make(Jet2::variable(p[0], 0), Jet2::variable(p[1], 1)); },
      [make](const Point3& p) { return make(p[0], p[1]); });
}

}  // namespace

SymMetricField hat_metric(const KerrParams& params) { return diagonal_kerr(params, false); }
SymMetricField hat_metric_warped(const KerrParams& params) { return diagonal_kerr(params, true); }

double sigma_ratio_identity_residual(const KerrParams& params, double r, double theta) {
  const KerrScalars<double> q = kerr_scalars(params, r, theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  const double a2 = params.a * params.a;
  const double lhs = q.sigma2 / (q.U * q.U);
  const double rhs = 1.0 + a2 * s2 / q.U + 2.0 * params.M * r * a2 * s2 / (q.U * q.U);
  return std::abs(lhs - rhs) / lhs;
}

}  // namespace kgsa
