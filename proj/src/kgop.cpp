#include "kgsa/kgop.hpp"

#include <cmath>

namespace kgsa {

const char* to_string(OperatorForm form) {
  switch (form) {
    case OperatorForm::raw: return "raw";
    case OperatorForm::reduced: return "reduced";
    case OperatorForm::kerr_mode: return "kerr_mode";
  }
  return "?";
}

namespace {

WeightedManifold base_manifold(const StationaryMetric& metric) {
  return WeightedManifold(h_lower_field(metric), density_field(metric), metric.domain());
}

WeightedManifold spatial_weighted_manifold(const StationaryMetric& metric) {
  auto rho_g = [metric](const Point3& p) {
    const MetricJets m = metric.jets(p);
    const Jet2 g00 = -(m.lapse * m.lapse) + dot(mul(m.spatial, m.shift), m.shift);
    const PivotedLU<Jet2, 4> lu(assemble_block4(g00, mul(m.spatial, m.shift), m.spatial));
    if (lu.singular) throw DegenerateError("singular spacetime metric", p);
    return sqrt(abs(lu.determinant()) / det3(m.spatial));
  };
  return WeightedManifold(metric.spatial(), ScalarField(rho_g, {}, metric.domain()),
                          metric.domain());
}

ScalarField inverse_lapse_squared(const ScalarField& lapse) {
  return ScalarField([lapse](const Point3& p) {
                       const Jet2 n = lapse.jet(p);
                       return Jet2(1.0) / (n * n);
                     },
                     [lapse](const Point3& p) {
                       const double n = lapse.value(p);
                       return 1.0 / (n * n);
                     },
                     lapse.domain());
}

}  // namespace

SpatialOperator::SpatialOperator(StationaryMetric metric, ScalarField m2, OperatorForm form)
    : metric_(metric),
      m2_(m2),
      lapse_(metric.lapse()),
      potential_(
          [lapse = metric.lapse(), m2](const Point3& p) {
            const Jet2 n = lapse.jet(p);
            return n * n * m2.jet(p);
          },
          [lapse = metric.lapse(), m2](const Point3& p) {
            const double n = lapse.value(p);
            return n * n * m2.value(p);
          },
          metric.domain()),
      base_(base_manifold(metric)),
      reduced_(conformal_rescale(base_, inverse_lapse_squared(lapse_))),
      spatial_(spatial_weighted_manifold(metric)),
      form_(form) {}

SpatialOperator SpatialOperator::with_form(OperatorForm form) const {
  SpatialOperator op = *this;
  op.form_ = form;
  return op;
}

SpatialOperator assemble_w2(const StationaryMetric& metric, const ScalarField& m2,
                            const std::optional<SampleGrid>& check_grid, OperatorForm form) {
  if (form != OperatorForm::kerr_mode) {
    std::optional<SampleGrid> grid = check_grid;
    if (!grid && metric.domain().bounded()) grid = SampleGrid{metric.domain(), {5, 5, 5}};
    if (grid) {
      const TimelikeReport t = check_assumption_timelike(metric, *grid);
      if (!t.killing_timelike) {
        throw HypothesisError("timelike_killing",
                              "N^2 - N_i N^i <= 0 (" + std::to_string(t.violations) + " of " +
                                  std::to_string(t.nodes) + " nodes)",
                              *t.first_violation);
      }
    }
  }
  return SpatialOperator(metric, m2, form);
}

double apply_w2(const SpatialOperator& op, const Jet2& u, const Point3& p) {
  const double v = op.potential().value(p);
  switch (op.form()) {
    case OperatorForm::raw: {
      const double n = op.lapse().value(p);
      return -n * n * apply_weighted_laplacian(op.base(), u, p) + v * u.value;
    }
    case OperatorForm::reduced:
      return -apply_weighted_laplacian(op.reduced(), u, p) + v * u.value;
    case OperatorForm::kerr_mode: {
      const MetricValues m = op.metric().values(p);
      double transport = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) transport += m.shift[i] * m.shift[j] * u.dd(i, j);
      return -m.lapse * m.lapse * apply_weighted_laplacian(op.spatial_manifold(), u, p) +
             transport + v * u.value;
    }
  }
  throw Error("unknown operator form");
}

double apply_w2(const SpatialOperator& op, const ScalarField& u, const Point3& p) {
  return apply_w2(op, u.jet(p), p);
}

namespace {

struct InverseJets {
  Mat4<Jet2> inverse;
  Jet2 sqrt_det;
};

InverseJets spacetime_inverse(const StationaryMetric& metric, const Point3& p) {
  const MetricJets m = metric.jets(p);
  const Vec3T<Jet2> down = mul(m.spatial, m.shift);
  const Jet2 g00 = -(m.lapse * m.lapse) + dot(down, m.shift);
  const PivotedLU<Jet2, 4> lu(assemble_block4(g00, down, m.spatial));
  if (lu.singular) throw DegenerateError("singular spacetime metric", p);
  return {lu.inverse(), sqrt(abs(lu.determinant()))};
}

}  // namespace

ReductionCheck verify_reduction(const SpatialOperator& op, const ScalarField& u, const Point3& p) {
  const InverseJets inv = spacetime_inverse(op.metric(), p);
  const Jet2 uj = u.jet(p);
  const double m2 = op.mass_squared().value(p);

  double principal = 0.0;
  double principal_scale = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double t = inv.inverse[i + 1][j + 1].value * uj.dd(i, j);
      principal += t;
      principal_scale += std::abs(t);
    }
  double first = 0.0;
  double first_scale = 0.0;
  for (int j = 0; j < 3; ++j) {
    double div = 0.0;
    for (int i = 0; i < 3; ++i) div += (inv.sqrt_det * inv.inverse[i + 1][j + 1]).grad[i];
    const double t = div / inv.sqrt_det.value * uj.grad[j];
    first += t;
    first_scale += std::abs(t);
  }
  const double g00_inv = 1.0 / inv.inverse[0][0].value;
  ReductionCheck c;
  c.direct = g00_inv * (principal + first - m2 * uj.value);
  c.assembled = apply_w2(op, uj, p);
  c.scale = std::abs(g00_inv) * (principal_scale + first_scale + std::abs(m2 * uj.value));
  const double diff = std::abs(c.direct - c.assembled);
  c.residual = c.scale > 0.0 ? diff / c.scale : diff;
  return c;
}

ReductionCheck verify_reduction(const StationaryMetric& metric, const ScalarField& m2,
                                const ScalarField& u, const Point3& p) {
  return verify_reduction(SpatialOperator(metric, m2, OperatorForm::raw), u, p);
}

FirstOrderTerms first_order_coefficient(const StationaryMetric& metric, const Point3& p,
                                        const ScalarField& u) {
  const InverseJets inv = spacetime_inverse(metric, p);
  const MetricJets m = metric.jets(p);
  const Jet2 uj = u.jet(p);
  const Jet2& g00 = inv.inverse[0][0];
  double div = 0.0;
  for (int i = 0; i < 3; ++i) div += (inv.sqrt_det * g00 * m.shift[i]).grad[i];
  FirstOrderTerms f;
  f.scalar_coefficient = -div / (g00.value * inv.sqrt_det.value);
  f.scalar_term = f.scalar_coefficient * uj.value;
  for (int i = 0; i < 3; ++i) f.transport_term -= 2.0 * m.shift[i].value * uj.grad[i];
  return f;
}

ScalarField random_test_field(const Box& support, std::mt19937_64& rng, std::array<bool, 3> active) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, 3> wave{};
  for (int a = 0; a < 3; ++a)
    if (active[a]) wave[a] = (unit(rng) * 4.0 - 2.0) * M_PI / support.extent(a);
  const double phase = unit(rng) * 2.0 * M_PI;
  const double offset = 0.5 + unit(rng);
  const double amplitude = 0.25 + 0.5 * unit(rng);

  auto jet = [support, active, wave, phase, offset, amplitude](const Point3& p) -> Jet2 {
    for (int a = 0; a < 3; ++a)
      if (active[a] && (p[a] < support.lo[a] || p[a] > support.hi[a])) return Jet2(0.0);
    Jet2 bump(1.0);
    Jet2 arg(phase);
    for (int a = 0; a < 3; ++a) {
      if (!active[a]) continue;
      const Jet2 x = Jet2::variable(p[a], a);
      const Jet2 s = (x - support.lo[a]) / support.extent(a);
      const Jet2 q = Jet2(4.0) * s * (Jet2(1.0) - s);
      bump *= q * q;
      arg += Jet2(wave[a]) * x;
    }
    return bump * (Jet2(offset) + Jet2(amplitude) * sin(arg));
  };
  return ScalarField(jet, {}, support);
}

Point3 random_point(const Box& box, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point3 p;
  for (int a = 0; a < 3; ++a) {
    const double lo = box.lo[a] + margin * box.extent(a);
    const double hi = box.hi[a] - margin * box.extent(a);
    p[a] = lo + (hi - lo) * unit(rng);
  }
  return p;
}

}  // namespace kgsa
