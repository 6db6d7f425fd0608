#include "kgsa/metric.hpp"

#include <algorithm>
#include <cmath>

namespace kgsa {

StationaryMetric::StationaryMetric(ScalarField lapse, VectorField shift, SymMetricField spatial,
                                   Box domain)
    : domain_(domain) {
  jets_ = [lapse, shift, spatial](const Point3& p) {
    return MetricJets{lapse.jet(p), shift.jets(p), spatial.jets(p)};
  };
  values_ = [lapse, shift, spatial](const Point3& p) {
    return MetricValues{lapse.value(p), shift.values(p), spatial.value(p)};
  };
}

StationaryMetric::StationaryMetric(JetFn jets, ValueFn values, Box domain)
    : jets_(std::move(jets)), values_(std::move(values)), domain_(domain) {
  if (!values_) {
    values_ = [j = jets_](const Point3& p) {
      const MetricJets m = j(p);
      return MetricValues{m.lapse.value,
                          {m.shift[0].value, m.shift[1].value, m.shift[2].value},
                          kgsa::values(m.spatial)};
    };
  }
}

StationaryMetric StationaryMetric::minkowski(Box domain) {
  return StationaryMetric(
      ScalarField::constant(1.0),
      VectorField{{ScalarField::constant(0.0), ScalarField::constant(0.0),
                   ScalarField::constant(0.0)}},
      SymMetricField::identity(), domain);
}

StationaryMetric StationaryMetric::with_domain(const Box& domain) const {
  StationaryMetric m = *this;
  m.domain_ = domain;
  return m;
}

ScalarField StationaryMetric::lapse() const {
  return ScalarField([f = jets_](const Point3& p) { return f(p).lapse; },
                     [f = values_](const Point3& p) { return f(p).lapse; }, domain_);
}

VectorField StationaryMetric::shift() const {
  VectorField v;
  for (int i = 0; i < 3; ++i) {
    v.components[i] = ScalarField([f = jets_, i](const Point3& p) { return f(p).shift[i]; },
                                  [f = values_, i](const Point3& p) { return f(p).shift[i]; },
                                  domain_);
  }
  return v;
}

SymMetricField StationaryMetric::spatial() const {
  return SymMetricField([f = jets_](const Point3& p) { return f(p).spatial; },
                        [f = values_](const Point3& p) { return f(p).spatial; });
}

// ---------------------------------------------------------------------------

template <class T>
Blocks<T> compute_blocks(const T& lapse, const Vec3T<T>& shift, const Sym3<T>& spatial,
                         const Point3& where, bool require_timelike) {
  using std::abs;
  using std::sqrt;
  Sym3<double> gv;
  for (int k = 0; k < 6; ++k) gv[k] = value_of(spatial[k]);
  if (!is_positive_definite(gv)) throw DegenerateError("spatial metric not positive definite", where);
  if (!(value_of(lapse) > 0.0)) throw DegenerateError("lapse not positive", where);

  Blocks<T> b;
  b.lapse = lapse;
  b.spatial = spatial;
  b.shift_up = shift;
  b.shift_down = mul(spatial, shift);
  b.shift_norm2 = dot(b.shift_down, shift);
  const T n2 = lapse * lapse;
  b.margin = n2 - b.shift_norm2;
  b.g00 = -b.margin;
  const double margin = value_of(b.margin);
  if (require_timelike ? margin < kDegenerateMargin : std::abs(margin) < kDegenerateMargin) {
    throw DegenerateError("Killing field not timelike (N^2 - N_i N^i = " + std::to_string(margin) + ")",
                          where);
  }

  const T det_g3 = det3(spatial);
  b.spatial_inv = inverse3(spatial, det_g3);
  const T inv_n2 = T(1.0) / n2;
  const T inv_margin = T(1.0) / b.margin;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const int k = sym_index(i, j);
      b.h_upper[k] = b.spatial_inv[k] - inv_n2 * shift[i] * shift[j];
      b.h_lower[k] = spatial[k] + b.shift_down[i] * b.shift_down[j] * inv_margin;
    }

  b.det_h3 = det3(b.h_lower);
  if (std::abs(value_of(b.det_h3)) < kDegenerateDeterminant)
    throw DegenerateError("degenerate h_ij (|det h| below threshold)", where);
  const PivotedLU<T, 4> lu(assemble_block4(b.g00, b.shift_down, spatial));
  if (lu.singular) throw DegenerateError("singular spacetime metric", where);
  b.det_g4 = lu.determinant();
  b.rho = sqrt(abs(b.det_g4) / abs(b.det_h3));
  return b;
}

template Blocks<double> compute_blocks(const double&, const Vec3T<double>&, const Sym3<double>&,
                                       const Point3&, bool);
template Blocks<Jet2> compute_blocks(const Jet2&, const Vec3T<Jet2>&, const SymJet&,
                                     const Point3&, bool);

Blocks<Jet2> block_jets(const StationaryMetric& metric, const Point3& p, bool require_timelike) {
  const MetricJets m = metric.jets(p);
  return compute_blocks<Jet2>(m.lapse, m.shift, m.spatial, p, require_timelike);
}

namespace {

Blocks<double> block_values(const StationaryMetric& metric, const Point3& p,
                            bool require_timelike = true) {
  const MetricValues m = metric.values(p);
  return compute_blocks<double>(m.lapse, m.shift, m.spatial, p, require_timelike);
}

}  // namespace

PointBlocks point_blocks(const StationaryMetric& metric, const Point3& p) {
  const Blocks<double> b = block_values(metric, p);
  PointBlocks out;
  out.g00 = b.g00;
  out.g0i = b.shift_down;
  out.h_upper = b.h_upper;
  out.h_lower = b.h_lower;
  out.rho = b.rho;
  out.det_g4 = b.det_g4;
  out.det_h3 = b.det_h3;
  return out;
}

Mat4<double> covariant_metric(const StationaryMetric& metric, const Point3& p) {
  const MetricValues m = metric.values(p);
  const auto down = mul(m.spatial, m.shift);
  const double g00 = -m.lapse * m.lapse + dot(down, m.shift);
  return assemble_block4(g00, down, m.spatial);
}

DeterminantIdentityReport verify_determinant_identity(const StationaryMetric& metric,
                                                      std::span<const Point3> points) {
  DeterminantIdentityReport r;
  for (const Point3& p : points) {
    const Blocks<double> b = block_values(metric, p, /*require_timelike=*/false);
    const double rhs = std::abs(b.det_g4) / std::abs(b.g00);
    const double res = std::abs(std::abs(b.det_h3) - rhs) / std::abs(b.det_h3);
    if (res >= r.max_residual) {
      r.max_residual = res;
      r.worst_point = p;
    }
    ++r.samples;
  }
  return r;
}

RhoDiagnostics rho_diagnostics(const StationaryMetric& metric, const Point3& p) {
  const Blocks<double> b = block_values(metric, p);
  RhoDiagnostics d;
  d.rho = b.rho;
  d.consistency_residual =
      std::abs(b.rho * b.rho * std::abs(b.det_h3) - std::abs(b.det_g4)) / std::abs(b.det_g4);
  d.sqrt_g00_residual = std::abs(b.rho - std::sqrt(std::abs(b.g00))) / b.rho;
  d.sqrt_inverse_g00_residual = std::abs(b.rho - std::sqrt(std::abs(1.0 / b.g00))) / b.rho;
  return d;
}

TimelikeReport check_assumption_timelike(const StationaryMetric& metric, const SampleGrid& grid) {
  TimelikeReport r;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const MetricValues m = metric.values(p);
    const auto down = mul(m.spatial, m.shift);
    const double norm2 = dot(down, m.shift);
    const double margin = m.lapse * m.lapse - norm2;
    const double g00 = -m.lapse * m.lapse + norm2;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_point = p;
    }
    if (!(margin > 0.0)) {
      r.killing_timelike = false;
      ++r.violations;
      if (!r.first_violation) r.first_violation = p;
    }
    if (!(g00 < 0.0)) r.g00_negative_everywhere = false;
    ++r.nodes;
  }
  return r;
}

AssumptionReport estimate_bounds(const StationaryMetric& metric, const SampleGrid& grid,
                                 const std::optional<SymMetricField>& reference) {
  AssumptionReport r;
  r.grid = grid;
  r.timelike = check_assumption_timelike(metric, grid);
  r.alpha_b = INFINITY;
  r.alpha_c = -INFINITY;
  r.equivalence_a = INFINITY;
  r.equivalence_d = -INFINITY;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const MetricValues m = metric.values(p);
    r.alpha_b = std::min(r.alpha_b, m.lapse);
    r.alpha_c = std::max(r.alpha_c, m.lapse);
    r.shift_norm_bound = std::max(r.shift_norm_bound, dot(mul(m.spatial, m.shift), m.shift));
    if (reference) {
      const Sym3<double> ref = reference->value(p);
      if (!is_positive_definite(ref)) throw DegenerateError("reference metric not positive definite", p);
      const auto [lo, hi] = generalized_eigen_range(m.spatial, ref);
      r.equivalence_a = std::min(r.equivalence_a, lo);
      r.equivalence_d = std::max(r.equivalence_d, hi);
    }
  }
  if (!reference) {
    r.equivalence_a = 1.0;
    r.equivalence_d = 1.0;
  }
  return r;
}

SymMetricField h_lower_field(const StationaryMetric& metric) {
  return SymMetricField([metric](const Point3& p) { return block_jets(metric, p).h_lower; },
                        [metric](const Point3& p) { return block_values(metric, p).h_lower; });
}

ScalarField density_field(const StationaryMetric& metric) {
  return ScalarField([metric](const Point3& p) { return block_jets(metric, p).rho; },
                     [metric](const Point3& p) { return block_values(metric, p).rho; },
                     metric.domain());
}

SymMetricField conformal_spatial_field(const StationaryMetric& metric) {
  return SymMetricField(
      [metric](const Point3& p) {
        const MetricJets m = metric.jets(p);
        return scaled(m.spatial, Jet2(1.0) / (m.lapse * m.lapse));
      },
      [metric](const Point3& p) {
        const MetricValues m = metric.values(p);
        return scaled(m.spatial, 1.0 / (m.lapse * m.lapse));
      });
}

}  // namespace kgsa
