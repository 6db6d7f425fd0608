#include "kgsa/weighted.hpp"

#include <cmath>

#include "kgsa/linalg.hpp"

namespace kgsa {

WeightedManifold::WeightedManifold(SymMetricField metric, ScalarField density, Box domain)
    : metric_(std::move(metric)), density_(std::move(density)), domain_(domain) {}

namespace {

void require_nondegenerate(const Sym3<double>& h, double rho, const Point3& p) {
  if (!is_positive_definite(h)) throw DegenerateError("weighted manifold metric not positive definite", p);
  if (!(rho > 0.0)) throw DegenerateError("weighted manifold density not positive", p);
}

}  // namespace

double apply_weighted_laplacian(const WeightedManifold& wm, const Jet2& f, const Point3& p) {
  const SymJet h = wm.metric().jets(p);
  const Jet2 rho = wm.density().jet(p);
  require_nondegenerate(values(h), rho.value, p);

  const Jet2 det = det3(h);
  const SymJet inv = inverse3(h, det);
  const Jet2 weight = rho * sqrt(det);

  // h^ij d_i d_j f + (d_i (W h^ij) / W) d_j f
  double result = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) result += at(inv, i, j).value * f.dd(i, j);
  for (int j = 0; j < 3; ++j) {
    double div = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Jet2 c = weight * at(inv, i, j);
      div += c.grad[i];
    }
    result += div / weight.value * f.grad[j];
  }
  return result;
}

double apply_weighted_laplacian(const WeightedManifold& wm, const ScalarField& f, const Point3& p) {
  return apply_weighted_laplacian(wm, f.jet(p), p);
}

double measure_density(const WeightedManifold& wm, const Point3& p) {
  const Sym3<double> h = wm.metric().value(p);
  const double rho = wm.density().value(p);
  require_nondegenerate(h, rho, p);
  return rho * std::sqrt(det3(h));
}

FluxCoefficients flux_coefficients(const WeightedManifold& wm, const Point3& p) {
  const Sym3<double> h = wm.metric().value(p);
  const double rho = wm.density().value(p);
  require_nondegenerate(h, rho, p);
  const double det = det3(h);
  FluxCoefficients c;
  c.weight = rho * std::sqrt(det);
  c.flux = scaled(inverse3(h, det), c.weight);
  return c;
}

WeightedManifold conformal_rescale(const WeightedManifold& wm, const ScalarField& alpha,
                                   const std::optional<SampleGrid>& check_grid) {
  if (check_grid) {
    for (std::size_t n = 0; n < check_grid->size(); ++n) {
      const Point3 p = check_grid->node(n);
      if (!(alpha.value(p) > 0.0)) throw DegenerateError("conformal factor not positive", p);
    }
  }
  auto checked = [](double a, const Point3& p) {
    if (!(a > 0.0)) throw DegenerateError("conformal factor not positive", p);
  };
  const SymMetricField base_metric = wm.metric();
  const ScalarField base_density = wm.density();
  SymMetricField metric(
      [base_metric, alpha, checked](const Point3& p) {
        const Jet2 a = alpha.jet(p);
        checked(a.value, p);
        return scaled(base_metric.jets(p), a);
      },
      [base_metric, alpha, checked](const Point3& p) {
        const double a = alpha.value(p);
        checked(a, p);
        return scaled(base_metric.value(p), a);
      });
  ScalarField density(
      [base_density, alpha, checked](const Point3& p) {
        const Jet2 a = alpha.jet(p);
        checked(a.value, p);
        return base_density.jet(p) * pow(a, -0.5);
      },
      [base_density, alpha, checked](const Point3& p) {
        const double a = alpha.value(p);
        checked(a, p);
        return base_density.value(p) / std::sqrt(a);
      },
      wm.domain());
  return WeightedManifold(std::move(metric), std::move(density), wm.domain());
}

}  // namespace kgsa
