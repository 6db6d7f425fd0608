#pragma once

// Weighted manifolds (Sigma, h, mu) with dmu = rho sqrt|h| d^3x, and their
// weighted Laplace-Beltrami operator
//   Delta_{mu,h} f = (rho sqrt|h|)^-1 d_i (rho sqrt|h| h^ij d_j f).

#include <optional>

#include "kgsa/field.hpp"

namespace kgsa {

class WeightedManifold {
 public:
  WeightedManifold(SymMetricField metric, ScalarField density, Box domain = Box::unbounded());

  const SymMetricField& metric() const { return metric_; }
  const ScalarField& density() const { return density_; }
  const Box& domain() const { return domain_; }

 private:
  SymMetricField metric_;
  ScalarField density_;
  Box domain_;
};

/// Throws DegenerateError if the metric is not positive definite or the
/// density is not positive at `p`.
double apply_weighted_laplacian(const WeightedManifold& wm, const ScalarField& f, const Point3& p);

/// Same, with the jet of f supplied directly.
double apply_weighted_laplacian(const WeightedManifold& wm, const Jet2& f, const Point3& p);

/// rho sqrt|h|, the density of mu against coordinate volume.
double measure_density(const WeightedManifold& wm, const Point3& p);

/// Coefficients of the flux form at a point: weight W = rho sqrt|h| and
/// flux tensor K^ij = W h^ij.
struct FluxCoefficients {
  double weight = 0.0;
  Sym3<double> flux{};
};

FluxCoefficients flux_coefficients(const WeightedManifold& wm, const Point3& p);

/// Metric alpha h with measure alpha dmu; in three dimensions the new density
/// is alpha^{-1/2} rho. Positivity of alpha is checked on `check_grid` (when
/// given) and again at every evaluation.
WeightedManifold conformal_rescale(const WeightedManifold& wm, const ScalarField& alpha,
                                   const std::optional<SampleGrid>& check_grid = std::nullopt);

}  // namespace kgsa
