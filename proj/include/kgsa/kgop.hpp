#pragma once

// The spatial Klein-Gordon operator w^2 of a stationary metric,
//   w^2 = -N^2 Delta_{mu,h} + V,   V = N^2 m^2,
// in its raw form, its conformally reduced form -Delta_{mu~,h~} + V with
// h~ = N^-2 h and dmu~ = N^-2 dmu, and the rewritten form
//   -N^2 Delta_{mu,g} + N^i N^j d_i d_j + V
// that is exact when the coefficients do not vary along the shift.

#include <array>
#include <optional>
#include <random>

#include "kgsa/metric.hpp"
#include "kgsa/weighted.hpp"

namespace kgsa {

enum class OperatorForm { raw, reduced, kerr_mode };

const char* to_string(OperatorForm form);

class SpatialOperator {
 public:
  SpatialOperator(StationaryMetric metric, ScalarField m2, OperatorForm form);

  const StationaryMetric& metric() const { return metric_; }
  /// (h, rho) with dmu = rho sqrt|h| d^3x.
  const WeightedManifold& base() const { return base_; }
  /// (N^-2 h, N^-2 mu).
  const WeightedManifold& reduced() const { return reduced_; }
  /// (g, sqrt|det g4| / sqrt|det g3|), used by the kerr_mode form.
  const WeightedManifold& spatial_manifold() const { return spatial_; }
  const ScalarField& lapse() const { return lapse_; }
  const ScalarField& mass_squared() const { return m2_; }
  const ScalarField& potential() const { return potential_; }
  OperatorForm form() const { return form_; }

  SpatialOperator with_form(OperatorForm form) const;

 private:
  StationaryMetric metric_;
  ScalarField m2_;
  ScalarField lapse_;
  ScalarField potential_;
  WeightedManifold base_;
  WeightedManifold reduced_;
  WeightedManifold spatial_;
  OperatorForm form_;
};

/// Builds w^2. For the raw and reduced forms the Killing field must be
/// timelike on `check_grid` (defaults to a 5^3 sampling of a bounded metric
/// domain); otherwise HypothesisError("timelike_killing") names the first
/// violating node. The kerr_mode form skips that check.
SpatialOperator assemble_w2(const StationaryMetric& metric, const ScalarField& m2,
                            const std::optional<SampleGrid>& check_grid = std::nullopt,
                            OperatorForm form = OperatorForm::raw);

double apply_w2(const SpatialOperator& op, const Jet2& u, const Point3& p);
double apply_w2(const SpatialOperator& op, const ScalarField& u, const Point3& p);

struct ReductionCheck {
  double direct = 0.0;     // from the 4D operator (1/sqrt|g|) d_mu (sqrt|g| g^{mu nu} d_nu)
  double assembled = 0.0;  // apply_w2
  double scale = 0.0;      // sum of magnitudes of the direct route's terms
  double residual = 0.0;   // |direct - assembled| / scale
};

/// Expands the 4D Klein-Gordon operator on a time-independent u, multiplies by
/// (g^00)^-1 and compares with apply_w2 in the operator's own form.
ReductionCheck verify_reduction(const SpatialOperator& op, const ScalarField& u, const Point3& p);
ReductionCheck verify_reduction(const StationaryMetric& metric, const ScalarField& m2,
                                const ScalarField& u, const Point3& p);

/// The coefficient of d_0 in the Klein-Gordon equation,
///   f = -(g^00 sqrt|g|)^-1 d_i (sqrt|g| g^00 N^i) - 2 N^i d_i,
/// split into its multiplicative and transport parts applied to u.
struct FirstOrderTerms {
  double scalar_coefficient = 0.0;
  double scalar_term = 0.0;     // scalar_coefficient * u
  double transport_term = 0.0;  // -2 N^i d_i u
};

FirstOrderTerms first_order_coefficient(const StationaryMetric& metric, const Point3& p,
                                        const ScalarField& u);

/// Bump polynomial on `support` times a random trigonometric factor. Axes
/// with active[a] == false are left out of both factors.
ScalarField random_test_field(const Box& support, std::mt19937_64& rng,
                              std::array<bool, 3> active = {true, true, true});

/// Uniform random point inside the box, shrunk by `margin` (fraction of the
/// extent) on each side.
Point3 random_point(const Box& box, std::mt19937_64& rng, double margin = 0.0);

}  // namespace kgsa
