#pragma once

// Stationary spacetime metrics in lapse/shift/spatial-metric form,
//   g = (-N^2 + N_i N^i) dt^2 + 2 N_i dt dx^i + g_ij dx^i dx^j,
// with the block quantities derived from them.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kgsa/field.hpp"
#include "kgsa/linalg.hpp"

namespace kgsa {

/// Points where N^2 - N_i N^i falls below this are treated as degenerate.
inline constexpr double kDegenerateMargin = 1e-12;
inline constexpr double kDegenerateDeterminant = 1e-30;

struct MetricJets {
  Jet2 lapse;
  std::array<Jet2, 3> shift;  // N^i
  SymJet spatial;             // g_ij
};

struct MetricValues {
  double lapse = 1.0;
  std::array<double, 3> shift{};
  Sym3<double> spatial{1.0, 0.0, 0.0, 1.0, 0.0, 1.0};
};

class StationaryMetric {
 public:
  using JetFn = std::function<MetricJets(const Point3&)>;
  using ValueFn = std::function<MetricValues(const Point3&)>;

  StationaryMetric(ScalarField lapse, VectorField shift, SymMetricField spatial,
                   Box domain = Box::unbounded());
  StationaryMetric(JetFn jets, ValueFn values, Box domain = Box::unbounded());

  static StationaryMetric minkowski(Box domain = Box::unbounded());

  MetricJets jets(const Point3& p) const { return jets_(p); }
  MetricValues values(const Point3& p) const { return values_(p); }
  const Box& domain() const { return domain_; }
  StationaryMetric with_domain(const Box& domain) const;

  ScalarField lapse() const;
  VectorField shift() const;
  SymMetricField spatial() const;

 private:
  JetFn jets_;
  ValueFn values_;
  Box domain_;
};

/// Every block quantity of the 3+1 split at one point, in double or Jet2.
template <class T>
struct Blocks {
  T lapse;
  Vec3T<T> shift_up;    // N^i
  Vec3T<T> shift_down;  // N_i = g_ij N^j
  T shift_norm2;        // N_i N^i
  T margin;             // N^2 - N_i N^i
  T g00;
  Sym3<T> spatial;      // g_ij
  Sym3<T> spatial_inv;  // g^ij
  Sym3<T> h_upper;      // g^ij - N^-2 N^i N^j
  Sym3<T> h_lower;      // g_ij + N_i N_j / (N^2 - N_k N^k)
  T det_g4;
  T det_h3;
  T rho;  // sqrt(|det g4| / |det h3|)
};

/// Computes the blocks; throws DegenerateError at degenerate points. With
/// `require_timelike == false` only |N^2 - N_i N^i| is checked, which lets the
/// determinant identity be evaluated inside ergoregions.
template <class T>
Blocks<T> compute_blocks(const T& lapse, const Vec3T<T>& shift, const Sym3<T>& spatial,
                         const Point3& where, bool require_timelike = true);

extern template Blocks<double> compute_blocks(const double&, const Vec3T<double>&,
                                              const Sym3<double>&, const Point3&, bool);
extern template Blocks<Jet2> compute_blocks(const Jet2&, const Vec3T<Jet2>&, const SymJet&,
                                            const Point3&, bool);

Blocks<Jet2> block_jets(const StationaryMetric& metric, const Point3& p,
                        bool require_timelike = true);

struct PointBlocks {
  double g00 = 0.0;
  std::array<double, 3> g0i{};
  Sym3<double> h_upper{};
  Sym3<double> h_lower{};
  double rho = 0.0;
  double det_g4 = 0.0;
  double det_h3 = 0.0;
};

PointBlocks point_blocks(const StationaryMetric& metric, const Point3& p);

/// Assembled 4x4 covariant metric at a point, coordinates (t, x1, x2, x3).
Mat4<double> covariant_metric(const StationaryMetric& metric, const Point3& p);

struct DeterminantIdentityReport {
  double max_residual = 0.0;
  Point3 worst_point{};
  std::size_t samples = 0;
};

/// max | det h3 - |g00^-1| |det g4| | / |det h3| over the samples.
DeterminantIdentityReport verify_determinant_identity(const StationaryMetric& metric,
                                                      std::span<const Point3> points);

/// Self-consistency of rho and the residuals of the two closed-form candidates
/// sqrt|g00| and sqrt|g00^-1|.
struct RhoDiagnostics {
  double rho = 0.0;
  double consistency_residual = 0.0;      // |rho^2 det h3 - |det g4|| / |det g4|
  double sqrt_g00_residual = 0.0;         // |rho - sqrt|g00|| / rho
  double sqrt_inverse_g00_residual = 0.0; // |rho - sqrt|1/g00|| / rho
};

RhoDiagnostics rho_diagnostics(const StationaryMetric& metric, const Point3& p);

struct TimelikeReport {
  bool killing_timelike = true;
  bool g00_negative_everywhere = true;
  double worst_margin = INFINITY;
  Point3 worst_point{};
  std::size_t violations = 0;
  std::optional<Point3> first_violation;
  std::size_t nodes = 0;
};

TimelikeReport check_assumption_timelike(const StationaryMetric& metric, const SampleGrid& grid);

struct AssumptionReport {
  TimelikeReport timelike;
  double alpha_b = 0.0;           // grid min of N
  double alpha_c = 0.0;           // grid max of N
  double shift_norm_bound = 0.0;  // grid max of g_ij N^i N^j
  double equivalence_a = 1.0;     // grid min generalized eigenvalue vs reference
  double equivalence_d = 1.0;     // grid max
  SampleGrid grid;
};

/// Grid extrema of the lapse and shift norm, and the equivalence constants of
/// the spatial metric against `reference` (the metric itself when absent).
AssumptionReport estimate_bounds(const StationaryMetric& metric, const SampleGrid& grid,
                                 const std::optional<SymMetricField>& reference = std::nullopt);

/// h_ij as a field.
SymMetricField h_lower_field(const StationaryMetric& metric);
/// rho as a field.
ScalarField density_field(const StationaryMetric& metric);
/// N^-2 g_ij.
SymMetricField conformal_spatial_field(const StationaryMetric& metric);

}  // namespace kgsa
