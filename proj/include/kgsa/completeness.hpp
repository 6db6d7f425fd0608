#pragma once

// Evidence for (in)completeness of spatial metrics: Christoffel symbols and
// geodesic integration, radial length integrals near singular ends,
// generalized-eigenvalue comparisons between metrics, and the completion
// metrics built from a shift that is a gradient or from a proper function.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgsa/metric.hpp"

namespace kgsa {

/// gamma[k][sym_index(i, j)] = Gamma^k_ij.
using Christoffel = std::array<Sym3<double>, 3>;

Christoffel christoffel(const SymMetricField& g, const Point3& p);

struct GeodesicOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double initial_step = 1e-2;
  double min_step = 1e-13;
  std::size_t max_steps = 2'000'000;
  /// Geodesics stop on leaving this box. Unbounded by default.
  Box chart = Box::unbounded();
  /// Keep every n-th accepted step in the path samples (0 keeps none).
  std::size_t sample_every = 1;
};

enum class Termination { completed_span, left_chart, step_failure };
const char* to_string(Termination t);

struct GeodesicRun {
  Point3 x0{};
  Point3 v0{};
  double span = 0.0;
  std::vector<double> times;
  std::vector<Point3> path;
  Termination termination = Termination::completed_span;
  /// 2 * axis + (0 for the lower face, 1 for the upper face); -1 if none.
  int exit_face = -1;
  double end_time = 0.0;
  Point3 end_point{};
  double initial_speed = 0.0;
  double max_speed_drift = 0.0;  // max |speed - speed0| / speed0
  std::size_t steps = 0;
  std::string failure;
};

/// Adaptive Dormand-Prince integration of x'' = -Gamma(x)(x', x').
GeodesicRun integrate_geodesic(const SymMetricField& g, const Point3& x0, const Point3& v0,
                               double span, const GeodesicOptions& options = {});

/// Length of the straight coordinate segment from `from` to `to`, refined
/// geometrically toward `to` (the end that may be singular).
double segment_length(const SymMetricField& g, const Point3& from, const Point3& to);

/// Adaptive Gauss-Kronrod integral of f on [a, b], with intervals split
/// geometrically toward a.
double integrate_toward_lower(const std::function<double(double)>& f, double a, double b);

inline const std::vector<double> kDefaultEpsilons{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

struct DivergenceFit {
  std::vector<double> epsilons;
  std::vector<double> lengths;  // L(eps) = int_{r1 + eps}^{r0} sqrt(c) dr
  double slope = 0.0;           // least squares of L against log(1/eps)
  double intercept = 0.0;
  double r_squared = 0.0;
  bool monotone = false;
  bool diverges = false;
};

inline constexpr double kDivergenceMinSlope = 1e-2;
inline constexpr double kDivergenceMinRSquared = 0.999;

DivergenceFit radial_divergence_probe(const std::function<double(double)>& c, double r1,
                                      double r0,
                                      const std::vector<double>& epsilons = kDefaultEpsilons);

struct OutwardProbe {
  std::vector<double> radii;
  std::vector<double> lengths;  // int_{r_in}^{R} sqrt(c) dr
  double growth_rate = 0.0;     // least-squares slope of L against R
  bool unbounded = false;
};

OutwardProbe outward_divergence_probe(const std::function<double(double)>& c, double r_in,
                                      const std::vector<double>& radii);

struct EquivalenceReport {
  double lower = 0.0;  // e
  double upper = 0.0;  // f
  Point3 lower_witness{};
  Point3 upper_witness{};
  std::size_t nodes = 0;
};

/// Grid extremes of the generalized eigenvalues of A relative to B.
EquivalenceReport equivalence_constants(const SymMetricField& a, const SymMetricField& b,
                                        const SampleGrid& grid);

inline constexpr double kPsdTolerance = 1e-10;

struct PsdReport {
  bool psd = true;
  double worst_eigenvalue = INFINITY;
  Point3 worst_point{};
  std::size_t nodes = 0;
};

/// Smallest eigenvalue of A - B over the grid; PSD iff >= -kPsdTolerance.
PsdReport psd_difference(const SymMetricField& a, const SymMetricField& b, const SampleGrid& grid);

/// Builds k_ij, k~_ij, h_ij and h~_ij from a stationary metric whose shift
/// satisfies |N|^2_{g~} < 1.
struct CompletionMetrics {
  SymMetricField k;                  // N^2 g + N_i N_j
  SymMetricField k_tilde;            // g + N^-2 N_i N_j
  SymMetricField h;                  // g + N^-2 (1 - |N|^2_{g~})^-1 N_i N_j
  SymMetricField h_tilde;            // N^-2 h
  SymMetricField h_tilde_expanded;   // N^-2 g + (1 - N^-2 N_k N^k)^-1 N^-4 N_i N_j
};

CompletionMetrics completion_metrics(const StationaryMetric& metric);

struct CompletionReport {
  double max_shift_norm = 0.0;  // grid max of g~_ij N^i N^j
  Point3 max_shift_point{};
  PsdReport h_minus_k_tilde;
  double h_tilde_forms_residual = 0.0;  // max relative difference of the two h~ forms
  double lapse_min = 0.0;               // alpha_B
  double lapse_max = 0.0;               // alpha_C
  EquivalenceReport k_vs_k_tilde;
  bool squared_lapse_bounds_hold = false;    // alpha_B^2 k~ <= k <= alpha_C^2 k~
  bool unsquared_lapse_bounds_hold = false;  // alpha_B k~ <= k <= alpha_C k~
};

/// Checks the shift bound on the grid (HypothesisError "shift_bound" with the
/// first violating node otherwise) and then the invariants of the metrics.
CompletionReport build_completion(const StationaryMetric& metric, const SampleGrid& grid,
                                  CompletionMetrics* out = nullptr);

struct GammaCompletion {
  ScalarField gradient_norm2;  // |grad gamma|^2_g
  ScalarField conformal_factor;  // exp(|grad gamma|^2_g)
  SymMetricField completed;      // N^-2 exp(|grad gamma|^2_g) g
  ScalarField warped_factor;     // exp(-|grad gamma|^2_g)
  ScalarField warped_lapse;      // exp(-|grad gamma|^2_g / 2) N
  bool properness_assumed = true;
};

/// The second derivatives of |grad gamma|^2 need third derivatives of gamma;
/// they are taken by central differences of its exact gradient.
GammaCompletion gamma_completion(const StationaryMetric& metric, const ScalarField& gamma);

}  // namespace kgsa
