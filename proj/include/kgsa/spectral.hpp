#pragma once

// Finite-volume discretization of operators of the form
//   u -> -(1/W) d_i (K^ij d_j u) + q u,   K = W a, a positive definite,
// on a structured grid with homogeneous Dirichlet data. The matrix is
// A = M^-1 S with S symmetric (half the Hessian of the discrete energy) and
// M = diag(W_p dV), so A is symmetric in <u, v>_w = u^T M v by construction.

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kgsa/completeness.hpp"
#include "kgsa/kerr.hpp"

namespace kgsa {

struct FluxSample {
  double weight = 1.0;  // W, the measure density
  Sym3<double> flux{};  // K^ij
  double potential = 0.0;
};

struct FluxForm {
  std::function<FluxSample(const Point3&)> sample;
  Box box;
  std::array<bool, 3> active{true, true, true};
  std::string label;
};

/// -Delta_{mu~,h~} + V of the operator's reduced manifold.
FluxForm flux_form(const SpatialOperator& op);
/// The Kerr sector: weight and flux of (N^-2 g, N^-2 mu_g) on (r, theta), with
/// the sector potential; phi is inactive.
FluxForm flux_form(const ModeOperator& op);
/// Flat Dirichlet problem -Delta + c on a box.
FluxForm flat_flux_form(const Box& box, double potential = 0.0);
FluxForm with_potential_shift(FluxForm form, double shift);

/// Per-axis interval counts; active axes carry intervals - 1 interior
/// unknowns, inactive axes a single layer at the box center.
struct StructuredGrid {
  Box box;
  std::array<int, 3> intervals{16, 16, 16};
  std::array<bool, 3> active{true, true, true};

  int nodes(int axis) const { return active[axis] ? intervals[axis] - 1 : 1; }
  double spacing(int axis) const { return box.extent(axis) / intervals[axis]; }
  std::size_t unknowns() const;
  /// Position of the node with integer coordinates idx (0-based interior).
  Point3 position(const std::array<int, 3>& idx) const;
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;
  double cell_volume() const;
};

StructuredGrid make_grid(const FluxForm& form, std::array<int, 3> intervals);

class DiscreteOperator {
 public:
  DiscreteOperator(StructuredGrid grid, Eigen::SparseMatrix<double> stiffness,
                   Eigen::VectorXd weights);

  const StructuredGrid& grid() const { return grid_; }
  /// Symmetric S.
  const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }
  /// Diagonal of M.
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
  double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  Eigen::SparseMatrix<double> matrix() const;

  /// Coordinate format of A: a header line "rows cols nnz" then "i j value"
  /// with 0-based indices.
  void write_coo(std::ostream& out) const;

 private:
  StructuredGrid grid_;
  Eigen::SparseMatrix<double> stiffness_;
  Eigen::VectorXd weights_;
};

DiscreteOperator discretize(const FluxForm& form, const StructuredGrid& grid);

/// max over random pairs of |<Au, v>_w - <u, Av>_w| / (|u|_w |v|_w).
double symmetry_residual(const DiscreteOperator& op, int pairs, std::mt19937_64& rng);

struct EigenOptions {
  int basis_size = 50;
  int max_restarts = 60;
  double tolerance = 1e-8;  // |Av - lambda v|_w <= tolerance |v|_w
  std::uint64_t seed = 1;
};

struct EigenResult {
  std::vector<double> values;
  std::vector<Eigen::VectorXd> vectors;  // w-orthonormal
  std::vector<double> residuals;         // |Av - lambda v|_w / |v|_w
  double shift = 0.0;
  int restarts = 0;
  int solves = 0;
};

/// Lowest `count` eigenpairs of A by shift-invert block Lanczos in the
/// w-inner product with full reorthogonalization. Throws ConvergenceError if
/// the tolerance is not met within the restart cap.
EigenResult smallest_eigenvalues(const DiscreteOperator& op, int count,
                                 const EigenOptions& options = {});

enum class Verdict { hypotheses_supported, hypothesis_failed, inconclusive };
const char* to_string(Verdict v);

struct CertificateCheck {
  std::string name;
  bool passed = true;
  bool conclusive = true;
  std::string detail;
  std::optional<Point3> witness;
};

struct RitzLevel {
  std::array<int, 3> intervals{};
  double smallest = 0.0;
  double residual = 0.0;
};

struct SACertificate {
  Verdict verdict = Verdict::inconclusive;
  std::string failed_hypothesis;
  std::optional<Point3> witness;
  std::string summary;
  std::vector<CertificateCheck> checks;

  // potential sampling, against both measures
  double v_plus_min = 0.0;
  double v_minus_max = 0.0;
  double v_l2_mu = 0.0;        // (int V^2 dmu)^(1/2) over the chart
  double v_l2_mu_tilde = 0.0;  // (int V^2 dmu~)^(1/2)

  std::vector<RitzLevel> ritz;
  double lower_bound = 0.0;  // bound the Ritz values are compared against

  std::vector<GeodesicRun> geodesics;
  std::optional<DivergenceFit> horizon_divergence;
  std::optional<OutwardProbe> outward_divergence;
  std::optional<EquivalenceReport> equivalence;
  std::optional<PsdReport> psd;
};

struct CertifyOptions {
  std::vector<std::array<int, 3>> ladder{{8, 8, 8}, {16, 16, 16}};
  std::array<int, 3> sample_counts{9, 9, 9};
  double geodesic_span = 100.0;
  EigenOptions eigen;
};

/// Ultra-static, static or stationary metric on its (bounded) domain.
SACertificate sa_certificate(const StationaryMetric& metric, const ScalarField& m2,
                             const CertifyOptions& options = {});

/// Kerr sector k on an exterior chart, through the divergence of the radial
/// length and the equivalence of N^-2 g with the diagonal comparison metric.
SACertificate sa_certificate(const ModeOperator& op, const CertifyOptions& options = {});

}  // namespace kgsa
