#include "kgsa/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace kgsa {

FluxForm flux_form(const SpatialOperator& op) {
  FluxForm f;
  f.box = op.metric().domain();
  if (!f.box.bounded()) throw Error("discretization needs a bounded chart");
  f.label = "reduced";
  f.sample = [op](const Point3& p) {
    const FluxCoefficients c = flux_coefficients(op.reduced(), p);
    return FluxSample{c.weight, c.flux, op.potential().value(p)};
  };
  return f;
}

FluxForm flux_form(const ModeOperator& op) {
  FluxForm f;
  f.box = op.chart();
  f.active = {true, true, false};
  f.label = "kerr_mode k=" + std::to_string(op.k());
  f.sample = [op](const Point3& p) {
    const FluxCoefficients c = flux_coefficients(op.reduced(), p);
    return FluxSample{c.weight, c.flux, op.sector_potential(p)};
  };
  return f;
}

FluxForm flat_flux_form(const Box& box, double potential) {
  FluxForm f;
  f.box = box;
  f.label = "flat";
  f.sample = [potential](const Point3&) {
    return FluxSample{1.0, {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}, potential};
  };
  return f;
}

FluxForm with_potential_shift(FluxForm form, double shift) {
  auto base = form.sample;
  form.sample = [base, shift](const Point3& p) {
    FluxSample s = base(p);
    s.potential += shift;
    return s;
  };
  return form;
}

std::size_t StructuredGrid::unknowns() const {
  std::size_t n = 1;
  for (int a = 0; a < 3; ++a) n *= static_cast<std::size_t>(std::max(nodes(a), 0));
  return n;
}

Point3 StructuredGrid::position(const std::array<int, 3>& idx) const {
  Point3 p;
  for (int a = 0; a < 3; ++a)
    p[a] = active[a] ? box.lo[a] + (idx[a] + 1) * spacing(a) : 0.5 * (box.lo[a] + box.hi[a]);
  return p;
}

std::array<int, 3> StructuredGrid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx;
  for (int a = 0; a < 3; ++a) {
    idx[a] = static_cast<int>(flat % nodes(a));
    flat /= nodes(a);
  }
  return idx;
}

std::size_t StructuredGrid::flatten(const std::array<int, 3>& idx) const {
  return static_cast<std::size_t>(idx[0]) +
         static_cast<std::size_t>(nodes(0)) *
             (static_cast<std::size_t>(idx[1]) + static_cast<std::size_t>(nodes(1)) * idx[2]);
}

double StructuredGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < 3; ++a)
    if (active[a]) v *= spacing(a);
  return v;
}

StructuredGrid make_grid(const FluxForm& form, std::array<int, 3> intervals) {
  StructuredGrid g;
  g.box = form.box;
  g.active = form.active;
  for (int a = 0; a < 3; ++a) {
    g.intervals[a] = form.active[a] ? intervals[a] : 1;
    if (form.active[a] && intervals[a] < 2) throw Error("grid needs at least 2 intervals per axis");
  }
  return g;
}

DiscreteOperator::DiscreteOperator(StructuredGrid grid, Eigen::SparseMatrix<double> stiffness,
                                   Eigen::VectorXd weights)
    : grid_(std::move(grid)), stiffness_(std::move(stiffness)), weights_(std::move(weights)) {}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& u) const {
  return (stiffness_ * u).cwiseQuotient(weights_);
}

double DiscreteOperator::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return u.dot(weights_.asDiagonal() * v);
}

Eigen::SparseMatrix<double> DiscreteOperator::matrix() const {
  Eigen::SparseMatrix<double> a = weights_.cwiseInverse().asDiagonal() * stiffness_;
  a.makeCompressed();
  return a;
}

void DiscreteOperator::write_coo(std::ostream& out) const {
  const Eigen::SparseMatrix<double> a = matrix();
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out.precision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

DiscreteOperator discretize(const FluxForm& form, const StructuredGrid& grid) {
  const std::size_t n = grid.unknowns();
  if (n == 0) throw Error("grid has no interior nodes");
  const double dv = grid.cell_volume();
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(n));

  // index of a node, or -1 for a Dirichlet boundary node
  auto index_of = [&grid](std::array<int, 3> idx) -> long {
    for (int a = 0; a < 3; ++a)
      if (idx[a] < 0 || idx[a] >= grid.nodes(a)) return -1;
    return static_cast<long>(grid.flatten(idx));
  };
  auto add = [&triplets](long i, long j, double v) {
    if (i >= 0 && j >= 0) triplets.emplace_back(i, j, v);
  };
  // lowest index for a face/square loop: -1 on active axes so cells touching
  // the boundary are included
  std::array<int, 3> start{}, stop{};
  for (int a = 0; a < 3; ++a) {
    start[a] = grid.active[a] ? -1 : 0;
    stop[a] = grid.nodes(a);
  }
  auto for_each_cell = [&](auto&& body) {
    std::array<int, 3> idx;
    for (idx[2] = start[2]; idx[2] < stop[2]; ++idx[2])
      for (idx[1] = start[1]; idx[1] < stop[1]; ++idx[1])
        for (idx[0] = start[0]; idx[0] < stop[0]; ++idx[0]) body(idx);
  };

  for (std::size_t p = 0; p < n; ++p) {
    const Point3 x = grid.position(grid.unflatten(p));
    const FluxSample s = form.sample(x);
    if (!(s.weight > 0.0) || !std::isfinite(s.weight))
      throw DegenerateError("measure density not positive", x);
    weights[static_cast<Eigen::Index>(p)] = s.weight * dv;
    if (s.potential != 0.0)
      add(static_cast<long>(p), static_cast<long>(p), s.potential * s.weight * dv);
  }

  for (int i = 0; i < 3; ++i) {
    if (!grid.active[i]) continue;
    const double hi = grid.spacing(i);
    for_each_cell([&](std::array<int, 3> idx) {
      for (int a = 0; a < 3; ++a)
        if (a != i && idx[a] < 0) return;
      std::array<int, 3> next = idx;
      next[i] += 1;
      Point3 x = grid.position(idx);
      x[i] += 0.5 * hi;
      const FluxSample s = form.sample(x);
      const double c = dv * at(s.flux, i, i) / (hi * hi);
      if (!std::isfinite(c)) throw DegenerateError("non-finite flux coefficient", x);
      const long p = index_of(idx), q = index_of(next);
      add(p, p, c);
      add(q, q, c);
      add(p, q, -c);
      add(q, p, -c);
    });
  }

  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (!grid.active[i] || !grid.active[j]) continue;
      const double hi = grid.spacing(i), hj = grid.spacing(j);
      for_each_cell([&](std::array<int, 3> idx) {
        for (int a = 0; a < 3; ++a)
          if (a != i && a != j && idx[a] < 0) return;
        Point3 x = grid.position(idx);
        x[i] += 0.5 * hi;
        x[j] += 0.5 * hj;
        const double kij = at(form.sample(x).flux, i, j);
        if (kij == 0.0) return;
        // corners 00, 10, 01, 11 in the (i, j) plane
        std::array<long, 4> corner;
        for (int c = 0; c < 4; ++c) {
          std::array<int, 3> k = idx;
          k[i] += c & 1;
          k[j] += c >> 1;
          corner[c] = index_of(k);
        }
        const std::array<double, 4> di{-0.5 / hi, 0.5 / hi, -0.5 / hi, 0.5 / hi};
        const std::array<double, 4> dj{-0.5 / hj, -0.5 / hj, 0.5 / hj, 0.5 / hj};
        // energy 2 dv K^ij (di.u)(dj.u); S is half its Hessian
        const double c = dv * kij;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) add(corner[a], corner[b], c * (di[a] * dj[b] + dj[a] * di[b]));
      });
    }

  Eigen::SparseMatrix<double> s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.setFromTriplets(triplets.begin(), triplets.end());
  s.makeCompressed();
  return DiscreteOperator(grid, std::move(s), std::move(weights));
}

double symmetry_residual(const DiscreteOperator& op, int pairs, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(op.size());
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = normal(rng);
      v[i] = normal(rng);
    }
    const double lhs = op.inner(op.apply(u), v);
    const double rhs = op.inner(u, op.apply(v));
    const double scale = std::sqrt(op.inner(u, u) * op.inner(v, v));
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

namespace {

// Orthonormalizes the columns of w against basis.leftCols(used) and among
// themselves; columns that collapse are replaced by random directions.
void orthonormalize_block(Eigen::MatrixXd& w, const Eigen::MatrixXd& basis, Eigen::Index used,
                          std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (int attempt = 0;; ++attempt) {
      const double before = w.col(c).norm();
      for (int pass = 0; pass < 2; ++pass) {
        if (used > 0) {
          const Eigen::VectorXd coeff = basis.leftCols(used).transpose() * w.col(c);
          w.col(c) -= basis.leftCols(used) * coeff;
        }
        for (Eigen::Index d = 0; d < c; ++d) w.col(c) -= w.col(d).dot(w.col(c)) * w.col(d);
      }
      const double after = w.col(c).norm();
      if (after > 1e-10 * before && after > 0.0) {
        w.col(c) /= after;
        break;
      }
      if (attempt > 5) throw ConvergenceError("Krylov basis cannot be extended");
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, c) = normal(rng);
    }
  }
}

}  // namespace

EigenResult smallest_eigenvalues(const DiscreteOperator& op, int count, const EigenOptions& options) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (count < 1) throw Error("eigenvalue count must be positive");
  if (count > n) throw Error("more eigenvalues requested than unknowns");

  // B = M^-1/2 S M^-1/2 carries the same spectrum in the Euclidean product.
  const Eigen::VectorXd d = op.weights().cwiseSqrt().cwiseInverse();
  Eigen::SparseMatrix<double> b = d.asDiagonal() * op.stiffness() * d.asDiagonal();
  b.makeCompressed();

  double gershgorin = INFINITY;
  for (int k = 0; k < b.outerSize(); ++k) {
    double diag = 0.0, off = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(b, k); it; ++it) {
      if (it.row() == k)
        diag += it.value();
      else
        off += std::abs(it.value());
    }
    gershgorin = std::min(gershgorin, diag - off);
  }
  EigenResult result;
  result.shift = gershgorin - 1e-2 * std::max(1.0, std::abs(gershgorin));

  Eigen::SparseMatrix<double> shifted = b;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= result.shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw ConvergenceError("factorization of shifted operator failed");

  const Eigen::Index block = std::min<Eigen::Index>(count + 2, n);
  Eigen::Index basis = std::max<Eigen::Index>(options.basis_size, 3 * block);
  basis = std::min<Eigen::Index>((basis / block) * block, (n / block) * block);
  if (basis < block) basis = block;

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd start(n, block);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < block; ++c) start(i, c) = normal(rng);

  Eigen::MatrixXd v(n, basis), cv(n, basis);
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    result.restarts = restart;
    orthonormalize_block(start, v, 0, rng);
    v.leftCols(block) = start;
    for (Eigen::Index j = 0; j < basis; j += block) {
      Eigen::MatrixXd w = solver.solve(v.middleCols(j, block));
      result.solves += static_cast<int>(block);
      cv.middleCols(j, block) = w;
      if (j + block < basis) {
        orthonormalize_block(w, v, j + block, rng);
        v.middleCols(j + block, block) = w;
      }
    }
    Eigen::MatrixXd t = v.transpose() * cv;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    // largest eigenvalues of the inverse are the smallest of B
    result.values.clear();
    result.vectors.clear();
    result.residuals.clear();
    bool converged = true;
    for (Eigen::Index k = 0; k < block; ++k) {
      const Eigen::Index col = basis - 1 - k;
      const double theta = es.eigenvalues()[col];
      Eigen::VectorXd y = v * es.eigenvectors().col(col);
      y.normalize();
      const double lambda = result.shift + 1.0 / theta;
      const double res = (b * y - lambda * y).norm();
      start.col(k) = y;
      if (k < count) {
        result.values.push_back(lambda);
        result.vectors.push_back(d.asDiagonal() * y);
        result.residuals.push_back(res);
        if (!(res <= options.tolerance)) converged = false;
      }
    }
    if (converged) return result;
  }
  double worst = 0.0;
  for (double r : result.residuals) worst = std::max(worst, r);
  throw ConvergenceError("Lanczos did not converge after " + std::to_string(options.max_restarts) +
                         " restarts (worst residual " + std::to_string(worst) + ")");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::hypotheses_supported: return "hypotheses_supported";
    case Verdict::hypothesis_failed: return "hypothesis_failed";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

void finalize(SACertificate& cert) {
  cert.verdict = Verdict::hypotheses_supported;
  for (const CertificateCheck& c : cert.checks) {
    if (!c.passed && c.conclusive) {
      cert.verdict = Verdict::hypothesis_failed;
      cert.failed_hypothesis = c.name;
      cert.witness = c.witness;
      cert.summary = "hypothesis_failed(" + c.name +
                     (c.witness ? ", " + format_point(*c.witness) : std::string()) + "): " + c.detail;
      return;
    }
  }
  for (const CertificateCheck& c : cert.checks)
    if (!c.passed) {
      cert.verdict = Verdict::inconclusive;
      cert.summary = "inconclusive: " + c.name + ": " + c.detail;
      return;
    }
  cert.summary =
      "hypotheses_supported: no failure witness found on the sampled chart; this is numerical "
      "evidence, not a proof of essential self-adjointness";
}

// Midpoint sums of V^2 against two densities over the chart cells.
void potential_checks(SACertificate& cert, const SampleGrid& cells,
                      const std::function<double(const Point3&)>& potential,
                      const std::function<double(const Point3&)>& mu,
                      const std::function<double(const Point3&)>& mu_tilde,
                      const std::array<bool, 3>& active) {
  double vol = 1.0;
  for (int a = 0; a < 3; ++a)
    if (active[a]) vol *= cells.box.extent(a) / cells.counts[a];
  double l2_mu = 0.0, l2_mu_tilde = 0.0;
  cert.v_plus_min = INFINITY;
  cert.v_minus_max = -INFINITY;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    const auto idx = cells.unflatten(n);
    Point3 p;
    for (int a = 0; a < 3; ++a)
      p[a] = cells.box.lo[a] + (idx[a] + 0.5) * cells.box.extent(a) / cells.counts[a];
    const double v = potential(p);
    cert.v_plus_min = std::min(cert.v_plus_min, std::max(v, 0.0));
    cert.v_minus_max = std::max(cert.v_minus_max, std::min(v, 0.0));
    l2_mu += v * v * mu(p) * vol;
    l2_mu_tilde += v * v * mu_tilde(p) * vol;
  }
  cert.v_l2_mu = std::sqrt(l2_mu);
  cert.v_l2_mu_tilde = std::sqrt(l2_mu_tilde);
  CertificateCheck c;
  c.name = "potential_decomposition";
  c.passed = cert.v_plus_min >= 0.0 && cert.v_minus_max <= 0.0 && std::isfinite(cert.v_l2_mu) &&
             std::isfinite(cert.v_l2_mu_tilde);
  c.detail = "V+ >= 0, V- <= 0 sampled; chart L2 norms of V: " + std::to_string(cert.v_l2_mu) +
             " (mu), " + std::to_string(cert.v_l2_mu_tilde) + " (mu~)";
  cert.checks.push_back(c);
}

void ritz_checks(SACertificate& cert, const FluxForm& form, const CertifyOptions& options,
                 const std::function<double(const StructuredGrid&)>& lower_bound) {
  CertificateCheck c;
  c.name = "semi_bounded";
  c.detail = "smallest Ritz values:";
  cert.lower_bound = INFINITY;
  for (const auto& counts : options.ladder) {
    const StructuredGrid grid = make_grid(form, counts);
    const DiscreteOperator dop = discretize(form, grid);
    const EigenResult er = smallest_eigenvalues(dop, 1, options.eigen);
    RitzLevel level{grid.intervals, er.values[0], er.residuals[0]};
    cert.ritz.push_back(level);
    const double bound = lower_bound(grid);
    cert.lower_bound = std::min(cert.lower_bound, bound);
    c.detail += " " + std::to_string(level.smallest);
    if (!(level.smallest >= bound - 1e-6)) {
      c.passed = false;
      // a discrete value below the bound is evidence worth surfacing, but a
      // finite grid cannot decide the operator-level question
      c.conclusive = false;
    }
  }
  c.detail += "; lower bound " + std::to_string(cert.lower_bound);
  cert.checks.push_back(c);
}

double grid_min(const StructuredGrid& grid, const std::function<double(const Point3&)>& f) {
  double m = INFINITY;
  for (std::size_t p = 0; p < grid.unknowns(); ++p) m = std::min(m, f(grid.position(grid.unflatten(p))));
  return m;
}

}  // namespace

SACertificate sa_certificate(const StationaryMetric& metric, const ScalarField& m2,
                             const CertifyOptions& options) {
  SACertificate cert;
  const Box chart = metric.domain();
  if (!chart.bounded()) throw Error("certificate needs a bounded chart");
  const SampleGrid samples{chart, options.sample_counts};

  const TimelikeReport t = check_assumption_timelike(metric, samples);
  {
    CertificateCheck c;
    c.name = "timelike_killing";
    c.passed = t.killing_timelike;
    c.detail = "min N^2 - N_i N^i = " + std::to_string(t.worst_margin);
    if (!t.killing_timelike) c.witness = t.first_violation;
    cert.checks.push_back(c);
    if (!c.passed) {
      finalize(cert);
      return cert;
    }
  }

  const SpatialOperator op = assemble_w2(metric, m2, samples, OperatorForm::reduced);
  const SymMetricField h_tilde = op.reduced().metric();

  {
    // Completeness evidence on (chart, h~): the chart boundary ends every
    // geodesic, so only a breakdown inside the chart is a witness.
    CertificateCheck c;
    c.name = "complete_reduced_metric";
    const Point3 center = chart.center();
    const Sym3<double> hc = h_tilde.value(center);
    GeodesicOptions go;
    go.chart = chart;
    go.sample_every = 0;
    double drift = 0.0;
    for (int axis = 0; axis < 3; ++axis)
      for (int sign : {-1, 1}) {
        Point3 v{0.0, 0.0, 0.0};
        v[axis] = sign / std::sqrt(at(hc, axis, axis));
        GeodesicRun run = integrate_geodesic(h_tilde, center, v, options.geodesic_span, go);
        drift = std::max(drift, run.max_speed_drift);
        if (run.termination == Termination::step_failure) {
          c.passed = false;
          c.witness = run.end_point;
        }
        cert.geodesics.push_back(std::move(run));
      }
    c.detail = c.passed ? "no incompleteness witness inside the chart up to affine span " +
                              std::to_string(options.geodesic_span) + " (max speed drift " +
                              std::to_string(drift) + ")"
                        : "geodesic integration broke down inside the chart";
    cert.checks.push_back(c);
  }
  {
    CertificateCheck c;
    c.name = "reduced_dominates_conformal";
    cert.psd = psd_difference(h_tilde, conformal_spatial_field(metric), samples);
    c.passed = cert.psd->psd;
    c.detail = "min eigenvalue of h~ - N^-2 g: " + std::to_string(cert.psd->worst_eigenvalue);
    if (!c.passed) c.witness = cert.psd->worst_point;
    cert.checks.push_back(c);
  }

  SampleGrid cells{chart, options.sample_counts};
  potential_checks(
      cert, cells, [&op](const Point3& p) { return op.potential().value(p); },
      [&op](const Point3& p) { return measure_density(op.base(), p); },
      [&op](const Point3& p) { return measure_density(op.reduced(), p); }, {true, true, true});

  const FluxForm form = flux_form(op);
  ritz_checks(cert, form, options, [&op](const StructuredGrid& grid) {
    return std::min(0.0, grid_min(grid, [&op](const Point3& p) { return op.potential().value(p); }));
  });
  finalize(cert);
  return cert;
}

SACertificate sa_certificate(const ModeOperator& op, const CertifyOptions& options) {
  SACertificate cert;
  const Box chart = op.chart();
  const KerrParams kp = op.params();
  SampleGrid samples{chart, options.sample_counts};
  samples.counts[2] = 1;

  {
    // Recorded for information: the sector route does not need it.
    const TimelikeReport t = check_assumption_timelike(op.metric(), samples);
    CertificateCheck c;
    c.name = "timelike_killing_info";
    c.detail = t.killing_timelike ? "chart outside the ergoregion"
                                  : "chart meets the ergoregion; not required on this route";
    cert.checks.push_back(c);
  }

  const auto warped_radial = [kp](double r) {
    const double delta = r * r - 2.0 * kp.M * r + kp.a * kp.a;
    return r * r * r * r / (delta * delta);
  };
  {
    CertificateCheck c;
    c.name = "radial_length_diverges";
    cert.horizon_divergence = radial_divergence_probe(warped_radial, kp.r_plus(), chart.hi[0]);
    std::vector<double> radii;
    for (double f : {10.0, 100.0, 1000.0, 10000.0}) radii.push_back(f * chart.hi[0]);
    cert.outward_divergence = outward_divergence_probe(warped_radial, chart.hi[0], radii);
    c.passed = cert.horizon_divergence->diverges && cert.outward_divergence->unbounded;
    c.detail = "horizon slope " + std::to_string(cert.horizon_divergence->slope) + " (R^2 " +
               std::to_string(cert.horizon_divergence->r_squared) + "), outward growth " +
               std::to_string(cert.outward_divergence->growth_rate);
    if (!c.passed) c.witness = Point3{kp.r_plus(), chart.center()[1], chart.center()[2]};
    cert.checks.push_back(c);
  }
  {
    CertificateCheck c;
    c.name = "comparison_equivalence";
    cert.equivalence = equivalence_constants(conformal_spatial_field(op.metric()), hat_metric(kp), samples);
    c.passed = cert.equivalence->lower >= 1.0 - 1e-12 && std::isfinite(cert.equivalence->upper);
    c.detail = "e = " + std::to_string(cert.equivalence->lower) +
               ", f = " + std::to_string(cert.equivalence->upper);
    if (!c.passed) c.witness = cert.equivalence->lower_witness;
    cert.checks.push_back(c);
  }

  SampleGrid cells{chart, options.sample_counts};
  cells.counts[2] = 1;
  const SpatialOperator& sop = op.spatial_operator();
  potential_checks(
      cert, cells, [&sop](const Point3& p) { return sop.potential().value(p); },
      [&sop](const Point3& p) { return measure_density(sop.spatial_manifold(), p); },
      [&op](const Point3& p) { return measure_density(op.reduced(), p); }, {true, true, false});

  const FluxForm form = flux_form(op);
  ritz_checks(cert, form, options, [&op, &sop](const StructuredGrid& grid) {
    const double beta = -grid_min(grid, [&op](const Point3& p) {
      const double b = op.beta_comparison(p);
      return -0.25 * b * b;
    });
    const double vminus = std::min(0.0, grid_min(grid, [&sop](const Point3& p) {
                                     return sop.potential().value(p);
                                   }));
    return -beta + vminus;
  });
  finalize(cert);
  return cert;
}

}  // namespace kgsa
