#include "kgsa/cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <iostream>
#include <sstream>

#include "kgsa/completeness.hpp"
#include "kgsa/spectral.hpp"

namespace kgsa::cli {

namespace {

using json = nlohmann::ordered_json;

json point_json(const Point3& p) { return json::array({p[0], p[1], p[2]}); }

RecordVerdict verdict_of(bool ok) { return ok ? RecordVerdict::pass : RecordVerdict::fail; }

Record make(const std::string& name, const std::string& anchor) {
  Record r;
  r.name = name;
  r.anchor = anchor;
  return r;
}

bool is_kerr_family(const RunConfig& c) {
  return c.spacetime.family == "kerr" || c.spacetime.family == "schwarzschild";
}

KerrParams kerr_params(const RunConfig& c) {
  return {c.spacetime.M, c.spacetime.family == "kerr" ? c.spacetime.a : 0.0};
}

std::vector<Point3> random_points(const Box& box, std::mt19937_64& rng, int count, double margin) {
  std::vector<Point3> pts;
  for (int i = 0; i < count; ++i) pts.push_back(random_point(box, rng, margin));
  return pts;
}

bool constant_on_chart(const ScalarField& f, const Box& box) {
  const SampleGrid g{box, {3, 3, 3}};
  const double v0 = f.value(g.node(0));
  for (std::size_t n = 1; n < g.size(); ++n)
    if (f.value(g.node(n)) != v0) return false;
  return true;
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------- check

void run_check(const RunConfig& c, Report& report) {
  const Problem prob = build_problem(c);
  const SampleGrid samples{c.chart, c.samples};
  std::mt19937_64 rng(c.seed);

  const TimelikeReport t = check_assumption_timelike(prob.metric, samples);
  {
    Record r = make("timelike_killing", "Killing field timelike: N^2 - N_i N^i > 0");
    r.inputs["nodes"] = t.nodes;
    r.outputs["killing_timelike"] = t.killing_timelike;
    r.outputs["g00_negative_everywhere"] = t.g00_negative_everywhere;
    r.outputs["worst_margin"] = t.worst_margin;
    r.outputs["worst_point"] = point_json(t.worst_point);
    r.outputs["violations"] = t.violations;
    if (t.first_violation) r.outputs["first_violation"] = point_json(*t.first_violation);
    r.residuals["agreement_with_g00_sign"] = t.killing_timelike == t.g00_negative_everywhere ? 0 : 1;
    r.tolerance = 0.0;
    r.verdict = verdict_of(t.killing_timelike && t.killing_timelike == t.g00_negative_everywhere);
    report.add(r);
  }
  {
    const AssumptionReport a = estimate_bounds(prob.metric, samples);
    Record r = make("lapse_shift_bounds",
                    "alpha_B <= N <= alpha_C, g_ij N^i N^j <= B, A g <= g <= D g");
    r.outputs["alpha_b"] = a.alpha_b;
    r.outputs["alpha_c"] = a.alpha_c;
    r.outputs["shift_norm_bound"] = a.shift_norm_bound;
    r.outputs["equivalence_a"] = a.equivalence_a;
    r.outputs["equivalence_d"] = a.equivalence_d;
    r.tolerance = 0.0;
    r.verdict = verdict_of(a.alpha_b > 0.0 && a.alpha_b <= a.alpha_c && a.equivalence_a <= 1.0 &&
                           a.equivalence_d >= 1.0);
    report.add(r);
  }
  if (t.killing_timelike) {
    double worst = 0.0;
    Point3 where{};
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const Point3 p = samples.node(n);
      const MetricValues m = prob.metric.values(p);
      const double v = dot(mul(m.spatial, m.shift), m.shift) / (m.lapse * m.lapse);
      if (v > worst) {
        worst = v;
        where = p;
      }
    }
    Record r = make("conformal_shift_norm", "N^-2 g_ij N^i N^j < 1 where the Killing field is timelike");
    r.outputs["max"] = worst;
    r.outputs["at"] = point_json(where);
    r.tolerance = 1.0;
    r.verdict = verdict_of(worst < 1.0);
    report.add(r);
  }
  {
    const std::vector<Point3> pts = random_points(c.chart, rng, c.points, 0.0);
    Record r = make("determinant_identity", "|h| = |g00^-1| |g|");
    r.inputs["points"] = pts.size();
    r.tolerance = 1e-10;
    try {
      const DeterminantIdentityReport d = verify_determinant_identity(prob.metric, pts);
      r.residuals["max_relative"] = d.max_residual;
      r.outputs["worst_point"] = point_json(d.worst_point);
      r.verdict = verdict_of(d.max_residual <= 1e-10);
    } catch (const DegenerateError& e) {
      r.outputs["error"] = e.what();
      r.outputs["at"] = point_json(e.where());
      r.verdict = RecordVerdict::fail;
    }
    report.add(r);
  }
  {
    Record r = make("density_rho", "rho = sqrt(|det g4| / det h3); closed forms sqrt|g00| and sqrt|1/g00|");
    double consistency = 0.0, sq = 0.0, sqinv = 0.0;
    std::size_t used = 0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const Point3 p = samples.node(n);
      const MetricValues m = prob.metric.values(p);
      if (m.lapse * m.lapse - dot(mul(m.spatial, m.shift), m.shift) <= kDegenerateMargin) continue;
      const RhoDiagnostics d = rho_diagnostics(prob.metric, p);
      consistency = std::max(consistency, d.consistency_residual);
      sq = std::max(sq, d.sqrt_g00_residual);
      sqinv = std::max(sqinv, d.sqrt_inverse_g00_residual);
      ++used;
    }
    r.inputs["points"] = used;
    r.residuals["rho2_h_vs_g"] = consistency;
    r.residuals["closed_form_sqrt_g00"] = sq;
    r.residuals["closed_form_sqrt_inverse_g00"] = sqinv;
    r.tolerance = 1e-10;
    r.verdict = verdict_of(consistency <= 1e-10);
    report.add(r);
  }
  if (prob.kerr) {
    const KerrParams kp = *prob.kerr;
    Record r = make("ergoregion_sign", "sign of r^2 - 2Mr + a^2 cos^2 agrees with sign of g00");
    std::size_t inside = 0, surface = 0, inconsistent = 0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const ErgoResult e = ergoregion_test(kp, samples.node(n));
      inside += e.region == ErgoClass::inside;
      surface += e.region == ErgoClass::on_surface;
      inconsistent += !e.consistent;
    }
    r.outputs["inside"] = inside;
    r.outputs["on_surface"] = surface;
    r.outputs["inconsistent"] = inconsistent;
    r.inputs["band"] = kErgoBand;
    r.tolerance = 0.0;
    r.verdict = verdict_of(inconsistent == 0);
    report.add(r);

    Record l = make("lapse_candidates", "N^2 = -1/g^00 compared with Delta U / sigma^2 read as N and as N^2");
    double sq_res = 0.0, unsq = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const LapseDiagnostics d = lapse_diagnostics(kp, samples.node(n));
      sq_res = std::max(sq_res, d.squared_residual);
      unsq = std::max(unsq, d.unsquared_residual);
    }
    l.residuals["as_N_squared"] = sq_res;
    l.residuals["as_N"] = unsq;
    l.verdict = RecordVerdict::info;
    report.add(l);
  }
}

// ---------------------------------------------------------------- assemble

void run_assemble(const RunConfig& c, Report& report) {
  const Problem prob = build_problem(c);
  const SampleGrid samples{c.chart, c.samples};
  std::optional<SpatialOperator> op;
  try {
    op = assemble_w2(prob.metric, prob.m2, samples, OperatorForm::raw);
  } catch (const HypothesisError& e) {
    json out;
    out["hypothesis"] = e.hypothesis();
    out["witness"] = point_json(e.witness());
    report.fail("assemble_w2", "w^2 = -N^2 Delta_{mu,h} + N^2 m^2 needs N^2 - N_i N^i > 0", e.what(), out);
    return;
  }
  Record built = make("assemble_w2", "w^2 = -N^2 Delta_{mu,h} + N^2 m^2");
  built.verdict = RecordVerdict::pass;
  built.tolerance = 0.0;
  built.inputs["check_nodes"] = samples.size();
  report.add(built);

  std::mt19937_64 rng(c.seed);
  const SpatialOperator reduced = op->with_form(OperatorForm::reduced);
  double red_raw = 0.0, red_reduced = 0.0, agree = 0.0, conformal = 0.0, vres = 0.0, vmin = INFINITY;
  double f_scalar = 0.0, f_transport = 0.0;
  bool m2_nonnegative = true;
  for (int i = 0; i < c.points; ++i) {
    const ScalarField u = random_test_field(c.chart, rng);
    const Point3 p = random_point(c.chart, rng, 0.05);
    const ReductionCheck a = verify_reduction(*op, u, p);
    const ReductionCheck b = verify_reduction(reduced, u, p);
    red_raw = std::max(red_raw, a.residual);
    red_reduced = std::max(red_reduced, b.residual);
    agree = std::max(agree, std::abs(a.assembled - b.assembled) / a.scale);
    const Jet2 uj = u.jet(p);
    const double lap = apply_weighted_laplacian(op->base(), uj, p);
    const double lap_tilde = apply_weighted_laplacian(op->reduced(), uj, p);
    const double n = op->lapse().value(p);
    double lap_scale = 0.0;
    {
      const Sym3<double> hu = point_blocks(prob.metric, p).h_upper;
      for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) lap_scale += std::abs(at(hu, x, y) * uj.dd(x, y));
      lap_scale += std::abs(lap);
    }
    conformal = std::max(conformal, std::abs(lap_tilde - n * n * lap) / (n * n * lap_scale));
    const double m2 = prob.m2.value(p);
    const double v = op->potential().value(p);
    vres = std::max(vres, std::abs(v - n * n * m2) / std::max(std::abs(v), 1e-300));
    if (m2 < 0.0) m2_nonnegative = false;
    vmin = std::min(vmin, v);
    const FirstOrderTerms f = first_order_coefficient(prob.metric, p, u);
    f_scalar = std::max(f_scalar, std::abs(f.scalar_coefficient));
    f_transport = std::max(f_transport, std::abs(f.transport_term));
  }
  {
    Record r = make("reduction_raw", "w^2 u = (g^00)^-1 [(1/sqrt|g|) d_i(sqrt|g| g^ij d_j u) - m^2 u]");
    r.inputs["pairs"] = c.points;
    r.residuals["max_relative"] = red_raw;
    r.tolerance = 1e-8;
    r.verdict = verdict_of(red_raw <= 1e-8);
    report.add(r);
  }
  {
    Record r = make("reduction_reduced", "w^2 = -Delta_{mu~,h~} + V with h~ = N^-2 h, mu~ = N^-2 mu");
    r.inputs["pairs"] = c.points;
    r.residuals["max_relative"] = red_reduced;
    r.residuals["raw_vs_reduced"] = agree;
    r.tolerance = 1e-8;
    r.verdict = verdict_of(red_reduced <= 1e-8 && agree <= 1e-8);
    report.add(r);
  }
  {
    Record r = make("conformal_law", "Delta_{alpha mu, alpha h} = alpha^-1 Delta_{mu,h}, alpha = N^-2");
    r.residuals["max_relative"] = conformal;
    r.tolerance = 1e-8;
    r.verdict = verdict_of(conformal <= 1e-8);
    report.add(r);
  }
  {
    Record r = make("potential", "V = N^2 m^2, V >= 0 when m^2 >= 0");
    r.residuals["max_relative"] = vres;
    r.outputs["min_V"] = vmin;
    r.outputs["m2_nonnegative_sampled"] = m2_nonnegative;
    r.tolerance = 1e-12;
    r.verdict = verdict_of(vres <= 1e-12 && (!m2_nonnegative || vmin >= 0.0));
    report.add(r);
  }
  {
    Record r = make("first_order_coefficient",
                    "f = -(g^00 sqrt|g|)^-1 d_i(sqrt|g| g^00 N^i) - 2 N^i d_i");
    r.outputs["max_scalar_coefficient"] = f_scalar;
    r.outputs["max_transport_term"] = f_transport;
    bool shift_free = true;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const MetricValues m = prob.metric.values(samples.node(n));
      for (double s : m.shift)
        if (s != 0.0) shift_free = false;
    }
    r.inputs["shift_identically_zero_sampled"] = shift_free;
    if (shift_free) {
      r.tolerance = 0.0;
      r.verdict = verdict_of(f_scalar == 0.0 && f_transport == 0.0);
    }
    report.add(r);
  }
}

// ---------------------------------------------------------------- kerr-mode

void run_kerr_mode(const RunConfig& c, Report& report) {
  if (!is_kerr_family(c)) throw ConfigError("kerr-mode needs spacetime.family kerr or schwarzschild");
  const KerrParams kp = kerr_params(c);
  const ScalarField m2 = build_scalar(c, c.m2);
  const ModeOperator mo = mode_operator(kp, c.k, m2, c.chart);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> phi(0.0, 2.0 * M_PI);

  double conj = 0.0, imag = 0.0, sector = 0.0, disc = 0.0, disc_pred = 0.0, beta0 = 0.0;
  CsvTable& table = report.table("mode_compare.csv");
  table.header = {"r", "theta", "phi", "conjugation", "closed_form", "difference", "predicted"};
  for (int i = 0; i < c.points; ++i) {
    const ScalarField u = random_test_field(c.chart, rng, {true, true, false});
    const Point3 p = random_point(c.chart, rng, 0.05);
    const ConjugationCheck cc = conjugation_check(mo, u, p, phi(rng));
    conj = std::max(conj, cc.phi_residual);
    imag = std::max(imag, cc.imag_residual);
    sector = std::max(sector, std::abs(apply_mode_sector(mo, u, p) - cc.first.real()) / cc.scale);
    const double closed = apply_mode_closed_form(mo, u, p);
    const MetricValues m = mo.metric().values(p);
    const double n6 = std::pow(m.lapse, 6);
    const double predicted =
        static_cast<double>(c.k) * c.k * (0.25 * n6 - m.shift[2] * m.shift[2]) * u.value(p);
    const double diff = cc.first.real() - closed;
    disc = std::max(disc, std::abs(diff) / cc.scale);
    disc_pred = std::max(disc_pred, std::abs(diff - predicted) / cc.scale);
    beta0 = std::max(beta0, std::abs(mo.beta(p)));
    table.rows.push_back({csv_number(p[0]), csv_number(p[1]), csv_number(p[2]),
                          csv_number(cc.first.real()), csv_number(closed), csv_number(diff),
                          csv_number(predicted)});
  }
  {
    Record r = make("mode_conjugation", "e^{ik phi} w^2 (e^{-ik phi} u) is real and phi-independent");
    r.inputs["k"] = c.k;
    r.inputs["points"] = c.points;
    r.residuals["phi_independence"] = conj;
    r.residuals["imaginary_part"] = imag;
    r.tolerance = 1e-10;
    r.verdict = verdict_of(conj <= 1e-10 && imag <= 1e-10);
    report.add(r);
  }
  {
    Record r = make("mode_sector_form",
                    "w_k^2 = -N^2 Delta^{(r,theta)}_{mu,g} + k^2 (N^2 g^phiphi - (N^phi)^2) + V");
    r.residuals["max_relative"] = sector;
    r.tolerance = 1e-10;
    r.verdict = verdict_of(sector <= 1e-10);
    report.add(r);
  }
  {
    Record r = make("mode_closed_form_comparison",
                    "-Delta_{mu~,g~} - beta^2/4 + V with beta = k N^3, against the conjugation definition");
    r.residuals["max_relative_difference"] = disc;
    r.residuals["difference_minus_k2(N^6/4-(N^phi)^2)u"] = disc_pred;
    r.verdict = RecordVerdict::info;
    report.add(r);
  }
  if (c.k == 0) {
    Record r = make("mode_zero_beta", "beta = 0 for k = 0");
    r.outputs["max_abs_beta"] = beta0;
    r.tolerance = 0.0;
    r.verdict = verdict_of(beta0 == 0.0);
    report.add(r);
  }
  {
    // block reassembly against the direct expansion
    double worst = 0.0, ratio_min = INFINITY, identity = 0.0, measure = 0.0;
    const SampleGrid samples{c.chart, c.samples};
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const Point3 p = samples.node(n);
      const Mat4<double> direct = kerr_covariant(kp, p[0], p[1]);
      const Mat4<double> blocks = covariant_metric(mo.metric(), p);
      double scale = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) scale = std::max(scale, std::abs(direct[i][j]));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(direct[i][j] - blocks[i][j]) / scale);
      const KerrScalars<double> q = kerr_scalars(kp, p[0], p[1]);
      ratio_min = std::min(ratio_min, q.sigma2 / (q.U * q.U));
      identity = std::max(identity, sigma_ratio_identity_residual(kp, p[0], p[1]));
      const double n2 = mo.metric().values(p).lapse * mo.metric().values(p).lapse;
      const double expected = q.U * std::sin(p[1]) / n2;
      measure = std::max(measure, std::abs(measure_density(mo.reduced(), p) - expected) / expected);
    }
    Record r = make("kerr_blocks", "lapse, shift and g_ij reassemble the expanded Kerr line element");
    r.residuals["max_relative_entry"] = worst;
    r.tolerance = 1e-12;
    r.verdict = verdict_of(worst <= 1e-12);
    report.add(r);
    Record s = make("sigma_ratio", "sigma^2/U^2 = 1 + a^2 sin^2/U + 2Mr a^2 sin^2/U^2 >= 1");
    s.residuals["identity"] = identity;
    s.outputs["grid_min_ratio"] = ratio_min;
    s.tolerance = 1e-12;
    s.verdict = verdict_of(identity <= 1e-12 && ratio_min >= 1.0 - 1e-12);
    report.add(s);
    Record w = make("mode_measure", "density of N^-2 mu_g equals U sin(theta) / N^2");
    w.residuals["max_relative"] = measure;
    w.tolerance = 1e-10;
    w.verdict = verdict_of(measure <= 1e-10);
    report.add(w);
  }
}

// ---------------------------------------------------------------- complete

void add_divergence_rows(CsvTable& t, const std::string& probe, const std::vector<double>& x,
                         const std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) t.rows.push_back({probe, csv_number(x[i]), csv_number(y[i])});
}

void run_complete(const RunConfig& c, Report& report) {
  const Problem prob = build_problem(c);
  const SampleGrid samples{c.chart, c.samples};
  CsvTable& div = report.table("divergence.csv");
  div.header = {"probe", "epsilon", "length"};
  CsvTable& geo = report.table("geodesics.csv");
  geo.header = {"run", "affine", "x1", "x2", "x3"};

  const TimelikeReport t = check_assumption_timelike(prob.metric, samples);
  if (!t.killing_timelike) {
    json out;
    out["witness"] = point_json(*t.first_violation);
    report.fail("timelike_killing", "h~ = N^-2 h needs N^2 - N_i N^i > 0",
                "Killing field not timelike on the chart", out);
  } else {
    const SpatialOperator op = assemble_w2(prob.metric, prob.m2, samples, OperatorForm::reduced);
    const SymMetricField h_tilde = op.reduced().metric();
    GeodesicOptions go;
    go.chart = c.chart;
    go.sample_every = 10;
    go.abs_tol = go.rel_tol = 1e-13;
    const Point3 center = c.chart.center();
    const Sym3<double> hc = h_tilde.value(center);
    double drift = 0.0;
    int failures = 0, run_id = 0;
    Record r = make("geodesics_reduced_metric", "geodesics of h~ from the chart center, unit speed");
    json runs = json::array();
    for (int axis = 0; axis < 3; ++axis)
      for (int sign : {-1, 1}) {
        Point3 v{0.0, 0.0, 0.0};
        v[axis] = sign / std::sqrt(at(hc, axis, axis));
        const GeodesicRun run = integrate_geodesic(h_tilde, center, v, c.span, go);
        drift = std::max(drift, run.max_speed_drift);
        failures += run.termination == Termination::step_failure;
        json rj;
        rj["direction"] = point_json(v);
        rj["termination"] = to_string(run.termination);
        rj["end_time"] = run.end_time;
        rj["exit_face"] = run.exit_face;
        runs.push_back(rj);
        for (std::size_t i = 0; i < run.path.size(); ++i)
          geo.rows.push_back({std::to_string(run_id), csv_number(run.times[i]),
                              csv_number(run.path[i][0]), csv_number(run.path[i][1]),
                              csv_number(run.path[i][2])});
        ++run_id;
      }
    r.inputs["span"] = c.span;
    r.outputs["runs"] = runs;
    r.outputs["statement"] = failures == 0
                                 ? "no incompleteness witness inside the chart"
                                 : "integration broke down inside the chart";
    r.residuals["max_speed_drift"] = drift;
    r.tolerance = 1e-8;
    r.verdict = verdict_of(failures == 0 && drift <= 1e-8);
    report.add(r);

    const PsdReport psd = psd_difference(h_tilde, conformal_spatial_field(prob.metric), samples);
    Record p = make("reduced_minus_conformal_psd", "h~ - N^-2 g is positive semidefinite");
    p.outputs["worst_eigenvalue"] = psd.worst_eigenvalue;
    p.outputs["at"] = point_json(psd.worst_point);
    p.tolerance = kPsdTolerance;
    p.verdict = verdict_of(psd.psd);
    report.add(p);

    Record cm = make("completion_metrics",
                     "k = N^2 g + N_i N_j, k~ = g + N^-2 N_i N_j, h - k~ >= 0, alpha_B^2 k~ <= k <= alpha_C^2 k~");
    try {
      const CompletionReport cr = build_completion(prob.metric, samples);
      cm.outputs["max_conformal_shift_norm"] = cr.max_shift_norm;
      cm.outputs["h_minus_k_tilde_worst_eigenvalue"] = cr.h_minus_k_tilde.worst_eigenvalue;
      cm.outputs["lapse_min"] = cr.lapse_min;
      cm.outputs["lapse_max"] = cr.lapse_max;
      cm.outputs["k_over_k_tilde"] = json::array({cr.k_vs_k_tilde.lower, cr.k_vs_k_tilde.upper});
      cm.outputs["squared_lapse_bounds_hold"] = cr.squared_lapse_bounds_hold;
      cm.outputs["unsquared_lapse_bounds_hold"] = cr.unsquared_lapse_bounds_hold;
      cm.residuals["h_tilde_forms"] = cr.h_tilde_forms_residual;
      cm.tolerance = 1e-10;
      cm.verdict = verdict_of(cr.h_minus_k_tilde.psd && cr.squared_lapse_bounds_hold &&
                              cr.h_tilde_forms_residual <= 1e-10);
    } catch (const HypothesisError& e) {
      cm.outputs["refused"] = e.what();
      cm.outputs["witness"] = point_json(e.witness());
      cm.verdict = RecordVerdict::fail;
    }
    report.add(cm);
  }

  if (c.gamma_given) {
    const GammaCompletion gc = gamma_completion(prob.metric, build_scalar(c, c.gamma));
    double fmin = INFINITY, wmax = -INFINITY, wmin = INFINITY;
    for (std::size_t n = 0; n < samples.size(); ++n) {
      const Point3 p = samples.node(n);
      fmin = std::min(fmin, gc.conformal_factor.value(p));
      wmax = std::max(wmax, gc.warped_factor.value(p));
      wmin = std::min(wmin, gc.warped_factor.value(p));
    }
    Record r = make("gamma_completion", "N^-2 exp(|grad gamma|^2_g) g with warped factor exp(-|grad gamma|^2_g)");
    r.inputs["gamma"] = c.gamma;
    r.inputs["properness"] = "assumed, not checkable on a bounded chart";
    r.outputs["min_conformal_factor"] = fmin;
    r.outputs["warped_factor_range"] = json::array({wmin, wmax});
    r.tolerance = 0.0;
    r.verdict = verdict_of(fmin >= 1.0 && wmin > 0.0 && wmax <= 1.0);
    report.add(r);
  }

  if (prob.kerr) {
    const KerrParams kp = *prob.kerr;
    const double r1 = kp.r_plus();
    const double r2 = kp.M - std::sqrt(kp.M * kp.M - kp.a * kp.a);
    const double r0 = c.chart.hi[0];
    // sqrt(c) = r^2/Delta = r^2 / ((r - r1)(r - r2)); its pole at r1 has
    // residue r1^2/(r1 - r2), the slope of L against log(1/eps).
    const double oracle = r1 * r1 / (r1 - r2);
    auto radial = [kp](double r) {
      const double delta = r * r - 2.0 * kp.M * r + kp.a * kp.a;
      return r * r * r * r / (delta * delta);
    };
    const DivergenceFit fit = radial_divergence_probe(radial, r1, r0);
    add_divergence_rows(div, "horizon", fit.epsilons, fit.lengths);
    Record d = make("radial_divergence", "int sqrt(c) dr with sqrt(c) = r^2/Delta diverges at the horizon");
    d.inputs["r1"] = r1;
    d.inputs["r0"] = r0;
    d.outputs["slope"] = fit.slope;
    d.outputs["oracle_slope"] = oracle;
    d.outputs["r_squared"] = fit.r_squared;
    d.outputs["monotone"] = fit.monotone;
    d.residuals["slope_relative"] = std::abs(fit.slope - oracle) / oracle;
    d.tolerance = 0.02;
    d.verdict = verdict_of(fit.diverges && std::abs(fit.slope - oracle) <= 0.02 * oracle &&
                           fit.r_squared >= kDivergenceMinRSquared);
    report.add(d);

    const DivergenceFit flat = radial_divergence_probe([](double) { return 1.0; }, r1, r0);
    add_divergence_rows(div, "flat_control", flat.epsilons, flat.lengths);
    Record f = make("radial_divergence_control", "int 1 dr stays bounded");
    f.outputs["slope"] = flat.slope;
    f.outputs["diverges"] = flat.diverges;
    f.tolerance = 1e-3;
    f.verdict = verdict_of(!flat.diverges && std::abs(flat.slope) <= 1e-3);
    report.add(f);

    std::vector<double> radii;
    for (double s : {10.0, 100.0, 1000.0, 10000.0}) radii.push_back(s * r0);
    const OutwardProbe out = outward_divergence_probe(radial, r0, radii);
    add_divergence_rows(div, "outward", out.radii, out.lengths);
    Record o = make("outward_divergence", "int^R r^2/Delta dr grows without bound");
    o.outputs["growth_rate"] = out.growth_rate;
    o.outputs["unbounded"] = out.unbounded;
    o.verdict = verdict_of(out.unbounded);
    o.tolerance = kDivergenceMinSlope;
    report.add(o);

    // inward radial shots on the comparison metric
    const SymMetricField ghat = hat_metric(kp);
    const Point3 x0{std::clamp(3.0 * kp.M, c.chart.lo[0], r0), M_PI / 2, c.chart.center()[2]};
    const double grr = ghat.value(x0)[sym_index(0, 0)];
    std::vector<double> times;
    bool monotone = true;
    double worst_oracle = 0.0;
    for (double eps : kDefaultEpsilons) {
      GeodesicOptions go;
      go.abs_tol = go.rel_tol = 1e-13;
      go.chart = Box{{r1 + eps, 1e-3, -1e6}, {1e6, M_PI - 1e-3, 1e6}};
      go.sample_every = 0;
      const GeodesicRun run = integrate_geodesic(ghat, x0, {-1.0 / std::sqrt(grr), 0.0, 0.0}, 1e4, go);
      const double length = segment_length(ghat, x0, {r1 + eps, M_PI / 2, x0[2]});
      if (run.termination != Termination::left_chart || run.exit_face != 0) monotone = false;
      if (!times.empty() && !(run.end_time > times.back())) monotone = false;
      times.push_back(run.end_time);
      worst_oracle = std::max(worst_oracle, std::abs(run.end_time - length) / length);
    }
    add_divergence_rows(div, "hat_metric_inward_shot", kDefaultEpsilons, times);
    Record g = make("hat_metric_inward_shots",
                    "affine length to reach r1 + eps on sigma^2/Delta^2 dr^2 + sigma^2/Delta (dtheta^2 + sin^2 dphi^2)");
    g.outputs["affine_lengths"] = times;
    g.outputs["monotone_growth"] = monotone;
    g.residuals["vs_length_integral"] = worst_oracle;
    g.tolerance = 1e-4;
    g.verdict = verdict_of(monotone && worst_oracle <= 1e-4);
    report.add(g);

    SampleGrid eq_grid = samples;
    const EquivalenceReport eq = equivalence_constants(conformal_spatial_field(prob.metric), ghat, eq_grid);
    Record e = make("comparison_equivalence", "e g^ <= N^-2 g <= f g^ with e = 1");
    e.outputs["e"] = eq.lower;
    e.outputs["f"] = eq.upper;
    e.outputs["f_at"] = point_json(eq.upper_witness);
    e.tolerance = 1e-12;
    e.verdict = verdict_of(eq.lower >= 1.0 - 1e-12 && std::isfinite(eq.upper));
    report.add(e);
  }
}

// ---------------------------------------------------------------- spectrum

void run_spectrum(const RunConfig& c, Report& report) {
  const Problem prob = build_problem(c);
  std::optional<FluxForm> form;
  std::optional<ModeOperator> mo;
  if (c.route == "mode") {
    if (!prob.kerr) throw ConfigError("run.route = mode needs a Kerr or Schwarzschild spacetime");
    mo = mode_operator(*prob.kerr, c.k, prob.m2, c.chart);
    form = flux_form(*mo);
  } else {
    try {
      form = flux_form(assemble_w2(prob.metric, prob.m2, SampleGrid{c.chart, c.samples},
                                   OperatorForm::reduced));
    } catch (const HypothesisError& e) {
      json out;
      out["witness"] = point_json(e.witness());
      report.fail("assemble_w2", "discretization of -Delta_{mu~,h~} + V needs N^2 - N_i N^i > 0",
                  e.what(), out);
      return;
    }
  }
  const StructuredGrid grid = make_grid(*form, c.grid);
  Timer t;
  const DiscreteOperator dop = discretize(*form, grid);
  report.time("discretize", t.seconds());
  std::mt19937_64 rng(c.seed);
  {
    const double sym = symmetry_residual(dop, 20, rng);
    Record r = make("discrete_symmetry", "<Au, v>_w = <u, Av>_w for the flux-form matrix");
    r.inputs["unknowns"] = dop.size();
    r.inputs["intervals"] = grid.intervals;
    r.residuals["max_relative"] = sym;
    r.tolerance = 1e-12;
    r.verdict = verdict_of(sym <= 1e-12);
    report.add(r);
  }
  if (c.export_matrix) {
    std::ostringstream coo;
    dop.write_coo(coo);
    report.attach("matrix.coo", coo.str());
  }
  EigenOptions eo;
  eo.seed = c.seed;
  Timer te;
  const int count = std::min<int>(c.eigen_count, static_cast<int>(dop.size()));
  const EigenResult er = smallest_eigenvalues(dop, count, eo);
  report.time("eigensolve", te.seconds());
  CsvTable& table = report.table("eigenvalues.csv");
  table.header = {"index", "eigenvalue", "residual"};
  double worst_res = 0.0, worst_orth = 0.0;
  for (int i = 0; i < count; ++i) {
    table.rows.push_back({std::to_string(i), csv_number(er.values[i]), csv_number(er.residuals[i])});
    worst_res = std::max(worst_res, er.residuals[i]);
    for (int j = 0; j < i; ++j) worst_orth = std::max(worst_orth, std::abs(dop.inner(er.vectors[i], er.vectors[j])));
  }
  {
    Record r = make("smallest_eigenvalues", "lowest eigenvalues of A in L^2(w), |Av - lambda v|_w <= tol |v|_w");
    r.outputs["eigenvalues"] = er.values;
    r.outputs["shift"] = er.shift;
    r.outputs["restarts"] = er.restarts;
    r.residuals["max_residual"] = worst_res;
    r.residuals["max_w_orthogonality"] = worst_orth;
    r.tolerance = 1e-8;
    r.verdict = verdict_of(worst_res <= 1e-8 && worst_orth <= 1e-8);
    report.add(r);
  }
  if (c.spacetime.family == "minkowski" && constant_on_chart(prob.m2, c.chart)) {
    double ref = prob.m2.value(c.chart.center());
    for (int a = 0; a < 3; ++a) ref += M_PI * M_PI / (c.chart.extent(a) * c.chart.extent(a));
    Record r = make("dirichlet_reference", "flat box: lambda_1 = pi^2 sum L_i^-2 + m^2");
    r.outputs["reference"] = ref;
    r.outputs["computed"] = er.values[0];
    r.residuals["relative"] = std::abs(er.values[0] - ref) / std::abs(ref);
    r.tolerance = 0.02;
    r.verdict = verdict_of(std::abs(er.values[0] - ref) <= 0.02 * std::abs(ref));
    report.add(r);
  }
  if (mo) {
    double bound = 0.0, vminus = 0.0;
    for (std::size_t p = 0; p < grid.unknowns(); ++p) {
      const Point3 x = grid.position(grid.unflatten(p));
      const double b = mo->beta_comparison(x);
      bound = std::max(bound, 0.25 * b * b);
      vminus = std::min(vminus, mo->potential().value(x));
    }
    Record r = make("mode_semi_bounded", "lambda_min >= -max(beta_c^2/4) + min(V_-), beta_c = 2k|N^phi|");
    r.outputs["smallest"] = er.values[0];
    r.outputs["lower_bound"] = -bound + vminus;
    r.tolerance = 1e-6;
    r.verdict = verdict_of(er.values[0] >= -bound + vminus - 1e-6);
    report.add(r);
  }
}

// ---------------------------------------------------------------- certify

void run_certify(const RunConfig& c, Report& report) {
  const Problem prob = build_problem(c);
  CertifyOptions opts;
  opts.ladder.clear();
  for (int n : c.ladder) opts.ladder.push_back({n, n, n});
  opts.sample_counts = c.samples;
  opts.geodesic_span = c.span;
  opts.eigen.seed = c.seed;
  SACertificate cert;
  if (c.route == "mode") {
    if (!prob.kerr) throw ConfigError("run.route = mode needs a Kerr or Schwarzschild spacetime");
    cert = sa_certificate(mode_operator(*prob.kerr, c.k, prob.m2, c.chart), opts);
  } else {
    cert = sa_certificate(prob.metric, prob.m2, opts);
  }
  for (const CertificateCheck& ch : cert.checks) {
    Record r = make(ch.name, "hypothesis of the self-adjointness certificate");
    r.outputs["detail"] = ch.detail;
    r.outputs["conclusive"] = ch.conclusive;
    if (ch.witness) r.outputs["witness"] = point_json(*ch.witness);
    r.verdict = ch.passed ? (ch.name == "timelike_killing_info" ? RecordVerdict::info : RecordVerdict::pass)
                          : RecordVerdict::fail;
    if (ch.name != "timelike_killing_info") r.tolerance = 0.0;
    report.add(r);
  }
  CsvTable& ritz = report.table("ritz.csv");
  ritz.header = {"n1", "n2", "n3", "smallest", "residual"};
  for (const RitzLevel& l : cert.ritz)
    ritz.rows.push_back({std::to_string(l.intervals[0]), std::to_string(l.intervals[1]),
                         std::to_string(l.intervals[2]), csv_number(l.smallest), csv_number(l.residual)});
  Record v = make("sa_certificate", "complete reduced metric, V = V+ + V-, semi-bounded below");
  v.inputs["route"] = c.route;
  v.outputs["verdict"] = to_string(cert.verdict);
  v.outputs["summary"] = cert.summary;
  if (!cert.failed_hypothesis.empty()) v.outputs["failed_hypothesis"] = cert.failed_hypothesis;
  if (cert.witness) v.outputs["witness"] = point_json(*cert.witness);
  v.outputs["v_plus_min"] = cert.v_plus_min;
  v.outputs["v_minus_max"] = cert.v_minus_max;
  v.outputs["v_l2_mu"] = cert.v_l2_mu;
  v.outputs["v_l2_mu_tilde"] = cert.v_l2_mu_tilde;
  if (!cert.ritz.empty()) v.outputs["ritz_lower_bound"] = cert.lower_bound;
  v.tolerance = 0.0;
  v.verdict = verdict_of(cert.verdict == Verdict::hypotheses_supported);
  report.add(v);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"check", "assemble", "kerr-mode", "complete", "spectrum", "certify"};
  return names;
}

Report run_command(const std::string& command, const RunConfig& config) {
  Report report(command, config.echo, config.seed);
  Timer total;
  try {
    if (command == "check") run_check(config, report);
    else if (command == "assemble") run_assemble(config, report);
    else if (command == "kerr-mode") run_kerr_mode(config, report);
    else if (command == "complete") run_complete(config, report);
    else if (command == "spectrum") run_spectrum(config, report);
    else if (command == "certify") run_certify(config, report);
    else throw ConfigError("unknown command " + command);
  } catch (const ConfigError&) {
    throw;
  } catch (const HypothesisError& e) {
    json out;
    out["hypothesis"] = e.hypothesis();
    out["witness"] = point_json(e.witness());
    report.fail(command, "hypothesis check", e.what(), out);
  } catch (const DegenerateError& e) {
    json out;
    out["at"] = point_json(e.where());
    report.fail(command, "nondegenerate geometry", e.what(), out);
  } catch (const DomainError& e) {
    json out;
    out["node"] = e.node();
    report.fail(command, "expression domain", e.what(), out);
  } catch (const ConvergenceError& e) {
    report.fail(command, "iterative solver convergence", e.what());
  }
  report.time("total", total.seconds());
  return report;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Stationary Klein-Gordon operator checks", "kgsa"};
  app.footer(config_help());
  std::string command, config_path, out_dir = "kgsa_out", grid;
  unsigned long long seed = 0;
  app.add_option("command", command, "check | assemble | kerr-mode | complete | spectrum | certify")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "INI or JSON configuration")->required();
  app.add_option("--out", out_dir, "output directory for reports");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides run.seed");
  auto* grid_opt = app.add_option("--grid", grid, "grid intervals NxNxN, overrides grid.counts");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (*seed_opt) {
      config.seed = seed;
      config.echo["run"]["seed"] = seed;
    }
    if (*grid_opt) {
      config.grid = parse_grid(grid);
      config.echo["grid"]["counts"] = config.grid;
      config.ladder = {std::max(2, config.grid[0] / 2), config.grid[0]};
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const Report report = run_command(command, config);
    for (const std::string& path : report.write(out_dir)) std::cout << "wrote " << path << '\n';
    for (const Record& r : report.records())
      std::cout << to_string(r.verdict) << "  " << r.name << '\n';
    return report.passed() ? kExitPass : kExitHypothesis;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace kgsa::cli
