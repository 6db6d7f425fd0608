#include "kgsa/completeness.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace kgsa {

Christoffel christoffel(const SymMetricField& g, const Point3& p) {
  const SymJet gj = g.jets(p);
  const Sym3<double> gv = values(gj);
  if (!is_positive_definite(gv)) throw DegenerateError("metric is not positive definite", p);
  const Sym3<double> inv = inverse3(gv, det3(gv));
  // first[l][sym(i,j)] = (d_i g_lj + d_j g_li - d_l g_ij) / 2
  std::array<Sym3<double>, 3> first{};
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        first[l][sym_index(i, j)] = 0.5 * (gj[sym_index(l, j)].grad[i] +
                                           gj[sym_index(l, i)].grad[j] -
                                           gj[sym_index(i, j)].grad[l]);
  Christoffel gamma{};
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 6; ++s) {
      double acc = 0.0;
      for (int l = 0; l < 3; ++l) acc += at(inv, k, l) * first[l][s];
      gamma[k][s] = acc;
    }
  return gamma;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::completed_span: return "completed_span";
    case Termination::left_chart: return "left_chart";
    case Termination::step_failure: return "step_failure";
  }
  return "?";
}

namespace {

using State = std::array<double, 6>;

double speed(const SymMetricField& g, const State& s) {
  const Sym3<double> m = g.value({s[0], s[1], s[2]});
  const Vec3T<double> v{s[3], s[4], s[5]};
  return std::sqrt(dot(mul(m, v), v));
}

int outside_face(const Box& box, const State& s) {
  for (int a = 0; a < 3; ++a) {
    if (s[a] < box.lo[a]) return 2 * a;
    if (s[a] > box.hi[a]) return 2 * a + 1;
  }
  return -1;
}

}  // namespace

GeodesicRun integrate_geodesic(const SymMetricField& g, const Point3& x0, const Point3& v0,
                               double span, const GeodesicOptions& options) {
  namespace odeint = boost::numeric::odeint;
  GeodesicRun run;
  run.x0 = x0;
  run.v0 = v0;
  run.span = span;
  if (v0[0] == 0.0 && v0[1] == 0.0 && v0[2] == 0.0) throw Error("initial velocity is zero");
  if (!options.chart.contains(x0)) throw Error("initial point outside chart " + format_point(x0));

  auto rhs = [&g](const State& s, State& ds, double) {
    const Christoffel gamma = christoffel(g, {s[0], s[1], s[2]});
    for (int k = 0; k < 3; ++k) {
      ds[k] = s[3 + k];
      double acc = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc += at(gamma[k], i, j) * s[3 + i] * s[3 + j];
      ds[3 + k] = -acc;
    }
  };

  auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol,
                                         odeint::runge_kutta_dopri5<State>());
  State s{x0[0], x0[1], x0[2], v0[0], v0[1], v0[2]};
  double t = 0.0;
  double dt = std::min(options.initial_step, span);
  run.initial_speed = speed(g, s);
  run.times.push_back(0.0);
  run.path.push_back(x0);

  auto finish = [&](Termination term) {
    run.termination = term;
    run.end_time = t;
    run.end_point = {s[0], s[1], s[2]};
    return run;
  };

  std::size_t accepted = 0;
  while (t < span) {
    if (run.steps++ >= options.max_steps) {
      run.failure = "step limit reached";
      return finish(Termination::step_failure);
    }
    dt = std::min(dt, span - t);
    State trial = s;
    double t_trial = t;
    double dt_trial = dt;
    odeint::controlled_step_result r;
    try {
      r = stepper.try_step(rhs, trial, t_trial, dt_trial);
    } catch (const DegenerateError& e) {
      // the trial stage left the metric's domain: shrink
      r = odeint::fail;
      dt_trial = dt * 0.5;
    }
    if (r == odeint::fail) {
      dt = dt_trial;
      if (dt < options.min_step) {
        run.failure = "step size collapsed";
        return finish(Termination::step_failure);
      }
      continue;
    }
    const int face = outside_face(options.chart, trial);
    if (face >= 0) {
      // Approach the face by halving; once the overshooting step is a tiny
      // displacement, interpolate the crossing linearly.
      const int axis = face / 2;
      const double bound = (face % 2) ? options.chart.hi[axis] : options.chart.lo[axis];
      const double moved = trial[axis] - s[axis];
      if (std::abs(moved) <= 1e-10 * std::max(1.0, std::abs(bound)) || dt < options.min_step) {
        const double frac = moved != 0.0 ? std::clamp((bound - s[axis]) / moved, 0.0, 1.0) : 1.0;
        for (int i = 0; i < 6; ++i) s[i] += frac * (trial[i] - s[i]);
        t += frac * (t_trial - t);
        run.exit_face = face;
        return finish(Termination::left_chart);
      }
      dt *= 0.5;
      continue;
    }
    s = trial;
    t = t_trial;
    dt = dt_trial;
    ++accepted;
    run.max_speed_drift =
        std::max(run.max_speed_drift, std::abs(speed(g, s) - run.initial_speed) / run.initial_speed);
    if (options.sample_every > 0 && accepted % options.sample_every == 0) {
      run.times.push_back(t);
      run.path.push_back({s[0], s[1], s[2]});
    }
  }
  return finish(Termination::completed_span);
}

double integrate_toward_lower(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(b > a)) return 0.0;
  // Integrate in s = x - a so that nodes near a keep full precision, over
  // [0, w], [w, 2 w], [2 w, 4 w], ...
  auto shifted = [&f, a](double s) { return f(a + s); };
  const double length = b - a;
  double total = 0.0, error = 0.0;
  double lo = 0.0;
  while (lo < length) {
    const double hi = std::min(length, std::max(length * 1e-12, 2.0 * lo));
    // Each piece is mapped to [0, 1]: the library's error estimate is not
    // rescaled for subintervals, so this keeps it an upper bound.
    const double w = hi - lo;
    auto unit = [&shifted, lo, w](double t) { return w * shifted(lo + w * t); };
    double err = 0.0;
    const double piece = gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, 6, 1e-14, &err);
    if (!std::isfinite(piece))
      throw ConvergenceError("quadrature produced a non-finite value near " + std::to_string(a + lo));
    total += piece;
    error += err;
    lo = hi;
  }
  if (error > 1e-9 * std::abs(total))
    throw ConvergenceError("quadrature error estimate " + std::to_string(error) + " on [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
  return total;
}

double segment_length(const SymMetricField& g, const Point3& from, const Point3& to) {
  const Vec3T<double> d{to[0] - from[0], to[1] - from[1], to[2] - from[2]};
  // parametrize by s = distance (in parameter) from `to`
  auto integrand = [&](double s) {
    const Point3 x{to[0] - s * d[0], to[1] - s * d[1], to[2] - s * d[2]};
    return std::sqrt(dot(mul(g.value(x), d), d));
  };
  return integrate_toward_lower(integrand, 0.0, 1.0);
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

DivergenceFit radial_divergence_probe(const std::function<double(double)>& c, double r1, double r0,
                                      const std::vector<double>& epsilons) {
  if (epsilons.size() < 2) throw Error("divergence probe needs at least two epsilons");
  DivergenceFit fit;
  fit.epsilons = epsilons;
  auto root = [&c](double r) {
    const double v = c(r);
    if (!(v > 0.0)) throw DegenerateError("radial coefficient is not positive", {r, 0.0, 0.0});
    return std::sqrt(v);
  };
  std::vector<double> logs;
  for (double eps : epsilons) {
    if (!(r1 + eps < r0)) throw Error("epsilon exceeds the radial window");
    fit.lengths.push_back(integrate_toward_lower(root, r1 + eps, r0));
    logs.push_back(std::log(1.0 / eps));
  }
  const LineFit lf = fit_line(logs, fit.lengths);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r_squared;
  fit.monotone = true;
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    const bool smaller = epsilons[i] < epsilons[i - 1];
    const bool longer = fit.lengths[i] > fit.lengths[i - 1];
    if (smaller != longer) fit.monotone = false;
  }
  fit.diverges = fit.monotone && fit.slope > kDivergenceMinSlope &&
                 fit.r_squared >= kDivergenceMinRSquared;
  return fit;
}

OutwardProbe outward_divergence_probe(const std::function<double(double)>& c, double r_in,
                                      const std::vector<double>& radii) {
  OutwardProbe probe;
  probe.radii = radii;
  auto root = [&c](double r) { return std::sqrt(c(r)); };
  double lo = r_in, acc = 0.0;
  for (double R : radii) {
    if (!(R > lo)) throw Error("outward radii must increase");
    acc += integrate_toward_lower(root, lo, R);
    probe.lengths.push_back(acc);
    lo = R;
  }
  probe.growth_rate = fit_line(radii, probe.lengths).slope;
  probe.unbounded = probe.growth_rate > kDivergenceMinSlope;
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(probe.lengths[i] > probe.lengths[i - 1])) probe.unbounded = false;
  return probe;
}

EquivalenceReport equivalence_constants(const SymMetricField& a, const SymMetricField& b,
                                        const SampleGrid& grid) {
  EquivalenceReport rep;
  rep.lower = INFINITY;
  rep.upper = -INFINITY;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const Sym3<double> av = a.value(p), bv = b.value(p);
    if (!is_positive_definite(av) || !is_positive_definite(bv))
      throw DegenerateError("metric comparison needs positive definite metrics", p);
    const auto [lo, hi] = generalized_eigen_range(av, bv);
    if (lo < rep.lower) {
      rep.lower = lo;
      rep.lower_witness = p;
    }
    if (hi > rep.upper) {
      rep.upper = hi;
      rep.upper_witness = p;
    }
    ++rep.nodes;
  }
  return rep;
}

PsdReport psd_difference(const SymMetricField& a, const SymMetricField& b, const SampleGrid& grid) {
  PsdReport rep;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const Sym3<double> av = a.value(p), bv = b.value(p);
    Sym3<double> d;
    for (int k = 0; k < 6; ++k) d[k] = av[k] - bv[k];
    const double ev = min_eigenvalue(d);
    if (ev < rep.worst_eigenvalue) {
      rep.worst_eigenvalue = ev;
      rep.worst_point = p;
    }
    ++rep.nodes;
  }
  rep.psd = rep.worst_eigenvalue >= -kPsdTolerance;
  return rep;
}

namespace {

template <class T>
Sym3<T> plus_outer(const Sym3<T>& g, const T& c, const Vec3T<T>& v) {
  Sym3<T> r = g;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) r[sym_index(i, j)] = r[sym_index(i, j)] + c * v[i] * v[j];
  return r;
}

template <class T>
struct CompletionPoint {
  Sym3<T> k, k_tilde, h, h_tilde, h_tilde_expanded;
};

template <class T>
CompletionPoint<T> completion_at(const T& lapse, const Vec3T<T>& shift, const Sym3<T>& g) {
  const Vec3T<T> down = mul(g, shift);
  const T n2 = lapse * lapse;
  const T inv_n2 = T(1.0) / n2;
  const T shift2 = dot(down, shift);       // N_k N^k
  const T norm_tilde = inv_n2 * shift2;    // g~_ij N^i N^j
  CompletionPoint<T> c;
  c.k = plus_outer(scaled(g, n2), T(1.0), down);
  c.k_tilde = plus_outer(g, inv_n2, down);
  c.h = plus_outer(g, inv_n2 / (T(1.0) - norm_tilde), down);
  c.h_tilde = scaled(c.h, inv_n2);
  c.h_tilde_expanded =
      plus_outer(scaled(g, inv_n2), inv_n2 * inv_n2 / (T(1.0) - inv_n2 * shift2), down);
  return c;
}

SymMetricField completion_field(const StationaryMetric& metric,
                                Sym3<Jet2> CompletionPoint<Jet2>::*jm,
                                Sym3<double> CompletionPoint<double>::*vm) {
  return SymMetricField(
      [metric, jm](const Point3& p) {
        const MetricJets m = metric.jets(p);
        return completion_at(m.lapse, m.shift, m.spatial).*jm;
      },
      [metric, vm](const Point3& p) {
        const MetricValues m = metric.values(p);
        return completion_at(m.lapse, m.shift, m.spatial).*vm;
      });
}

}  // namespace

CompletionMetrics completion_metrics(const StationaryMetric& metric) {
  return {completion_field(metric, &CompletionPoint<Jet2>::k, &CompletionPoint<double>::k),
          completion_field(metric, &CompletionPoint<Jet2>::k_tilde,
                           &CompletionPoint<double>::k_tilde),
          completion_field(metric, &CompletionPoint<Jet2>::h, &CompletionPoint<double>::h),
          completion_field(metric, &CompletionPoint<Jet2>::h_tilde,
                           &CompletionPoint<double>::h_tilde),
          completion_field(metric, &CompletionPoint<Jet2>::h_tilde_expanded,
                           &CompletionPoint<double>::h_tilde_expanded)};
}

CompletionReport build_completion(const StationaryMetric& metric, const SampleGrid& grid,
                                  CompletionMetrics* out) {
  CompletionReport rep;
  rep.lapse_min = INFINITY;
  rep.lapse_max = -INFINITY;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const MetricValues m = metric.values(p);
    const double norm = dot(mul(m.spatial, m.shift), m.shift) / (m.lapse * m.lapse);
    if (!(norm < 1.0))
      throw HypothesisError("shift_bound", "|N|^2 in N^-2 g is " + std::to_string(norm), p);
    if (norm > rep.max_shift_norm) {
      rep.max_shift_norm = norm;
      rep.max_shift_point = p;
    }
    rep.lapse_min = std::min(rep.lapse_min, m.lapse);
    rep.lapse_max = std::max(rep.lapse_max, m.lapse);
  }
  CompletionMetrics cm = completion_metrics(metric);
  rep.h_minus_k_tilde = psd_difference(cm.h, cm.k_tilde, grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Point3 p = grid.node(n);
    const Sym3<double> a = cm.h_tilde.value(p), b = cm.h_tilde_expanded.value(p);
    double diff = 0.0, scale = 0.0;
    for (int k = 0; k < 6; ++k) {
      diff = std::max(diff, std::abs(a[k] - b[k]));
      scale = std::max(scale, std::abs(a[k]));
    }
    rep.h_tilde_forms_residual = std::max(rep.h_tilde_forms_residual, diff / scale);
  }
  rep.k_vs_k_tilde = equivalence_constants(cm.k, cm.k_tilde, grid);
  const double slack = 1e-12;
  auto within = [&](double lo, double hi) {
    return rep.k_vs_k_tilde.lower >= lo * (1.0 - slack) &&
           rep.k_vs_k_tilde.upper <= hi * (1.0 + slack);
  };
  rep.squared_lapse_bounds_hold = within(rep.lapse_min * rep.lapse_min, rep.lapse_max * rep.lapse_max);
  rep.unsquared_lapse_bounds_hold = within(rep.lapse_min, rep.lapse_max);
  if (out) *out = cm;
  return rep;
}

namespace {

// |grad gamma|^2_g with exact value and gradient.
Jet2 gradient_norm2_first_order(const SymMetricField& g, const ScalarField& gamma, const Point3& p) {
  const SymJet gj = g.jets(p);
  const Sym3<Jet2> inv = inverse3(gj, det3(gj));
  const Jet2 gm = gamma.jet(p);
  Vec3T<Jet2> dg;
  for (int i = 0; i < 3; ++i) {
    Jet2 d(gm.grad[i]);
    for (int k = 0; k < 3; ++k) d.grad[k] = gm.dd(i, k);
    dg[i] = d;
  }
  Jet2 q(0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q += at(inv, i, j) * dg[i] * dg[j];
  q.hess.fill(0.0);
  return q;
}

}  // namespace

GammaCompletion gamma_completion(const StationaryMetric& metric, const ScalarField& gamma) {
  const SymMetricField g = metric.spatial();
  auto q_jet = [g, gamma](const Point3& p) {
    Jet2 q = gradient_norm2_first_order(g, gamma, p);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-4 * std::max(1.0, std::abs(p[k]));
      Point3 a = p, b = p;
      a[k] += h;
      b[k] -= h;
      const Jet2 qa = gradient_norm2_first_order(g, gamma, a);
      const Jet2 qb = gradient_norm2_first_order(g, gamma, b);
      for (int i = 0; i < 3; ++i) {
        const double d = (qa.grad[i] - qb.grad[i]) / (2.0 * h);
        if (i == k)
          q.hess[sym_index(i, i)] = d;
        else if (i > k)  // average the two one-sided estimates of the mixed term
          q.hess[sym_index(k, i)] += 0.5 * d;
        else
          q.hess[sym_index(i, k)] += 0.5 * d;
      }
    }
    return q;
  };
  auto q_value = [g, gamma](const Point3& p) {
    return gradient_norm2_first_order(g, gamma, p).value;
  };
  GammaCompletion c;
  c.gradient_norm2 = ScalarField(q_jet, q_value);
  c.conformal_factor = ScalarField([q_jet](const Point3& p) { return exp(q_jet(p)); },
                                   [q_value](const Point3& p) { return std::exp(q_value(p)); });
  c.warped_factor = ScalarField([q_jet](const Point3& p) { return exp(-q_jet(p)); },
                                [q_value](const Point3& p) { return std::exp(-q_value(p)); });
  const ScalarField lapse = metric.lapse();
  c.warped_lapse = ScalarField(
      [q_jet, lapse](const Point3& p) { return exp(Jet2(-0.5) * q_jet(p)) * lapse.jet(p); },
      [q_value, lapse](const Point3& p) { return std::exp(-0.5 * q_value(p)) * lapse.value(p); });
  c.completed = SymMetricField(
      [q_jet, lapse, g](const Point3& p) {
        const Jet2 n = lapse.jet(p);
        return scaled(g.jets(p), exp(q_jet(p)) / (n * n));
      },
      [q_value, lapse, g](const Point3& p) {
        const double n = lapse.value(p);
        return scaled(g.value(p), std::exp(q_value(p)) / (n * n));
      });
  return c;
}

}  // namespace kgsa
