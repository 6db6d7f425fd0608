#include "kgsa/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace kgsa {

Box Box::unbounded() {
  const double inf = std::numeric_limits<double>::infinity();
  return {{-inf, -inf, -inf}, {inf, inf, inf}};
}

bool Box::bounded() const {
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
  return true;
}

bool Box::contains(const Point3& p) const {
  for (int i = 0; i < 3; ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

Point3 Box::center() const {
  return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
}

std::size_t SampleGrid::size() const {
  return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
}

std::array<int, 3> SampleGrid::unflatten(std::size_t flat) const {
  const int i = static_cast<int>(flat % counts[0]);
  const int j = static_cast<int>((flat / counts[0]) % counts[1]);
  const int k = static_cast<int>(flat / (static_cast<std::size_t>(counts[0]) * counts[1]));
  return {i, j, k};
}

Point3 SampleGrid::node(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point3 p;
  for (int a = 0; a < 3; ++a) {
    if (counts[a] <= 1) {
      p[a] = 0.5 * (box.lo[a] + box.hi[a]);
    } else {
      p[a] = box.lo[a] + box.extent(a) * idx[a] / (counts[a] - 1);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField() : ScalarField([](const Point3&) { return Jet2(0.0); }) {}

ScalarField::ScalarField(JetFn jet, ValueFn value, Box domain)
    : jet_(std::move(jet)), value_(std::move(value)), domain_(domain) {
  if (!value_) {
    value_ = [j = jet_](const Point3& p) { return j(p).value; };
  }
}

ScalarField ScalarField::constant(double c) {
  return ScalarField([c](const Point3&) { return Jet2(c); }, [c](const Point3&) { return c; });
}

ScalarField ScalarField::from_expression(const Expression& expr,
                                         const std::map<std::string, double>& params) {
  auto bound = expr.bind(params);
  return ScalarField([expr, bound](const Point3& p) { return expr.eval_jet2(p, bound); },
                     [expr, bound](const Point3& p) { return expr.eval(p, bound); });
}

Jet2 ScalarField::jet(const Point3& p) const { return jet_(p); }
double ScalarField::value(const Point3& p) const { return value_(p); }

ScalarField tabulated_field(const SampleGrid& grid, std::vector<double> samples) {
  if (samples.size() != grid.size()) throw Error("tabulated field: sample count mismatch");
  if (!grid.box.bounded()) throw Error("tabulated field: grid box must be bounded");
  auto data = std::make_shared<const std::vector<double>>(std::move(samples));
  auto eval = [grid, data](const Point3& p) -> Jet2 {
    if (!grid.box.contains(p)) throw DegenerateError("tabulated field evaluated outside its grid", p);
    // Per axis: base index, and the three basis weights with their derivatives.
    std::array<int, 3> base{};
    std::array<std::array<double, 3>, 3> w{}, dw{}, ddw{};
    std::array<int, 3> width{};
    for (int a = 0; a < 3; ++a) {
      const int n = grid.counts[a];
      if (n < 3) {
        base[a] = 0;
        width[a] = 1;
        w[a] = {1.0, 0.0, 0.0};
        continue;
      }
      const double h = grid.box.extent(a) / (n - 1);
      const int nearest = static_cast<int>(std::lround((p[a] - grid.box.lo[a]) / h));
      const int c = std::clamp(nearest, 1, n - 2);
      const double t = (p[a] - (grid.box.lo[a] + c * h)) / h;
      base[a] = c - 1;
      width[a] = 3;
      w[a] = {0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)};
      dw[a] = {(t - 0.5) / h, -2.0 * t / h, (t + 0.5) / h};
      ddw[a] = {1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)};
    }
    Jet2 r;
    for (int k = 0; k < width[2]; ++k)
      for (int j = 0; j < width[1]; ++j)
        for (int i = 0; i < width[0]; ++i) {
          const std::size_t flat =
              static_cast<std::size_t>(base[0] + i) +
              static_cast<std::size_t>(grid.counts[0]) *
                  (static_cast<std::size_t>(base[1] + j) +
                   static_cast<std::size_t>(grid.counts[1]) * static_cast<std::size_t>(base[2] + k));
          const double f = (*data)[flat];
          const std::array<int, 3> o{i, j, k};
          double prod = 1.0;
          for (int a = 0; a < 3; ++a) prod *= w[a][o[a]];
          r.value += f * prod;
          for (int a = 0; a < 3; ++a) {
            double g = dw[a][o[a]];
            for (int b = 0; b < 3; ++b)
              if (b != a) g *= w[b][o[b]];
            r.grad[a] += f * g;
          }
          for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
              double hh = 1.0;
              for (int c = 0; c < 3; ++c) {
                if (a == b && c == a) {
                  hh *= ddw[c][o[c]];
                } else if (c == a || c == b) {
                  hh *= dw[c][o[c]];
                } else {
                  hh *= w[c][o[c]];
                }
              }
              r.hess[sym_index(a, b)] += f * hh;
            }
        }
    return r;
  };
  return ScalarField(eval, {}, grid.box);
}

// ---------------------------------------------------------------------------

std::array<Jet2, 3> VectorField::jets(const Point3& p) const {
  return {components[0].jet(p), components[1].jet(p), components[2].jet(p)};
}

std::array<double, 3> VectorField::values(const Point3& p) const {
  return {components[0].value(p), components[1].value(p), components[2].value(p)};
}

SymMetricField::SymMetricField() : SymMetricField(identity()) {}

SymMetricField::SymMetricField(JetFn jets, ValueFn values)
    : jets_(std::move(jets)), values_(std::move(values)) {
  if (!values_) {
    values_ = [j = jets_](const Point3& p) { return kgsa::values(j(p)); };
  }
}

SymMetricField SymMetricField::from_components(const std::array<ScalarField, 6>& c) {
  return SymMetricField(
      [c](const Point3& p) {
        SymJet m;
        for (int k = 0; k < 6; ++k) m[k] = c[k].jet(p);
        return m;
      },
      [c](const Point3& p) {
        Sym3<double> m;
        for (int k = 0; k < 6; ++k) m[k] = c[k].value(p);
        return m;
      });
}

SymMetricField SymMetricField::identity() {
  return SymMetricField([](const Point3&) { return SymJet{1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; },
                        [](const Point3&) { return Sym3<double>{1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; });
}

SymMetricField SymMetricField::diagonal(const ScalarField& a, const ScalarField& b,
                                        const ScalarField& c) {
  const ScalarField zero = ScalarField::constant(0.0);
  return from_components({a, zero, zero, b, zero, c});
}

SymJet SymMetricField::jets(const Point3& p) const { return jets_(p); }
Sym3<double> SymMetricField::value(const Point3& p) const { return values_(p); }

ScalarField SymMetricField::component(int i, int j) const {
  const int k = sym_index(i, j);
  return ScalarField([f = jets_, k](const Point3& p) { return f(p)[k]; },
                     [f = values_, k](const Point3& p) { return f(p)[k]; });
}

}  // namespace kgsa
