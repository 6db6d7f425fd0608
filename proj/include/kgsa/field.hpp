#pragma once

// Coefficient fields over a 3D chart, evaluable with first and second
// derivatives.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kgsa/error.hpp"
#include "kgsa/expr.hpp"
#include "kgsa/jet.hpp"
#include "kgsa/linalg.hpp"

namespace kgsa {

/// Axis-aligned box in chart coordinates.
struct Box {
  Point3 lo{};
  Point3 hi{};

  static Box unbounded();
  bool bounded() const;
  bool contains(const Point3& p) const;
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  Point3 center() const;
};

/// Tensor-product sampling grid including the box faces. An axis with a
/// single node samples the box midpoint.
struct SampleGrid {
  Box box;
  std::array<int, 3> counts{1, 1, 1};

  std::size_t size() const;
  Point3 node(std::size_t flat) const;
  std::array<int, 3> unflatten(std::size_t flat) const;
};

class ScalarField {
 public:
  using JetFn = std::function<Jet2(const Point3&)>;
  using ValueFn = std::function<double(const Point3&)>;

  ScalarField();
  explicit ScalarField(JetFn jet, ValueFn value = {}, Box domain = Box::unbounded());

  static ScalarField constant(double c);
  static ScalarField from_expression(const Expression& expr,
                                     const std::map<std::string, double>& params = {});

  Jet2 jet(const Point3& p) const;
  double value(const Point3& p) const;
  const Box& domain() const { return domain_; }

 private:
  JetFn jet_;
  ValueFn value_;
  Box domain_;
};

/// Samples on a uniform grid; derivatives come from the tensor-product
/// quadratic interpolant on the 3-point stencil around the nearest node,
/// which reproduces centered finite differences at grid nodes.
ScalarField tabulated_field(const SampleGrid& grid, std::vector<double> samples);

struct VectorField {
  std::array<ScalarField, 3> components;

  std::array<Jet2, 3> jets(const Point3& p) const;
  std::array<double, 3> values(const Point3& p) const;
};

/// Symmetric rank-2 covariant field, six independent components.
class SymMetricField {
 public:
  using JetFn = std::function<SymJet(const Point3&)>;
  using ValueFn = std::function<Sym3<double>(const Point3&)>;

  SymMetricField();
  explicit SymMetricField(JetFn jets, ValueFn values = {});

  /// Components in packed order (11, 12, 13, 22, 23, 33).
  static SymMetricField from_components(const std::array<ScalarField, 6>& c);
  static SymMetricField identity();
  static SymMetricField diagonal(const ScalarField& a, const ScalarField& b, const ScalarField& c);

  SymJet jets(const Point3& p) const;
  Sym3<double> value(const Point3& p) const;
  ScalarField component(int i, int j) const;

 private:
  JetFn jets_;
  ValueFn values_;
};

}  // namespace kgsa
