#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "kgsa/kerr.hpp"
#include "kgsa/kgop.hpp"

using namespace kgsa;

namespace {

const std::array<std::string, 3> kXYZ{"x", "y", "z"};
const Box kCube{{-1, -1, -1}, {1, 1, 1}};

ScalarField expr(const std::string& s) { return ScalarField::from_expression(Expression::parse(s, kXYZ)); }

}  // namespace

TEST_CASE("ultra-static flat operator is -Laplacian + c") {
  const SpatialOperator op = assemble_w2(StationaryMetric::minkowski(kCube), ScalarField::constant(0.7));
  const ScalarField u = expr("x^2*y + sin(z)");
  const Point3 p{0.3, -0.4, 0.2};
  // -Delta u = -(2y - sin z)
  const double expected = -(2 * p[1] - std::sin(p[2])) + 0.7 * u.value(p);
  CHECK(apply_w2(op, u, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("constants are harmonic") {
  std::mt19937_64 rng(2);
  const auto rm = testing::random_stationary_metric(rng);
  for (OperatorForm f : {OperatorForm::raw, OperatorForm::reduced}) {
    const SpatialOperator op = assemble_w2(rm.metric, ScalarField::constant(0.0), std::nullopt, f);
    CHECK(std::abs(apply_w2(op, ScalarField::constant(3.0), {0.2, 0.1, -0.3})) < 1e-14);
  }
}

TEST_CASE("flat eigenfunction sin(pi x) sin(pi y) sin(pi z)") {
  const SpatialOperator op = assemble_w2(StationaryMetric::minkowski(kCube), ScalarField::constant(0.0));
  const ScalarField u = expr("sin(pi*x)*sin(pi*y)*sin(pi*z)");
  const Point3 p{0.21, 0.37, 0.58};
  CHECK(apply_w2(op, u, p) == doctest::Approx(3 * M_PI * M_PI * u.value(p)).epsilon(1e-13));
}

TEST_CASE("reduction on Minkowski is exact up to rounding") {
  std::mt19937_64 rng(4);
  const SpatialOperator op = assemble_w2(StationaryMetric::minkowski(kCube), ScalarField::constant(1.0));
  for (int n = 0; n < 20; ++n) {
    const ReductionCheck r = verify_reduction(op, random_test_field(kCube, rng), random_point(kCube, rng, 0.05));
    CHECK(r.residual < 1e-14);
  }
}

TEST_CASE("reduction and form agreement on random stationary metrics") {
  std::mt19937_64 rng(6);
  for (int m = 0; m < 5; ++m) {
    const auto rm = testing::random_stationary_metric(rng);
    const ScalarField m2 = expr("0.5 + 0.2*x^2");
    const SpatialOperator raw = assemble_w2(rm.metric, m2);
    const SpatialOperator red = raw.with_form(OperatorForm::reduced);
    for (int n = 0; n < 20; ++n) {
      const ScalarField u = random_test_field(kCube, rng);
      const Point3 p = random_point(kCube, rng, 0.05);
      const ReductionCheck a = verify_reduction(raw, u, p);
      const ReductionCheck b = verify_reduction(red, u, p);
      CHECK(a.residual <= 1e-8);
      CHECK(b.residual <= 1e-8);
      CHECK(std::abs(a.assembled - b.assembled) <= 1e-8 * a.scale);
    }
  }
}

TEST_CASE("potential is N^2 m^2 and non-negative for m^2 >= 0") {
  std::mt19937_64 rng(12);
  const auto rm = testing::random_stationary_metric(rng);
  const SpatialOperator op = assemble_w2(rm.metric, expr("0.3 + y^2"));
  for (int n = 0; n < 50; ++n) {
    const Point3 p = random_point(kCube, rng);
    const double lapse = rm.metric.values(p).lapse;
    const double v = op.potential().value(p);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx(lapse * lapse * (0.3 + p[1] * p[1])).epsilon(1e-12));
  }
}

TEST_CASE("first-order coefficient vanishes without shift") {
  const StationaryMetric m(expr("1 + 0.2*x^2"), VectorField{}, SymMetricField::identity(), kCube);
  std::mt19937_64 rng(3);
  for (int n = 0; n < 10; ++n) {
    const FirstOrderTerms f = first_order_coefficient(m, random_point(kCube, rng), random_test_field(kCube, rng));
    CHECK(f.scalar_coefficient == 0.0);
    CHECK(f.transport_term == 0.0);
  }
}

TEST_CASE("first-order coefficient of a constant rigid rotation") {
  // N = 1, N^i = w(-y, x, 0): sqrt|g| g^00 N^i is divergence free, so only
  // the transport part survives.
  const StationaryMetric m(ScalarField::constant(1.0), VectorField{{expr("-0.2*y"), expr("0.2*x"), expr("0")}},
                           SymMetricField::identity(), kCube);
  const ScalarField u = expr("x + 2*y");
  const Point3 p{0.3, 0.5, 0.0};
  const FirstOrderTerms f = first_order_coefficient(m, p, u);
  CHECK(std::abs(f.scalar_coefficient) < 1e-14);
  CHECK(f.transport_term == doctest::Approx(-2 * (-0.2 * p[1] * 1 + 0.2 * p[0] * 2)).epsilon(1e-14));
}

TEST_CASE("assembly refuses a non-timelike Killing field and names the node") {
  const StationaryMetric m(ScalarField::constant(1.0), VectorField{{expr("2*x"), expr("0"), expr("0")}},
                           SymMetricField::identity(), kCube);
  try {
    assemble_w2(m, ScalarField::constant(0.0), SampleGrid{kCube, {5, 5, 5}});
    FAIL("expected HypothesisError");
  } catch (const HypothesisError& e) {
    CHECK(e.hypothesis() == "timelike_killing");
    CHECK(std::abs(e.witness()[0]) >= 0.5);
  }
}

TEST_CASE("test fields are reproducible and supported in the box") {
  std::mt19937_64 a(99), b(99);
  const ScalarField u = random_test_field(kCube, a);
  const ScalarField v = random_test_field(kCube, b);
  CHECK(u.value({0.1, 0.2, 0.3}) == v.value({0.1, 0.2, 0.3}));
  CHECK(u.value({1.5, 0.0, 0.0}) == 0.0);
  CHECK(u.value({1.0, 0.2, 0.0}) == 0.0);
}
