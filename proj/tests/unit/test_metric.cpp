#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "kgsa/kerr.hpp"
#include "kgsa/metric.hpp"

using namespace kgsa;
using testing::rel;

namespace {

StationaryMetric static_metric(double n) {
  return StationaryMetric(ScalarField::constant(n), VectorField{}, SymMetricField::identity(),
                          Box{{-1, -1, -1}, {1, 1, 1}});
}

}  // namespace

TEST_CASE("Minkowski blocks") {
  const PointBlocks b = point_blocks(StationaryMetric::minkowski(), {0.3, -2.0, 5.0});
  CHECK(b.g00 == -1.0);
  CHECK(b.h_lower == Sym3<double>{1, 0, 0, 1, 0, 1});
  CHECK(b.h_upper == Sym3<double>{1, 0, 0, 1, 0, 1});
  CHECK(b.rho == 1.0);
  CHECK(b.det_g4 == -1.0);
}

TEST_CASE("static lapse 2: determinants and density") {
  const StationaryMetric m = static_metric(2.0);
  const PointBlocks b = point_blocks(m, {0, 0, 0});
  Mat4<double> diag{};
  diag[0][0] = -4.0;
  diag[1][1] = diag[2][2] = diag[3][3] = 1.0;
  CHECK(b.det_g4 == doctest::Approx(testing::det4_cofactor(diag)));
  CHECK(b.det_h3 == doctest::Approx(1.0));
  CHECK(b.rho == doctest::Approx(2.0));
  const RhoDiagnostics d = rho_diagnostics(m, {0, 0, 0});
  CHECK(d.sqrt_g00_residual < 1e-15);
  CHECK(d.sqrt_inverse_g00_residual == doctest::Approx(0.75));
}

TEST_CASE("4x4 determinant agrees with the expanded polynomial") {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 10; ++n) {
    const testing::RandomMetric rm = testing::random_stationary_metric(rng);
    for (int k = 0; k < 50; ++k) {
      const Point3 p = random_point(rm.metric.domain(), rng);
      const MetricValues v = rm.metric.values(p);
      const Blocks<double> b = compute_blocks(v.lapse, v.shift, v.spatial, p);
      const double poly = testing::det4_polynomial(b.g00, b.shift_down, v.spatial);
      CHECK(rel(b.det_g4, poly) < 1e-12);
      CHECK(rel(b.det_g4, testing::det4_cofactor(covariant_metric(rm.metric, p))) < 1e-12);
    }
  }
}

TEST_CASE("determinant identity on Minkowski and random metrics") {
  std::vector<Point3> pts;
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) pts.push_back(random_point(Box{{-1, -1, -1}, {1, 1, 1}}, rng));
  CHECK(verify_determinant_identity(StationaryMetric::minkowski(), pts).max_residual == 0.0);
  for (int n = 0; n < 5; ++n) {
    const auto rm = testing::random_stationary_metric(rng);
    CHECK(verify_determinant_identity(rm.metric, pts).max_residual <= 1e-10);
  }
}

TEST_CASE("h_lower inverts h_upper and matches the explicit formula") {
  std::mt19937_64 rng(5);
  const auto rm = testing::random_stationary_metric(rng);
  for (int k = 0; k < 100; ++k) {
    const Point3 p = random_point(rm.metric.domain(), rng);
    const MetricValues v = rm.metric.values(p);
    const Blocks<double> b = compute_blocks(v.lapse, v.shift, v.spatial, p);
    const double margin = v.lapse * v.lapse - (b.shift_down[0] * v.shift[0] +
                                               b.shift_down[1] * v.shift[1] +
                                               b.shift_down[2] * v.shift[2]);
    const Eigen::Matrix3d prod = to_eigen(b.h_lower) * to_eigen(b.h_upper);
    CHECK((prod - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double formula = at(v.spatial, i, j) + b.shift_down[i] * b.shift_down[j] / margin;
        CHECK(std::abs(at(b.h_lower, i, j) - formula) <= 1e-10 * std::max(1.0, std::abs(formula)));
      }
  }
}

TEST_CASE("timelike check: Minkowski, Schwarzschild exterior, Kerr ergoregion") {
  const Box box{{-1, -1, -1}, {1, 1, 1}};
  const TimelikeReport flat = check_assumption_timelike(StationaryMetric::minkowski(box), {box, {5, 5, 5}});
  CHECK(flat.killing_timelike);
  CHECK(flat.worst_margin == 1.0);

  const KerrParams schw{1.0, 0.0};
  const Box ext{{2.05, 0.2, 0}, {10, M_PI - 0.2, 2 * M_PI}};
  const TimelikeReport s = check_assumption_timelike(kerr_metric(schw, ext), {ext, {9, 9, 3}});
  CHECK(s.killing_timelike);
  CHECK(s.g00_negative_everywhere);

  const KerrParams kerr{1.0, 0.9};
  const Box ergo{{kerr.r_plus() + 0.01, M_PI / 2 - 0.3, 0}, {2.0, M_PI / 2 + 0.3, 1}};
  const TimelikeReport k = check_assumption_timelike(kerr_metric(kerr, ergo), {ergo, {9, 9, 2}});
  CHECK_FALSE(k.killing_timelike);
  CHECK_FALSE(k.g00_negative_everywhere);
  REQUIRE(k.first_violation.has_value());
  const Point3 w = *k.first_violation;
  CHECK(w[0] * w[0] - 2 * w[0] + 0.81 * std::cos(w[1]) * std::cos(w[1]) < 0.0);
}

TEST_CASE("time-independent metric is equivalent to itself") {
  std::mt19937_64 rng(1);
  const auto rm = testing::random_stationary_metric(rng);
  const AssumptionReport a = estimate_bounds(rm.metric, {rm.metric.domain(), {5, 5, 5}});
  CHECK(a.equivalence_a == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.equivalence_d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.alpha_b >= 0.7 - 1e-12);
  CHECK(a.alpha_b <= a.alpha_c);
}

TEST_CASE("rho is the square root of the determinant ratio") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 5; ++n) {
    const auto rm = testing::random_stationary_metric(rng);
    for (int k = 0; k < 50; ++k) {
      const Point3 p = random_point(rm.metric.domain(), rng);
      const RhoDiagnostics d = rho_diagnostics(rm.metric, p);
      CHECK(d.rho > 0.0);
      CHECK(d.consistency_residual <= 1e-10);
      CHECK(d.sqrt_g00_residual <= 1e-10);
    }
  }
}

TEST_CASE("degenerate points throw with their location") {
  const StationaryMetric m(ScalarField::constant(1.0),
                           VectorField{{ScalarField::constant(1.0), ScalarField::constant(0.0),
                                        ScalarField::constant(0.0)}},
                           SymMetricField::identity());
  try {
    point_blocks(m, {0.5, 0.25, 0});
    FAIL("expected DegenerateError");
  } catch (const DegenerateError& e) {
    CHECK(e.where() == Point3{0.5, 0.25, 0});
  }
}
