#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "kgsa/expr.hpp"

using namespace kgsa;

namespace {
const std::array<std::string, 3> kBL{"r", "theta", "phi"};
const std::array<std::string, 3> kXYZ{"x", "y", "z"};
}  // namespace

TEST_CASE("parse records only the symbols that occur") {
  const Expression e = Expression::parse("r^2 - 2*M*r + a^2", kBL, {"M", "a"});
  auto syms = e.free_symbols();
  std::sort(syms.begin(), syms.end());
  CHECK(syms == std::vector<std::string>{"M", "a", "r"});
}

TEST_CASE("unclosed parenthesis is a located syntax error") {
  try {
    Expression::parse("sin(theta", kBL);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 4);
    CHECK(std::string(e.what()).find("parenthesis") != std::string::npos);
  }
}

TEST_CASE("undeclared identifiers are rejected at parse time") {
  CHECK_THROWS_AS(Expression::parse("x + q", kXYZ), UndeclaredSymbolError);
  CHECK_THROWS_AS(Expression::parse("x + ", kXYZ), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(x)", kXYZ), UndeclaredSymbolError);
  CHECK_THROWS_AS(Expression::parse("x y", kXYZ), ParseError);
}

TEST_CASE("arithmetic at a point") {
  const Expression e = Expression::parse("x*y + z", kXYZ);
  CHECK(e.eval({2, 3, 4}, {}) == 10.0);
  CHECK(Expression::parse("2^3^2", kXYZ).eval({0, 0, 0}, {}) == 512.0);
  CHECK(Expression::parse("-2^2", kXYZ).eval({0, 0, 0}, {}) == -4.0);
  CHECK(Expression::parse("8 / 4 / 2", kXYZ).eval({0, 0, 0}, {}) == 1.0);
  CHECK(Expression::parse("pi", kXYZ).eval({0, 0, 0}, {}) == M_PI);
}

TEST_CASE("jets of x^2") {
  const Jet2 j = eval_jet2(Expression::parse("x^2", kXYZ), {3, 0, 0});
  CHECK(j.value == 9.0);
  CHECK(j.d(0) == 6.0);
  CHECK(j.dd(0, 0) == 2.0);
  CHECK(j.d(1) == 0.0);
}

TEST_CASE("ergosurface polynomial in the equatorial plane") {
  const Expression e = Expression::parse("r^2 - 2*M*r + a^2*cos(theta)^2", kBL, {"M", "a"});
  const Jet2 j = eval_jet2(e, {1.5, M_PI / 2, 0}, {{"M", 1.0}, {"a", 0.9}});
  CHECK(j.value == doctest::Approx(-0.75).epsilon(1e-15));
}

TEST_CASE("domain errors name the offending node") {
  const Expression e = Expression::parse("log(x - 1)", kXYZ);
  try {
    e.eval({1, 0, 0}, {});
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(err.node().find("log") != std::string::npos);
  }
  CHECK_THROWS_AS(Expression::parse("1 / x", kXYZ).eval({0, 0, 0}, {}), DomainError);
  CHECK_THROWS_AS(eval_jet2(Expression::parse("abs(x)", kXYZ), {0, 0, 0}), DomainError);
  CHECK_THROWS_AS(eval_jet2(Expression::parse("sqrt(x)", kXYZ), {0, 1, 1}), DomainError);
}

TEST_CASE("unbound parameters are reported") {
  const Expression e = Expression::parse("M * x", kXYZ, {"M"});
  CHECK_THROWS_AS(e.bind({}), Error);
}

TEST_CASE("jets agree with fourth-order finite differences") {
  const std::vector<std::string> sources{
      "x^2*y - z^3 + 2",
      "sin(x*y) + cos(z)",
      "exp(0.3*x - y) * z",
      "log(2 + x^2 + y^2) / (3 + z)",
      "sqrt(4 + x*y + z^2)",
      "abs(1.5 + x) * y",
      "(1 + x^2)^(0.5*y)",
      "-(x - y)^3 / (2 + cos(z))",
  };
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  double worst = 0.0;
  for (const std::string& s : sources) {
    const Expression e = Expression::parse(s, kXYZ);
    auto f = [&](const Point3& p) { return e.eval(p, {}); };
    for (int n = 0; n < 100; ++n) {
      const Point3 p{u(rng), u(rng), u(rng)};
      const Jet2 j = e.eval_jet2(p, {});
      const testing::FdJet fd = testing::fd4(f, p, 1e-3);
      double scale = std::abs(j.value);
      for (int i = 0; i < 3; ++i) scale = std::max(scale, std::abs(j.d(i)));
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) scale = std::max(scale, std::abs(j.dd(i, k)));
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(j.d(i) - fd.grad[i]) / scale);
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(j.dd(i, k) - fd.hess[i][k]) / scale);
      }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("print then parse evaluates identically") {
  const std::vector<std::string> sources{"x - (y - z)", "2^3^x", "-x^2", "a / (b * x) / y",
                                         "sin(-x) * -y", "1e-3 * x + 2.5e2", "exp(x)^2 - -z"};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (const std::string& s : sources) {
    const Expression e = Expression::parse(s, kXYZ, {"a", "b"});
    const Expression back = Expression::parse(e.to_string(), kXYZ, {"a", "b"});
    CHECK(back.to_string() == e.to_string());
    const std::vector<double> params{1.3, -0.7};
    for (int n = 0; n < 20; ++n) {
      const Point3 p{u(rng), u(rng), u(rng)};
      CHECK(back.eval(p, params) == e.eval(p, params));
    }
  }
}

TEST_CASE("evaluation is deterministic") {
  const Expression e = Expression::parse("sin(x)*exp(y) + log(1 + z^2)", kXYZ);
  const Point3 p{0.3, -0.2, 0.7};
  const Jet2 a = e.eval_jet2(p, {});
  const Jet2 b = e.eval_jet2(p, {});
  CHECK(a.value == b.value);
  CHECK(a.grad == b.grad);
  CHECK(a.hess == b.hess);
}
