#pragma once

// Infix expressions over three chart variables and named parameters,
// evaluated to values or to second-order jets.
//
// Grammar (highest precedence first):
//   primary  := number | identifier | identifier '(' expr ')' | '(' expr ')'
//   power    := primary ('^' unary)?           right-associative
//   unary    := '-' unary | '+' unary | power
//   term     := unary (('*' | '/') unary)*     left-associative
//   expr     := term (('+' | '-') term)*       left-associative
// Functions: sin cos exp log sqrt abs. The identifier `pi` is a constant
// unless declared as a variable or parameter.

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgsa/error.hpp"
#include "kgsa/jet.hpp"

namespace kgsa {

class Expression {
 public:
  enum class Op { constant, variable, parameter, neg, add, sub, mul, div, pow, sin, cos, exp, log, sqrt, abs };

  struct Node {
    Op op;
    double constant = 0.0;
    int index = -1;  // variable or parameter slot
    int lhs = -1;
    int rhs = -1;
    std::size_t line = 1;
    std::size_t column = 1;
  };

  /// Parses `source`. Exactly three variable names are required; they are
  /// bound to the chart coordinates in order.
  static Expression parse(std::string_view source,
                          const std::array<std::string, 3>& variables,
                          const std::vector<std::string>& parameters = {});

  static Expression constant(double c);

  /// Names of the variables and parameters that actually occur in the AST.
  std::vector<std::string> free_symbols() const;

  const std::array<std::string, 3>& variables() const { return impl_->variables; }
  const std::vector<std::string>& parameters() const { return impl_->parameters; }

  /// Fully parenthesized source that parses back to an equivalent AST.
  std::string to_string() const;
  std::string node_to_string(int node) const;

  double eval(const Point3& point, std::span<const double> params) const;
  Jet2 eval_jet2(const Point3& point, std::span<const double> params) const;

  /// Orders the parameter map by declaration; throws if a parameter is unbound.
  std::vector<double> bind(const std::map<std::string, double>& params) const;

  const std::vector<Node>& nodes() const { return impl_->nodes; }
  int root() const { return impl_->root; }

 private:
  struct Impl {
    std::vector<Node> nodes;
    int root = -1;
    std::array<std::string, 3> variables;
    std::vector<std::string> parameters;
  };

  explicit Expression(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  template <class T>
  T evaluate(int node, const std::array<T, 3>& vars, std::span<const double> params) const;

  std::shared_ptr<const Impl> impl_;
  friend class ExpressionParser;
};

/// Convenience wrapper: evaluates with named parameter values.
Jet2 eval_jet2(const Expression& expr, const Point3& point,
               const std::map<std::string, double>& params = {});

}  // namespace kgsa
