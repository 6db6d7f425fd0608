#include "kgsa/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

namespace kgsa {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* op_name(Expression::Op op) {
  using Op = Expression::Op;
  switch (op) {
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    default: return "";
  }
}

}  // namespace

class ExpressionParser {
 public:
  ExpressionParser(std::string_view src, const std::array<std::string, 3>& vars,
                   const std::vector<std::string>& params)
      : src_(src) {
    impl_.variables = vars;
    impl_.parameters = params;
    std::set<std::string> seen;
    for (const auto& name : vars) {
      if (!seen.insert(name).second) throw Error("duplicate symbol declaration: " + name);
    }
    for (const auto& name : params) {
      if (!seen.insert(name).second) throw Error("duplicate symbol declaration: " + name);
    }
  }

  Expression run() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression");
    impl_.root = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return Expression(std::make_shared<const Expression::Impl>(std::move(impl_)));
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& msg) const {
    auto [line, col] = location(pos_);
    throw ParseError(msg, line, col);
  }

  std::pair<std::size_t, std::size_t> location(std::size_t at) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      const auto c = static_cast<unsigned char>(src_[i]);
      if (c == '\n') {
        ++line;
        col = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col;
      }
    }
    return {line, col};
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n, std::size_t at) {
    auto [line, col] = location(at);
    n.line = line;
    n.column = col;
    impl_.nodes.push_back(n);
    return static_cast<int>(impl_.nodes.size()) - 1;
  }

  int binary(Op op, int l, int r, std::size_t at) {
    Expression::Node n{op};
    n.lhs = l;
    n.rhs = r;
    return add(n, at);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = binary(Op::add, lhs, parse_term(), at);
      } else if (accept('-')) {
        lhs = binary(Op::sub, lhs, parse_term(), at);
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_ws();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = binary(Op::mul, lhs, parse_unary(), at);
      } else if (accept('/')) {
        lhs = binary(Op::div, lhs, parse_unary(), at);
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) {
      Expression::Node n{Op::neg};
      n.lhs = parse_unary();
      return add(n, at);
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    skip_ws();
    const std::size_t at = pos_;
    if (accept('^')) return binary(Op::pow, base, parse_unary(), at);
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const std::size_t at = pos_;
    const auto c = static_cast<unsigned char>(src_[pos_]);
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) {
        pos_ = at;
        fail("unclosed parenthesis");
      }
      return inner;
    }
    if (std::isdigit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    fail(std::string("unexpected '") + src_[pos_] + "'");
  }

  int parse_number() {
    const std::size_t at = pos_;
    const std::string rest(src_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    Expression::Node n{Op::constant};
    n.constant = v;
    return add(n, at);
  }

  int parse_identifier() {
    const std::size_t at = pos_;
    while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string name(src_.substr(at, pos_ - at));

    static const std::map<std::string, Op> functions = {
        {"sin", Op::sin}, {"cos", Op::cos},   {"exp", Op::exp},
        {"log", Op::log}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
    if (auto f = functions.find(name); f != functions.end()) {
      if (!accept('(')) fail("expected '(' after function " + name);
      const std::size_t open = pos_ - 1;
      Expression::Node n{f->second};
      n.lhs = parse_expr();
      if (!accept(')')) {
        pos_ = open;
        fail("unclosed parenthesis in call to " + name);
      }
      return add(n, at);
    }
    for (int i = 0; i < 3; ++i) {
      if (impl_.variables[i] == name) {
        Expression::Node n{Op::variable};
        n.index = i;
        return add(n, at);
      }
    }
    for (std::size_t i = 0; i < impl_.parameters.size(); ++i) {
      if (impl_.parameters[i] == name) {
        Expression::Node n{Op::parameter};
        n.index = static_cast<int>(i);
        return add(n, at);
      }
    }
    if (name == "pi") {
      Expression::Node n{Op::constant};
      n.constant = M_PI;
      return add(n, at);
    }
    throw UndeclaredSymbolError(name);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Expression::Impl impl_;
};

Expression Expression::parse(std::string_view source, const std::array<std::string, 3>& variables,
                             const std::vector<std::string>& parameters) {
  return ExpressionParser(source, variables, parameters).run();
}

Expression Expression::constant(double c) {
  Impl impl;
  impl.variables = {"x", "y", "z"};
  Node n{Op::constant};
  n.constant = c;
  impl.nodes.push_back(n);
  impl.root = 0;
  return Expression(std::make_shared<const Impl>(std::move(impl)));
}

std::vector<std::string> Expression::free_symbols() const {
  std::set<std::string> names;
  for (const auto& n : impl_->nodes) {
    if (n.op == Op::variable) names.insert(impl_->variables[n.index]);
    if (n.op == Op::parameter) names.insert(impl_->parameters[n.index]);
  }
  return {names.begin(), names.end()};
}

std::string Expression::node_to_string(int node) const {
  const Node& n = impl_->nodes[node];
  switch (n.op) {
    case Op::constant:
      return n.constant < 0 ? "(" + format_number(n.constant) + ")" : format_number(n.constant);
    case Op::variable: return impl_->variables[n.index];
    case Op::parameter: return impl_->parameters[n.index];
    case Op::neg: return "(-" + node_to_string(n.lhs) + ")";
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow:
      return "(" + node_to_string(n.lhs) + " " + op_name(n.op) + " " + node_to_string(n.rhs) + ")";
    default: return std::string(op_name(n.op)) + "(" + node_to_string(n.lhs) + ")";
  }
}

std::string Expression::to_string() const { return node_to_string(impl_->root); }

namespace {

template <class T>
T pow_generic(const T& base, const T& expo) {
  using std::exp;
  using std::log;
  return exp(expo * log(base));
}

bool is_integral(double p) { return std::isfinite(p) && std::floor(p) == p; }

bool free_of_variables(const std::vector<Expression::Node>& nodes, int idx) {
  if (idx < 0) return true;
  const Expression::Node& n = nodes[idx];
  if (n.op == Expression::Op::variable) return false;
  return free_of_variables(nodes, n.lhs) && free_of_variables(nodes, n.rhs);
}

}  // namespace

template <class T>
T Expression::evaluate(int idx, const std::array<T, 3>& vars, std::span<const double> params) const {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::pow;
  using std::sin;
  using std::sqrt;
  const Node& n = impl_->nodes[idx];
  auto domain = [&](const char* what) -> DomainError {
    return DomainError(std::string(what) + " in '" + node_to_string(idx) + "' (line " +
                           std::to_string(n.line) + ", column " + std::to_string(n.column) + ")",
                       node_to_string(idx));
  };
  switch (n.op) {
    case Op::constant: return T(n.constant);
    case Op::variable: return vars[n.index];
    case Op::parameter: return T(params[n.index]);
    case Op::neg: return -evaluate(n.lhs, vars, params);
    case Op::add: return evaluate(n.lhs, vars, params) + evaluate(n.rhs, vars, params);
    case Op::sub: return evaluate(n.lhs, vars, params) - evaluate(n.rhs, vars, params);
    case Op::mul: return evaluate(n.lhs, vars, params) * evaluate(n.rhs, vars, params);
    case Op::div: {
      const T den = evaluate(n.rhs, vars, params);
      if (value_of(den) == 0.0) throw domain("division by zero");
      return evaluate(n.lhs, vars, params) / den;
    }
    case Op::pow: {
      const T base = evaluate(n.lhs, vars, params);
      if (free_of_variables(impl_->nodes, n.rhs)) {
        const double p = value_of(evaluate<double>(n.rhs, {0.0, 0.0, 0.0}, params));
        const double b = value_of(base);
        if (b < 0.0 && !is_integral(p)) throw domain("non-integral power of a negative base");
        if (b == 0.0 && p < 0.0) throw domain("negative power of zero");
        if constexpr (std::is_same_v<T, Jet2>) {
          if (b == 0.0 && p != 0.0 && p != 1.0 && p < 2.0 && !is_integral(p))
            throw domain("power not twice differentiable at zero");
        }
        return pow(base, p);
      }
      if (value_of(base) <= 0.0) throw domain("variable exponent requires a positive base");
      return pow_generic(base, evaluate(n.rhs, vars, params));
    }
    case Op::sin: return sin(evaluate(n.lhs, vars, params));
    case Op::cos: return cos(evaluate(n.lhs, vars, params));
    case Op::exp: return exp(evaluate(n.lhs, vars, params));
    case Op::log: {
      const T u = evaluate(n.lhs, vars, params);
      if (value_of(u) <= 0.0) throw domain("log of a non-positive value");
      return log(u);
    }
    case Op::sqrt: {
      const T u = evaluate(n.lhs, vars, params);
      if (value_of(u) < 0.0) throw domain("sqrt of a negative value");
      if constexpr (std::is_same_v<T, Jet2>) {
        if (value_of(u) == 0.0) throw domain("sqrt is not differentiable at zero");
      }
      return sqrt(u);
    }
    case Op::abs: {
      const T u = evaluate(n.lhs, vars, params);
      if (value_of(u) == 0.0) throw domain("abs evaluated at zero");
      return abs(u);
    }
  }
  throw Error("corrupt expression node");
}

double Expression::eval(const Point3& p, std::span<const double> params) const {
  if (params.size() != impl_->parameters.size()) throw Error("parameter count mismatch");
  return evaluate<double>(impl_->root, {p[0], p[1], p[2]}, params);
}

Jet2 Expression::eval_jet2(const Point3& p, std::span<const double> params) const {
  if (params.size() != impl_->parameters.size()) throw Error("parameter count mismatch");
  const std::array<Jet2, 3> vars = {Jet2::variable(p[0], 0), Jet2::variable(p[1], 1),
                                    Jet2::variable(p[2], 2)};
  return evaluate<Jet2>(impl_->root, vars, params);
}

std::vector<double> Expression::bind(const std::map<std::string, double>& params) const {
  std::vector<double> out;
  out.reserve(impl_->parameters.size());
  for (const auto& name : impl_->parameters) {
    auto it = params.find(name);
    if (it == params.end()) throw Error("unbound parameter: " + name);
    out.push_back(it->second);
  }
  return out;
}

Jet2 eval_jet2(const Expression& expr, const Point3& point,
               const std::map<std::string, double>& params) {
  const auto bound = expr.bind(params);
  return expr.eval_jet2(point, bound);
}

// ---------------------------------------------------------------------------

std::string format_point(const Point3& p) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
  return os.str();
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
            ": " + what),
      line_(line),
      column_(column) {}

UndeclaredSymbolError::UndeclaredSymbolError(std::string symbol)
    : Error("undeclared symbol '" + symbol + "'"), symbol_(std::move(symbol)) {}

DomainError::DomainError(const std::string& what, std::string node)
    : Error(what), node_(std::move(node)) {}

DegenerateError::DegenerateError(const std::string& what, const Point3& where)
    : Error(what + " at " + format_point(where)), where_(where) {}

HypothesisError::HypothesisError(std::string hypothesis, const std::string& what,
                                 const Point3& witness)
    : Error(hypothesis + ": " + what + " at " + format_point(witness)),
      hypothesis_(std::move(hypothesis)),
      witness_(witness) {}

}  // namespace kgsa
