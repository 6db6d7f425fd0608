#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgsa {

using Point3 = std::array<double, 3>;

std::string format_point(const Point3& p);

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class UndeclaredSymbolError : public Error {
 public:
  explicit UndeclaredSymbolError(std::string symbol);
  const std::string& symbol() const noexcept { return symbol_; }

 private:
  std::string symbol_;
};

/// Function evaluated outside its domain (log of a non-positive number,
/// division by zero, ...). `node()` is the offending sub-expression.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string node);
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// Geometry is degenerate at a point: non-positive-definite metric, vanishing
/// determinant, non-positive density, or a null Killing field.
class DegenerateError : public Error {
 public:
  DegenerateError(const std::string& what, const Point3& where);
  const Point3& where() const noexcept { return where_; }

 private:
  Point3 where_;
};

/// A structural hypothesis fails at a sampled witness point.
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& what,
                  const Point3& witness);
  const std::string& hypothesis() const noexcept { return hypothesis_; }
  const Point3& witness() const noexcept { return witness_; }

 private:
  std::string hypothesis_;
  Point3 witness_;
};

/// Iterative method failed to reach its tolerance within the iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgsa
