#pragma once

#include <stdexcept>
#include <string>

namespace egame {

/// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (m < 2, pq >= 4, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Graph fails a hypothesis, e.g. an even m where odd-neighborliness is required.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Graph has the wrong shape for the requested operation (not a triangle, missing edge).
class StructureError : public Error {
public:
  using Error::Error;
};

/// A precondition of a certificate operation (usually condition (*)) does not hold.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Firing a node whose value is not positive.
class IllegalMove : public Error {
public:
  IllegalMove(std::size_t node, double value, const std::string& what)
      : Error(what), node_(node), value_(value) {}

  std::size_t node() const noexcept { return node_; }
  double value() const noexcept { return value_; }

private:
  std::size_t node_;
  double value_;
};

/// Malformed input document. Line and column are 1-based; 0 when unknown.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// An internal cross-check failed. Indicates a bug, never bad input.
class VerificationError : public Error {
public:
  using Error::Error;
};

}  // namespace egame
