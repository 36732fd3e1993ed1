#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace okoc {

/// Malformed arguments: dimension mismatch, non-finite input, bad counts.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Syntax error in an expression, located by byte offset into the source.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": expected " +
                           expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

/// Well-formed expression that references something outside its signature.
class SemanticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression evaluation produced a non-finite or undefined value.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, int node) : std::runtime_error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver input rejected (e.g. a Gram matrix that is not PSD after jitter).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace okoc
