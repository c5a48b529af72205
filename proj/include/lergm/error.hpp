#pragma once

#include <stdexcept>
#include <string>

namespace lergm {

/// Malformed textual input (edge lists, membership files, config files).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Inputs that parse but violate a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimizer or estimator failure (non-finite objectives, singular systems).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact enumeration refused because the state space is too large.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, int required_nodes)
      : std::runtime_error(what), required_nodes_(required_nodes) {}
  int required_nodes() const { return required_nodes_; }

 private:
  int required_nodes_;
};

}  // namespace lergm
