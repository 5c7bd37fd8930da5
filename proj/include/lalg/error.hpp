#pragma once

#include <stdexcept>
#include <string>

namespace lalg {

/// Point outside a field's domain box, or a map escaping its target box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dimension or output-shape mismatch.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Construction-time invariant violated by user input (antisymmetry, covering, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation's documented precondition does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Derivative requested beyond the deepest supported jet nesting.
class DepthError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Two routes that must agree by construction disagree.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario file problems; `where` names the offending JSON location.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace lalg
