#pragma once

#include <stdexcept>
#include <string>

namespace cmilab {

/// Raised when a request exceeds the dense-simulation budget (register size,
/// enumeration count, tensor-network grid).
class BudgetError : public std::length_error {
 public:
  explicit BudgetError(const std::string& what) : std::length_error(what) {}
};

/// Raised when a certified inequality fails at its stated tolerance.
class BoundViolation : public std::runtime_error {
 public:
  explicit BoundViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmilab
