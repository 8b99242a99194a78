#pragma once

#include <stdexcept>
#include <string>

namespace qgeom {

/// Parameter outside the region where an operation is defined
/// (wrong sign of k, orbit above the barrier, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A truncation, quadrature or integrator failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal bookkeeping inconsistency in the perturbation engine.
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// Malformed request: empty ranges, missing options and the like.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace qgeom
