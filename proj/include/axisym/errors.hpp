#pragma once

#include <stdexcept>
#include <string>

namespace axisym {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Kernel evaluated at a coincident source/target pair.
class SingularPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Fields, caches or trajectories built on incompatible grids or lattices.
class GridMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown key, unparsable value or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace axisym
