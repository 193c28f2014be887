#pragma once

#include <stdexcept>
#include <string>

namespace ptlab {

/// An eigenvalue list that cannot be partitioned into reals and
/// conjugate pairs. Signals a broken ensemble constructor, not bad luck.
class SymmetryViolation : public std::runtime_error {
 public:
  explicit SymmetryViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Newton/fixed-point or continuation breakdown in the Pastur solver.
class SolverFailure : public std::runtime_error {
 public:
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid run configuration (schema violation, bad units, bad ranges).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ptlab
