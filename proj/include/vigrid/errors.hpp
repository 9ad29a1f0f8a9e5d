#pragma once

#include <stdexcept>
#include <string>

namespace vigrid {

/// Scenario or input data failed structural validation (CLI exit code 2).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver could not produce a result (CLI exit code 3).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical integration produced a non-finite state.
class IntegrationError : public SolverError {
 public:
  IntegrationError(const std::string& what, int bus_id)
      : SolverError(what), bus_id(bus_id) {}
  int bus_id;
};

}  // namespace vigrid
