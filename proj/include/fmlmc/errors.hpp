#pragma once

#include <stdexcept>
#include <string>

namespace fmlmc {

/// Invalid experiment configuration (bad file, missing key, out-of-range value).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative linear solve failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what + " (achieved relative residual " +
                           std::to_string(achieved_residual) + ")"),
        achieved_residual(achieved_residual) {}

  double achieved_residual;
};

} // namespace fmlmc
