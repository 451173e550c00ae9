#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twf {

/// Noise overwhelmed the signal: the norm estimate phi^2 came out nonpositive,
/// so no meaningful initial estimate exists.
class DegenerateInstanceError : public std::runtime_error {
public:
  explicit DegenerateInstanceError(const std::string& what, double phi_sq)
      : std::runtime_error(what), phi_sq(phi_sq) {}
  double phi_sq;
};

/// Iterates blew up (non-finite values or norm beyond the guard radius).
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

/// Eigensolver failed to reach the requested residual within max_iter.
/// Carries the best iterate found so far.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(const std::string& what, std::vector<double> best_vector,
                     double best_value, double residual, int iterations)
      : std::runtime_error(what),
        best_vector(std::move(best_vector)),
        best_value(best_value),
        residual(residual),
        iterations(iterations) {}
  std::vector<double> best_vector;
  double best_value;
  double residual;
  int iterations;
};

}  // namespace twf
