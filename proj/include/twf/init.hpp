#pragma once

#include <vector>

#include "twf/model.hpp"
#include "twf/rng.hpp"
#include "twf/types.hpp"

namespace twf {

/// Output of the screening + restricted spectral initialization.
struct InitResult {
  double phi_sq = 0.0;         // mean of the measurements
  Vector marginals;            // I_1..I_p
  std::vector<int> selected;   // screened coordinate set (0-based, sorted)
  Vector x0;                   // initial estimate, ||x0||_2 = sqrt(phi_sq)
  int eigen_iterations = 0;
  double eigen_residual = 0.0;
  bool fallback_used = false;  // screening was empty; kept the top marginal
};

/// phi^2 = mean of y.
double norm_estimate(const ProblemInstance& instance);

/// I_l = (1/m) sum_j y_j a_jl^2 for every coordinate l.
Vector marginal_signals(const ProblemInstance& instance);

/// { l : I_l > (1 + alpha * sqrt(log(mp)/m)) * phi_sq }, strict inequality,
/// natural log. May be empty.
std::vector<int> select_support(const Vector& marginals, double phi_sq,
                                double alpha, int m, int p);

/// (1/m) sum_j y_j a_jS a_jS' materialized compactly on |S| x |S|;
/// rows/columns follow the order of `selected`.
Matrix restricted_second_moment(const ProblemInstance& instance,
                                const std::vector<int>& selected);

struct EigenResult {
  Vector vector;    // unit norm, largest-magnitude coordinate positive
  double value;     // Rayleigh quotient at the returned vector
  int iterations;
  double residual;  // ||Mv - value*v||_2 at return
};

/// Power iteration for the eigenvalue of largest magnitude. Deterministic
/// all-ones start; restarts from `restart_rng` (or an internal fixed stream)
/// if the residual stalls, which catches starts orthogonal to the dominant
/// eigenspace. Throws ConvergenceFailure after max_iter without reaching
/// ||Mv - lambda v||_2 <= tol * max(|lambda|, 1).
EigenResult leading_eigenvector(const Matrix& matrix, double tol = 1e-8,
                                int max_iter = 1000,
                                RngStream* restart_rng = nullptr);

/// Full screening + restricted spectral estimate, scaled to norm sqrt(phi_sq).
InitResult initialize(const ProblemInstance& instance, double alpha,
                      double eig_tol = 1e-8, int eig_max_iter = 1000,
                      RngStream* restart_rng = nullptr);

}  // namespace twf
