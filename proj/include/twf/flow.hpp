#pragma once

#include <vector>

#include "twf/errors.hpp"
#include "twf/model.hpp"
#include "twf/thresholding.hpp"
#include "twf/types.hpp"

namespace twf {

/// Tuning for the thresholded gradient iteration. phi_sq is the norm
/// estimate produced by initialization; it scales every step as mu/phi_sq
/// and stays frozen for all iterations.
struct TwfConfig {
  double mu = 0.01;
  double beta = 1.0;
  int iterations = 1000;
  ThresholdKind operator_kind = ThresholdKind::soft;
  bool record_trajectory = false;
  double phi_sq = 1.0;

  void validate() const;
};

struct TwfIterationRecord {
  int iter = 0;
  double risk = 0.0;
  double tau = 0.0;
  double step_norm = 0.0;
  int support_size = 0;
};

struct TwfTrace {
  Vector final;
  /// T + 1 entries when recording (iterate 0 through T).
  std::vector<TwfIterationRecord> records;
};

/// Divergence during run(); carries whatever trace was accumulated before
/// the blow-up.
class TwfDivergenceError : public DivergenceError {
public:
  TwfDivergenceError(const std::string& what, int iteration, TwfTrace partial)
      : DivergenceError(what, iteration), partial(std::move(partial)) {}
  TwfTrace partial;
};

/// f(z) = (1/4m) sum_j (|a_j'z|^2 - y_j)^2.
double empirical_risk(const Vector& z, const ProblemInstance& instance);

/// grad f(z) = (1/m) sum_j (|a_j'z|^2 - y_j)(a_j'z) a_j, computed as two
/// matrix-vector passes.
Vector gradient(const Vector& z, const ProblemInstance& instance);

/// tau(z) = sqrt( beta*log(p)/m^2 * sum_j (|a_j'z|^2 - y_j)^2 |a_j'z|^2 ),
/// natural log. The log(p) factor is the universal-threshold calibration
/// for p coordinates.
double threshold_level(const Vector& z, const ProblemInstance& instance,
                       double beta);

/// One update: threshold the gradient step at level (mu/phi_sq)*tau(z).
Vector twf_step(const Vector& z, const ProblemInstance& instance,
                const TwfConfig& config);

/// Iterate twf_step `iterations` times from init.
TwfTrace run(const Vector& init, const ProblemInstance& instance,
             const TwfConfig& config);

}  // namespace twf
