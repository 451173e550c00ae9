#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "twf/flow.hpp"
#include "twf/init.hpp"
#include "twf/model.hpp"

namespace twf {

/// One fully-resolved trial: problem sizes plus algorithm tuning.
/// sigma is NSR * ||x||_2^2, fixed per trial after the signal is drawn.
struct TrialParams {
  int p = 1000;
  int m = 7000;
  int k = 100;
  double nsr = 1.0;
  NoiseFamily family = NoiseFamily::gaussian;
  double alpha = 0.1;
  double beta = 1.0;
  double mu = 0.01;
  int iterations = 1000;
  ThresholdKind operator_kind = ThresholdKind::soft;
  double eig_tol = 1e-8;
  int eig_max_iter = 1000;

  void validate() const;
};

struct TrialResult {
  double error = 0.0;
  double init_error = 0.0;
  bool failed = false;
  std::string failure;  // "degenerate-instance" | "divergence" | "eigen-convergence"
  bool fallback_used = false;
  SeedRecord seed;
  double wallclock_ms = 0.0;
};

TrialResult run_trial(const TrialParams& params, RngStream stream,
                      SeedRecord seed = {});

struct SweepSpec {
  TrialParams fixed;
  std::string axis;          // one of "beta", "nsr", "m", "k"
  std::vector<double> grid;  // nonempty, strictly increasing
  int trials = 10;
  std::uint64_t master_seed = 0;

  void validate() const;
  /// fixed with the swept parameter replaced by axis_value.
  TrialParams resolve(double axis_value) const;
};

struct PointResult {
  double axis_value = 0.0;
  double mean_error = 0.0;  // over non-failed trials; NaN if none
  int failures = 0;
  bool valid = true;  // flagged false when failures exceed 20%
  std::vector<TrialResult> trials;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<PointResult> points;
};

/// Runs trials x grid points; trial (i, t) draws from substream
/// (master_seed, i, t), so aggregates are independent of scheduling.
SweepResult run_sweep(const SweepSpec& spec, int workers = 1);

struct RatePoint {
  int m = 0;
  double mean_error = 0.0;
  double error_sqrt_m = 0.0;
};

struct RateReport {
  std::vector<RatePoint> points;
  bool noiseless = false;  // rate check skipped when true
  bool rate_consistent = false;
  std::string note;
};

/// Error-vs-m study against the m^{-1/2} scaling of the estimation rate.
RateReport rate_scaling_study(int p, int k, double nsr,
                              const std::vector<int>& m_grid, int trials,
                              std::uint64_t master_seed, int workers = 1);

struct OracleCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_pass = false;
};

/// Monte-Carlo checks of the second-moment and marginal expectation
/// identities plus the design spectral-norm bound and constructor guards.
OracleReport oracle_checks(std::uint64_t seed);

enum class PresetKind { paper, quick };
enum class FigureAxis { beta, nsr, m, k };

/// Sweep specs reproducing the four simulation figures. The paper preset
/// runs p=1000 problems; quick scales everything down for CI.
SweepSpec figure_sweep(FigureAxis axis, PresetKind preset,
                       std::uint64_t master_seed);

std::string figure_axis_name(FigureAxis axis);

/// Schedules fn(0..n-1) over `workers` threads. Any worker count produces
/// the same side effects as long as tasks touch disjoint slots.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace twf
