#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "twf/experiments.hpp"
#include "twf/flow.hpp"
#include "twf/init.hpp"
#include "twf/model.hpp"

namespace twf::io {

/// Instance file: one line of JSON (dimensions, seed record, noise spec,
/// measurements, noise, signal), then the design matrix as a raw row-major
/// little-endian float64 blob.
void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

nlohmann::json trial_params_json(const TrialParams& params);
nlohmann::json init_result_json(const InitResult& init);
nlohmann::json trace_json(const TwfTrace& trace);

/// Deterministic sweep artifact: resolved spec, per-point means, per-trial
/// errors and seed records. Timing is deliberately excluded so identical
/// seeds give bit-identical JSON regardless of worker count.
nlohmann::json sweep_result_json(const SweepResult& result);

nlohmann::json oracle_report_json(const OracleReport& report);
nlohmann::json rate_report_json(const RateReport& report);

/// Columns: iter,risk,tau,step_norm,support_size.
std::string trace_csv(const TwfTrace& trace);

/// Columns: axis_value,trial,error,seed,wallclock_ms. The seed is the
/// trial's derived substream key. The wallclock_ms column is written as 0
/// so the file is reproducible; live timing goes to sweep_timing_csv.
std::string sweep_trials_csv(const SweepResult& result);

/// Volatile timing sidecar: axis_value,trial,wallclock_ms.
std::string sweep_timing_csv(const SweepResult& result);

/// Self-contained single-series SVG line chart; byte-deterministic for
/// identical inputs.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<double>& xs,
                           const std::vector<double>& ys);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest round-trip decimal form of a double (deterministic).
std::string format_double(double v);

}  // namespace twf::io
