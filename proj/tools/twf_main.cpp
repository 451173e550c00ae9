#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "twf/errors.hpp"
#include "twf/experiments.hpp"
#include "twf/flow.hpp"
#include "twf/init.hpp"
#include "twf/io.hpp"
#include "twf/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace twf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitDivergence = 4;

struct Settings {
  int p = 1000;
  int m = 7000;
  int k = 100;
  double nsr = 1.0;
  double alpha = 0.1;
  double beta = 1.0;
  double mu = 0.01;
  int iters = 1000;
  std::string op = "soft";
  std::string noise_family = "gaussian";
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out = ".";
  std::string preset;
  std::string config;
  std::string axis;
  std::string grid;
  int trials = -1;
  std::string which = "all";
  std::string instance_path;
  std::string save_instance_path;
  bool trace = false;
  bool timing = false;
  std::string suite;
  std::string inject_fault;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` files; '#' starts a comment. Values from flags given on
// the command line win over file values.
std::vector<std::pair<int, std::pair<std::string, std::string>>> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string str) {
      const auto a = str.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = str.find_last_not_of(" \t\r");
      return str.substr(a, b - a + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    entries.push_back({lineno, {key, value}});
  }
  return entries;
}

template <typename T>
T parse_number(const std::string& value, const std::string& where) {
  T out;
  std::istringstream ss(value);
  ss >> out;
  if (ss.fail() || !ss.eof())
    throw ConfigError(where + ": cannot parse number '" + value + "'");
  return out;
}

void apply_config_entry(Settings& s, const std::string& key,
                        const std::string& value, const std::string& where) {
  if (key == "p") s.p = parse_number<int>(value, where);
  else if (key == "m") s.m = parse_number<int>(value, where);
  else if (key == "k") s.k = parse_number<int>(value, where);
  else if (key == "nsr") s.nsr = parse_number<double>(value, where);
  else if (key == "alpha") s.alpha = parse_number<double>(value, where);
  else if (key == "beta") s.beta = parse_number<double>(value, where);
  else if (key == "mu") s.mu = parse_number<double>(value, where);
  else if (key == "iters") s.iters = parse_number<int>(value, where);
  else if (key == "operator") s.op = value;
  else if (key == "noise-family") s.noise_family = value;
  else if (key == "seed") s.seed = parse_number<std::uint64_t>(value, where);
  else if (key == "workers") s.workers = parse_number<int>(value, where);
  else if (key == "out") s.out = value;
  else if (key == "preset") s.preset = value;
  else if (key == "axis") s.axis = value;
  else if (key == "grid") s.grid = value;
  else if (key == "trials") s.trials = parse_number<int>(value, where);
  else if (key == "which") s.which = value;
  else if (key == "instance") s.instance_path = value;
  else if (key == "save-instance") s.save_instance_path = value;
  else if (key == "trace") s.trace = parse_number<int>(value, where) != 0;
  else if (key == "timing") s.timing = parse_number<int>(value, where) != 0;
  else if (key == "suite") s.suite = value;
  else throw ConfigError(where + ": unknown key '" + key + "'");
}

void apply_preset(Settings& s) {
  if (s.preset.empty()) return;
  if (s.preset == "paper") {
    s.p = 1000;
    s.m = 7000;
    s.k = 100;
  } else if (s.preset == "quick") {
    s.p = 200;
    s.m = 2000;
    s.k = 20;
    if (s.trials < 0) s.trials = 5;
  } else {
    throw ConfigError("unknown preset '" + s.preset + "' (paper|quick)");
  }
}

// Resolution order: defaults < preset < config file < command-line flags.
void resolve_settings(Settings& s, CLI::App* cmd) {
  const Settings flag_values = s;
  Settings resolved;
  resolved.inject_fault = flag_values.inject_fault;

  std::string config_path = flag_values.config;
  if (cmd->count("--config") == 0) config_path.clear();

  std::string preset = flag_values.preset;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  if (!config_path.empty()) {
    entries = parse_config_file(config_path);
    if (cmd->count("--preset") == 0)
      for (const auto& [lineno, kv] : entries)
        if (kv.first == "preset") preset = kv.second;
  }
  resolved.preset = preset;
  apply_preset(resolved);

  for (const auto& [lineno, kv] : entries) {
    if (kv.first == "preset") continue;
    apply_config_entry(resolved, kv.first, kv.second,
                       config_path + ":" + std::to_string(lineno));
  }

  auto take = [&](const std::string& name, auto member) {
    if (cmd->count(name) > 0) resolved.*member = flag_values.*member;
  };
  take("--p", &Settings::p);
  take("--m", &Settings::m);
  take("--k", &Settings::k);
  take("--nsr", &Settings::nsr);
  take("--alpha", &Settings::alpha);
  take("--beta", &Settings::beta);
  take("--mu", &Settings::mu);
  take("--iters", &Settings::iters);
  take("--operator", &Settings::op);
  take("--noise-family", &Settings::noise_family);
  take("--seed", &Settings::seed);
  take("--workers", &Settings::workers);
  take("--out", &Settings::out);
  if (cmd->get_option_no_throw("--axis")) take("--axis", &Settings::axis);
  if (cmd->get_option_no_throw("--grid")) take("--grid", &Settings::grid);
  if (cmd->get_option_no_throw("--trials")) take("--trials", &Settings::trials);
  if (cmd->get_option_no_throw("--which")) take("--which", &Settings::which);
  if (cmd->get_option_no_throw("--instance"))
    take("--instance", &Settings::instance_path);
  if (cmd->get_option_no_throw("--save-instance"))
    take("--save-instance", &Settings::save_instance_path);
  if (cmd->get_option_no_throw("--trace")) take("--trace", &Settings::trace);
  if (cmd->get_option_no_throw("--timing")) take("--timing", &Settings::timing);
  if (cmd->get_option_no_throw("--suite")) take("--suite", &Settings::suite);
  resolved.config = config_path;
  s = resolved;
}

void validate_common(const Settings& s) {
  if (!(s.mu > 0.0)) throw ConfigError("mu must be positive");
  if (s.beta < 0.0) throw ConfigError("beta must be >= 0");
  if (s.alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (s.nsr < 0.0) throw ConfigError("nsr must be >= 0");
  if (s.iters < 0) throw ConfigError("iters must be >= 0");
  if (s.p < 1) throw ConfigError("p must be >= 1");
  if (s.m < 1) throw ConfigError("m must be >= 1");
  if (s.k < 1 || s.k > s.p) throw ConfigError("k must satisfy 1 <= k <= p");
  if (s.workers < 1) throw ConfigError("workers must be >= 1");
  threshold_kind_from_name(s.op);  // throws on bad name
  noise_family_from_name(s.noise_family);
}

TrialParams params_from(const Settings& s) {
  TrialParams params;
  params.p = s.p;
  params.m = s.m;
  params.k = s.k;
  params.nsr = s.nsr;
  params.family = noise_family_from_name(s.noise_family);
  params.alpha = s.alpha;
  params.beta = s.beta;
  params.mu = s.mu;
  params.iterations = s.iters;
  params.operator_kind = threshold_kind_from_name(s.op);
  return params;
}

std::vector<double> parse_grid(const std::string& grid) {
  std::vector<double> out;
  std::stringstream ss(grid);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number<double>(item, "grid"));
  return out;
}

// ---------------------------------------------------------------------------
// recover

int cmd_recover(const Settings& s) {
  validate_common(s);
  fs::create_directories(s.out);

  std::optional<ProblemInstance> instance;
  RngStream stream = RngStream::from_path(s.seed, {});
  if (!s.instance_path.empty()) {
    instance.emplace(io::load_instance(s.instance_path));
  } else {
    SparseSignal signal = generate_signal(s.p, s.k, stream);
    const double sigma = s.nsr * signal.two_norm() * signal.two_norm();
    NoiseSpec noise =
        s.nsr == 0.0 ? NoiseSpec::none()
                     : NoiseSpec{noise_family_from_name(s.noise_family), sigma};
    instance.emplace(generate_instance(signal, s.m, noise, stream,
                                       SeedRecord{s.seed, {}}));
  }
  if (!s.save_instance_path.empty())
    io::save_instance(*instance, s.save_instance_path);

  InitResult init;
  TwfTrace trace;
  try {
    init = initialize(*instance, s.alpha, 1e-8, 1000, &stream);
    TwfConfig config;
    config.mu = s.mu;
    config.beta = s.beta;
    config.iterations = s.iters;
    config.operator_kind = threshold_kind_from_name(s.op);
    config.record_trajectory = s.trace;
    config.phi_sq = init.phi_sq;
    trace = run(init.x0, *instance, config);
  } catch (const DegenerateInstanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (iteration " << e.iteration
              << ")\n";
    return kExitDivergence;
  }

  const double err = relative_error(trace.final, instance->signal());
  const double risk = empirical_risk(trace.final, *instance);

  // Advisory sample-size check m >= (1 + sigma^2/||x||^4) k^2 log(mp), C = 1.
  const double xsq =
      instance->signal().two_norm() * instance->signal().two_norm();
  const double sigma = instance->noise_spec().scale;
  const double m_required =
      (1.0 + sigma * sigma / (xsq * xsq)) * instance->signal().k() *
      instance->signal().k() *
      std::log(static_cast<double>(instance->m()) * instance->p());

  json summary{
      {"kind", "twf-recover"},
      {"version", kToolVersion},
      {"config",
       {{"p", instance->p()},
        {"m", instance->m()},
        {"k", instance->signal().k()},
        {"nsr", s.nsr},
        {"alpha", s.alpha},
        {"beta", s.beta},
        {"mu", s.mu},
        {"iters", s.iters},
        {"operator", s.op},
        {"noise_family", noise_family_name(instance->noise_spec().family)},
        {"seed", s.seed}}},
      {"init", io::init_result_json(init)},
      {"estimate", std::vector<double>(trace.final.begin(), trace.final.end())},
      {"relative_error", err},
      {"final_risk", risk},
      {"sample_size_advisory",
       {{"m", instance->m()},
        {"required_c1", m_required},
        {"satisfied", instance->m() >= m_required}}},
  };
  io::write_file((fs::path(s.out) / "estimate.json").string(),
                 summary.dump(2) + "\n");
  if (s.trace)
    io::write_file((fs::path(s.out) / "trace.csv").string(),
                   io::trace_csv(trace));

  std::printf("recover: relative_error=%s risk=%s selected=%zu%s\n",
              io::format_double(err).c_str(), io::format_double(risk).c_str(),
              init.selected.size(),
              init.fallback_used ? " (fallback init)" : "");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep + figures

void write_sweep_artifacts(const SweepResult& result, const fs::path& dir,
                           const std::string& stem, bool timing, bool with_svg,
                           const std::string& x_label) {
  io::write_file((dir / (stem + ".json")).string(),
                 io::sweep_result_json(result).dump(2) + "\n");
  io::write_file((dir / (stem + ".csv")).string(),
                 io::sweep_trials_csv(result));
  if (timing)
    io::write_file((dir / (stem + "_timing.csv")).string(),
                   io::sweep_timing_csv(result));
  if (with_svg) {
    std::vector<double> xs, ys;
    for (const auto& point : result.points) {
      xs.push_back(point.axis_value);
      ys.push_back(point.mean_error);
    }
    io::write_file(
        (dir / (stem + ".svg")).string(),
        io::line_chart_svg("Average relative error vs " + x_label, x_label,
                           "average relative error", xs, ys));
  }
}

int cmd_sweep(const Settings& s) {
  validate_common(s);
  if (s.axis.empty()) throw ConfigError("sweep requires --axis (beta|nsr|m|k)");
  if (s.grid.empty()) throw ConfigError("sweep requires --grid v1,v2,...");
  SweepSpec spec;
  spec.fixed = params_from(s);
  spec.axis = s.axis;
  spec.grid = parse_grid(s.grid);
  spec.trials = s.trials < 0 ? 10 : s.trials;
  spec.master_seed = s.seed;
  spec.validate();

  SweepResult result = run_sweep(spec, s.workers);
  fs::create_directories(s.out);
  write_sweep_artifacts(result, s.out, "sweep_" + s.axis, s.timing, false, "");
  for (const auto& point : result.points)
    std::printf("%s=%s mean_error=%s failures=%d%s\n", s.axis.c_str(),
                io::format_double(point.axis_value).c_str(),
                io::format_double(point.mean_error).c_str(), point.failures,
                point.valid ? "" : " [invalid]");
  return kExitOk;
}

std::string axis_x_label(FigureAxis axis) {
  switch (axis) {
    case FigureAxis::beta: return "thresholding parameter beta";
    case FigureAxis::nsr: return "noise-to-signal ratio";
    case FigureAxis::m: return "sample size m";
    case FigureAxis::k: return "sparsity k";
  }
  return "";
}

int cmd_figures(const Settings& s) {
  validate_common(s);
  if (s.preset.empty())
    throw ConfigError("figures requires --preset (paper|quick)");
  const PresetKind preset =
      s.preset == "paper" ? PresetKind::paper : PresetKind::quick;
  std::vector<FigureAxis> axes;
  if (s.which == "all") {
    axes = {FigureAxis::beta, FigureAxis::nsr, FigureAxis::m, FigureAxis::k};
  } else if (s.which == "beta") {
    axes = {FigureAxis::beta};
  } else if (s.which == "nsr") {
    axes = {FigureAxis::nsr};
  } else if (s.which == "m") {
    axes = {FigureAxis::m};
  } else if (s.which == "k") {
    axes = {FigureAxis::k};
  } else {
    throw ConfigError("unknown figure '" + s.which + "' (beta|nsr|m|k|all)");
  }

  fs::create_directories(s.out);
  for (FigureAxis axis : axes) {
    SweepSpec spec = figure_sweep(axis, preset, 0);
    // Preset-resolved sizes plus any explicit flag overrides; the swept
    // parameter itself is replaced per grid point.
    spec.fixed = params_from(s);
    // Independent seed branch per axis so `--which all` never reuses streams.
    spec.master_seed =
        RngStream::from_path(s.seed, {100 + static_cast<std::uint64_t>(axis)})
            .key();
    if (s.trials > 0) spec.trials = s.trials;
    SweepResult result = run_sweep(spec, s.workers);
    const std::string stem = "figure_" + figure_axis_name(axis);
    write_sweep_artifacts(result, s.out, stem, s.timing, true,
                          axis_x_label(axis));
    std::printf("%s: %zu points written to %s/%s.{json,csv,svg}\n",
                figure_axis_name(axis).c_str(), result.points.size(),
                s.out.c_str(), stem.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// selftest

struct SuiteResult {
  bool pass = true;
  std::string detail;
};

SuiteResult suite_threshold_contract(std::uint64_t seed, bool fault) {
  RngStream rng = RngStream::from_path(seed, {21});
  for (int i = 0; i < 1000000; ++i) {
    const double scale = std::exp(4.0 * (rng.next_double() - 0.5));
    double x = scale * rng.next_normal();
    const double tau = std::abs(scale * rng.next_normal());
    if (i % 10 == 0) x = (i % 20 == 0) ? tau : -tau;  // exact boundary
    for (ThresholdKind kind : {ThresholdKind::soft, ThresholdKind::hard}) {
      double t = apply_threshold(kind, x, tau);
      if (fault) t = x;  // corrupted operator hook
      if (std::abs(x) <= tau && t != 0.0)
        return {false, "T_tau(x) != 0 inside [-tau, tau]"};
      if (std::abs(t - x) > tau) return {false, "|T_tau(x) - x| > tau"};
    }
  }
  return {};
}

SuiteResult suite_gradient(std::uint64_t seed) {
  RngStream rng = RngStream::from_path(seed, {22});
  for (int i = 0; i < 100; ++i) {
    const int p = 2 + static_cast<int>(rng.next_u64() % 19);
    const int m = 5 + static_cast<int>(rng.next_u64() % 46);
    const int k = 1 + static_cast<int>(rng.next_u64() % p);
    SparseSignal signal = generate_signal(p, k, rng);
    ProblemInstance instance = generate_instance(
        signal, m, NoiseSpec::gaussian(0.5 * signal.two_norm()), rng);
    Vector z(p);
    for (int l = 0; l < p; ++l) z[l] = rng.next_normal();

    Vector analytic = gradient(z, instance);
    Vector numeric(p);
    const double h = 1e-6;
    for (int l = 0; l < p; ++l) {
      Vector zp = z, zm = z;
      zp[l] += h;
      zm[l] -= h;
      numeric[l] =
          (empirical_risk(zp, instance) - empirical_risk(zm, instance)) /
          (2.0 * h);
    }
    const double rel =
        (analytic - numeric).norm() / std::max(analytic.norm(), 1e-12);
    if (rel > 1e-5)
      return {false,
              "finite-difference mismatch, rel=" + io::format_double(rel)};
  }
  return {};
}

SuiteResult suite_eigensolver(std::uint64_t seed) {
  RngStream rng = RngStream::from_path(seed, {23});
  int done = 0;
  while (done < 100) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 19);
    Matrix G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = rng.next_normal();
    Matrix M = (G + G.transpose()) / 2.0;

    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    Eigen::Index top;
    es.eigenvalues().cwiseAbs().maxCoeff(&top);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != top)
        gap = std::min(gap, std::abs(es.eigenvalues()[top]) -
                                std::abs(es.eigenvalues()[i]));
    if (gap < 1e-3) continue;  // redraw to respect the gap precondition
    ++done;

    EigenResult mine = leading_eigenvector(M, 1e-10, 500000, &rng);
    if (std::abs(mine.value - es.eigenvalues()[top]) > 1e-8)
      return {false, "eigenvalue mismatch"};
    Vector ref = es.eigenvectors().col(top);
    if (ref.dot(mine.vector) < 0) ref = -ref;
    if ((ref - mine.vector).norm() > 1e-6)
      return {false, "eigenvector mismatch"};
  }
  return {};
}

SuiteResult suite_oracle_expectations(std::uint64_t seed) {
  OracleReport report = oracle_checks(seed);
  for (const auto& check : report.checks)
    if (!check.pass)
      return {false,
              check.name + " measured=" + io::format_double(check.measured)};
  return {};
}

SuiteResult suite_equivariance(std::uint64_t seed) {
  RngStream rng = RngStream::from_path(seed, {24});
  SparseSignal signal = generate_signal(50, 5, rng);
  ProblemInstance instance = generate_instance(
      signal, 200,
      NoiseSpec::gaussian(0.5 * signal.two_norm() * signal.two_norm()), rng);
  Vector x0(50);
  for (int i = 0; i < 50; ++i) x0[i] = rng.next_normal();
  TwfConfig config;
  config.iterations = 50;
  config.phi_sq = norm_estimate(instance);
  Vector a = run(x0, instance, config).final;
  Vector b = run(Vector(-x0), instance, config).final;
  for (int i = 0; i < 50; ++i)
    if (a[i] != -b[i])
      return {false,
              "run(-x0) != -run(x0) at coordinate " + std::to_string(i)};
  return {};
}

SuiteResult suite_determinism(std::uint64_t seed) {
  TrialParams params;
  params.p = 60;
  params.m = 300;
  params.k = 6;
  params.nsr = 0.5;
  params.iterations = 100;
  TrialResult a = run_trial(params, RngStream::from_path(seed, {25}));
  TrialResult b = run_trial(params, RngStream::from_path(seed, {25}));
  if (a.error != b.error || a.failed != b.failed)
    return {false, "identical seeds gave different trial results"};

  SweepSpec spec;
  spec.fixed = params;
  spec.axis = "nsr";
  spec.grid = {0.2, 0.6};
  spec.trials = 3;
  spec.master_seed = seed;
  const std::string serial = io::sweep_result_json(run_sweep(spec, 1)).dump();
  const std::string parallel = io::sweep_result_json(run_sweep(spec, 4)).dump();
  if (serial != parallel)
    return {false, "sweep JSON differs between workers=1 and workers=4"};
  return {};
}

int cmd_selftest(const Settings& s) {
  using Suite = std::function<SuiteResult()>;
  const bool fault_threshold = s.inject_fault == "threshold-contract";
  std::vector<std::pair<std::string, Suite>> suites = {
      {"threshold-contract",
       [&] { return suite_threshold_contract(s.seed, fault_threshold); }},
      {"gradient", [&] { return suite_gradient(s.seed); }},
      {"eigensolver", [&] { return suite_eigensolver(s.seed); }},
      {"oracle-expectations",
       [&] { return suite_oracle_expectations(s.seed); }},
      {"equivariance", [&] { return suite_equivariance(s.seed); }},
      {"determinism", [&] { return suite_determinism(s.seed); }},
  };

  bool any_matched = false;
  std::string first_failure;
  for (const auto& [name, suite] : suites) {
    if (!s.suite.empty() && s.suite != name) continue;
    any_matched = true;
    SuiteResult result = suite();
    if (result.pass) {
      std::printf("PASS %s\n", name.c_str());
    } else {
      std::printf("FAIL %s (%s)\n", name.c_str(), result.detail.c_str());
      if (first_failure.empty()) first_failure = name;
    }
  }
  if (!any_matched) throw ConfigError("unknown suite '" + s.suite + "'");
  if (!first_failure.empty()) {
    std::printf("selftest: FAIL (first failure: %s)\n", first_failure.c_str());
    return kExitFailure;
  }
  std::printf("selftest: all suites passed\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thresholded gradient descent for noisy sparse phase retrieval"};
  app.require_subcommand(1);
  Settings s;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--p", s.p, "ambient dimension");
    cmd->add_option("--m", s.m, "sample size");
    cmd->add_option("--k", s.k, "sparsity");
    cmd->add_option("--nsr", s.nsr, "noise-to-signal ratio sigma/||x||^2");
    cmd->add_option("--alpha", s.alpha, "initialization screening parameter");
    cmd->add_option("--beta", s.beta, "threshold multiplier");
    cmd->add_option("--mu", s.mu, "gradient step size");
    cmd->add_option("--iters", s.iters, "number of iterations");
    cmd->add_option("--operator", s.op, "threshold operator (soft|hard)");
    cmd->add_option("--noise-family", s.noise_family,
                    "gaussian|laplace|centered_exponential");
    cmd->add_option("--seed", s.seed, "master seed");
    cmd->add_option("--workers", s.workers, "parallel trial workers");
    cmd->add_option("--out", s.out, "output directory");
    cmd->add_option("--preset", s.preset, "paper|quick parameter preset");
    cmd->add_option("--config", s.config, "key = value config file");
  };

  CLI::App* recover = app.add_subcommand("recover", "recover one instance");
  add_common(recover);
  recover->add_option("--instance", s.instance_path, "load instance file");
  recover->add_option("--save-instance", s.save_instance_path,
                      "write the synthesized instance");
  recover->add_flag("--trace", s.trace, "write per-iteration trace.csv");

  CLI::App* sweep = app.add_subcommand("sweep", "run one parameter sweep");
  add_common(sweep);
  sweep->add_option("--axis", s.axis, "swept parameter (beta|nsr|m|k)");
  sweep->add_option("--grid", s.grid, "comma-separated grid values");
  sweep->add_option("--trials", s.trials, "trials per grid point");
  sweep->add_flag("--timing", s.timing, "also write volatile timing csv");

  CLI::App* figures =
      app.add_subcommand("figures", "reproduce the study figures");
  add_common(figures);
  figures->add_option("--which", s.which, "beta|nsr|m|k|all");
  figures->add_option("--trials", s.trials, "override trials per grid point");
  figures->add_flag("--timing", s.timing, "also write volatile timing csv");

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the property suites");
  add_common(selftest);
  selftest->add_option("--suite", s.suite, "run only the named suite");
  selftest->add_option("--inject-fault", s.inject_fault, "")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    resolve_settings(s, cmd);
    if (cmd == recover) return cmd_recover(s);
    if (cmd == sweep) return cmd_sweep(s);
    if (cmd == figures) return cmd_figures(s);
    if (cmd == selftest) return cmd_selftest(s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DegenerateInstanceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
