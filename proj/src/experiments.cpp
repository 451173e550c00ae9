#include "twf/experiments.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "twf/errors.hpp"

namespace twf {

void TrialParams::validate() const {
  if (p < 1) throw std::invalid_argument("TrialParams: p must be >= 1");
  if (k < 1 || k > p) throw std::invalid_argument("TrialParams: need 1 <= k <= p");
  if (m < 1) throw std::invalid_argument("TrialParams: m must be >= 1");
  if (nsr < 0.0 || !std::isfinite(nsr))
    throw std::invalid_argument("TrialParams: nsr must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("TrialParams: alpha must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("TrialParams: beta must be >= 0");
  if (!(mu > 0.0)) throw std::invalid_argument("TrialParams: mu must be positive");
  if (iterations < 0)
    throw std::invalid_argument("TrialParams: iterations must be >= 0");
}

TrialResult run_trial(const TrialParams& params, RngStream stream,
                      SeedRecord seed) {
  params.validate();
  TrialResult result;
  result.seed = std::move(seed);
  const auto t0 = std::chrono::steady_clock::now();

  SparseSignal signal = generate_signal(params.p, params.k, stream);
  const double sigma = params.nsr * signal.two_norm() * signal.two_norm();
  NoiseSpec noise = params.nsr == 0.0
                        ? NoiseSpec::none()
                        : NoiseSpec{params.family, sigma};
  ProblemInstance instance =
      generate_instance(signal, params.m, noise, stream, result.seed);

  try {
    InitResult init = initialize(instance, params.alpha, params.eig_tol,
                                 params.eig_max_iter, &stream);
    result.init_error = relative_error(init.x0, signal);
    result.fallback_used = init.fallback_used;

    TwfConfig config;
    config.mu = params.mu;
    config.beta = params.beta;
    config.iterations = params.iterations;
    config.operator_kind = params.operator_kind;
    config.phi_sq = init.phi_sq;
    TwfTrace trace = run(init.x0, instance, config);
    result.error = relative_error(trace.final, signal);
  } catch (const DegenerateInstanceError&) {
    result.failed = true;
    result.failure = "degenerate-instance";
  } catch (const DivergenceError&) {
    result.failed = true;
    result.failure = "divergence";
  } catch (const ConvergenceFailure&) {
    result.failed = true;
    result.failure = "eigen-convergence";
  }

  const auto t1 = std::chrono::steady_clock::now();
  result.wallclock_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

void SweepSpec::validate() const {
  fixed.validate();
  if (axis != "beta" && axis != "nsr" && axis != "m" && axis != "k")
    throw std::invalid_argument("SweepSpec: unknown axis " + axis);
  if (grid.empty()) throw std::invalid_argument("SweepSpec: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("SweepSpec: grid must be strictly increasing");
  if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be >= 1");
  for (double v : grid) (void)resolve(v);  // range-check every point
}

TrialParams SweepSpec::resolve(double axis_value) const {
  TrialParams params = fixed;
  if (axis == "beta") {
    params.beta = axis_value;
  } else if (axis == "nsr") {
    params.nsr = axis_value;
  } else if (axis == "m") {
    params.m = static_cast<int>(std::llround(axis_value));
  } else if (axis == "k") {
    params.k = static_cast<int>(std::llround(axis_value));
  } else {
    throw std::invalid_argument("SweepSpec: unknown axis " + axis);
  }
  params.validate();
  return params;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SweepResult run_sweep(const SweepSpec& spec, int workers) {
  spec.validate();
  const int n_points = static_cast<int>(spec.grid.size());
  const int n_tasks = n_points * spec.trials;

  SweepResult result;
  result.spec = spec;
  result.points.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    result.points[i].axis_value = spec.grid[i];
    result.points[i].trials.resize(spec.trials);
  }

  parallel_for(n_tasks, workers, [&](int task) {
    const int point = task / spec.trials;
    const int trial = task % spec.trials;
    TrialParams params = spec.resolve(spec.grid[point]);
    SeedRecord seed{spec.master_seed,
                    {static_cast<std::uint64_t>(point),
                     static_cast<std::uint64_t>(trial)}};
    RngStream stream = RngStream::from_path(
        spec.master_seed, {static_cast<std::uint64_t>(point),
                           static_cast<std::uint64_t>(trial)});
    result.points[point].trials[trial] = run_trial(params, stream, seed);
  });

  for (auto& point : result.points) {
    double sum = 0.0;
    int ok = 0;
    for (const auto& trial : point.trials) {
      if (trial.failed) {
        ++point.failures;
      } else {
        sum += trial.error;
        ++ok;
      }
    }
    point.mean_error =
        ok > 0 ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    point.valid = point.failures * 5 <= spec.trials;  // <= 20% failures
  }
  return result;
}

RateReport rate_scaling_study(int p, int k, double nsr,
                              const std::vector<int>& m_grid, int trials,
                              std::uint64_t master_seed, int workers) {
  SweepSpec spec;
  spec.fixed.p = p;
  spec.fixed.k = k;
  spec.fixed.nsr = nsr;
  spec.axis = "m";
  spec.grid.assign(m_grid.begin(), m_grid.end());
  spec.trials = trials;
  spec.master_seed = master_seed;

  SweepResult sweep = run_sweep(spec, workers);

  RateReport report;
  for (const auto& point : sweep.points) {
    RatePoint rp;
    rp.m = static_cast<int>(std::llround(point.axis_value));
    rp.mean_error = point.mean_error;
    rp.error_sqrt_m = point.mean_error * std::sqrt(static_cast<double>(rp.m));
    report.points.push_back(rp);
  }
  if (nsr == 0.0) {
    report.noiseless = true;
    report.note = "noiseless regime, rate check skipped";
    return report;
  }
  // error ~ m^{-1/2} iff error*sqrt(m) is flat across the grid.
  report.rate_consistent = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    const double ratio =
        report.points[i].error_sqrt_m / report.points[i - 1].error_sqrt_m;
    if (!(ratio > 0.7 && ratio < 1.43)) report.rate_consistent = false;
  }
  report.note = report.rate_consistent
                    ? "mean error consistent with m^(-1/2) scaling"
                    : "mean error deviates from m^(-1/2) scaling";
  return report;
}

namespace {

OracleCheck check_expected_second_moment(std::uint64_t seed) {
  OracleCheck check;
  check.name = "expected-second-moment";
  const int m = 100000, p = 10, k = 3, repeats = 8;
  RngStream signal_stream = RngStream::from_path(seed, {1});
  SparseSignal signal = generate_signal(p, k, signal_stream);
  std::vector<int> all(p);
  for (int i = 0; i < p; ++i) all[i] = i;
  // Average W over independent instances of the same signal; a single
  // m = 1e5 draw still fluctuates at the tolerance scale.
  Matrix W = Matrix::Zero(p, p);
  for (int r = 0; r < repeats; ++r) {
    RngStream stream = RngStream::from_path(seed, {1, static_cast<std::uint64_t>(r)});
    ProblemInstance instance =
        generate_instance(signal, m, NoiseSpec::none(), stream);
    W += restricted_second_moment(instance, all);
  }
  W /= repeats;
  Vector x = signal.dense();
  const double xsq = x.squaredNorm();
  Matrix expected = xsq * Matrix::Identity(p, p) + 2.0 * x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(W - expected,
                                           Eigen::EigenvaluesOnly);
  check.measured = es.eigenvalues().cwiseAbs().maxCoeff();
  check.bound = 0.05 * xsq;
  check.pass = check.measured <= check.bound;
  check.detail = "spectral deviation of averaged W from ||x||^2 I + 2xx'";
  return check;
}

OracleCheck check_marginal_identity(std::uint64_t seed) {
  OracleCheck check;
  check.name = "marginal-identity";
  const int m = 100000, p = 10, k = 3;
  RngStream stream = RngStream::from_path(seed, {2});
  SparseSignal signal = generate_signal(p, k, stream);
  ProblemInstance instance =
      generate_instance(signal, m, NoiseSpec::none(), stream);
  Vector I = marginal_signals(instance);
  Vector x = signal.dense();
  const double xsq = x.squaredNorm();

  // 3-standard-error band per coordinate, SE from the per-sample variance.
  const DesignMatrix& A = instance.design();
  const Vector& y = instance.measurements();
  double worst = 0.0;
  bool pass = true;
  for (int l = 0; l < p; ++l) {
    const double target = xsq + 2.0 * x[l] * x[l];
    double var = 0.0;
    for (int j = 0; j < m; ++j) {
      const double s = y[j] * A(j, l) * A(j, l) - I[l];
      var += s * s;
    }
    var /= (m - 1);
    const double se = std::sqrt(var / m);
    const double dev = std::abs(I[l] - target) / se;
    worst = std::max(worst, dev);
    if (dev > 3.0) pass = false;
  }
  check.measured = worst;
  check.bound = 3.0;
  check.pass = pass;
  check.detail = "max |I_l - (||x||^2 + 2 x_l^2)| in standard errors";
  return check;
}

OracleCheck check_design_spectral_norm(std::uint64_t seed) {
  OracleCheck check;
  check.name = "design-spectral-norm";
  const int m = 1000, k = 20, draws = 1000;
  const double bound = std::sqrt(static_cast<double>(m)) +
                       std::sqrt(static_cast<double>(k)) + 6.0;
  int within = 0;
  for (int d = 0; d < draws; ++d) {
    RngStream stream = RngStream::from_path(seed, {3, static_cast<std::uint64_t>(d)});
    Matrix A(m, k);
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < k; ++l) A(j, l) = stream.next_normal();
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A,
                                             Eigen::EigenvaluesOnly);
    const double spectral = std::sqrt(es.eigenvalues().maxCoeff());
    if (spectral <= bound) ++within;
  }
  check.measured = static_cast<double>(within) / draws;
  check.bound = 0.99;
  check.pass = check.measured >= check.bound;
  check.detail = "fraction of draws with ||A_S|| <= sqrt(m) + sqrt(k) + 6";
  return check;
}

OracleCheck check_constructor_guards() {
  OracleCheck check;
  check.name = "constructor-guards";
  int rejected = 0;
  const int expected = 4;
  try {
    NoiseSpec{NoiseFamily::gaussian, -1.0}.validate();
  } catch (const std::invalid_argument&) {
    ++rejected;
  }
  try {
    SparseSignal(3, {0}, {0.0});
  } catch (const std::invalid_argument&) {
    ++rejected;
  }
  try {
    SparseSignal(0, {}, {});
  } catch (const std::invalid_argument&) {
    ++rejected;
  }
  try {
    RngStream stream(1);
    SparseSignal signal(2, {0}, {1.0});
    generate_instance(signal, 0, NoiseSpec::none(), stream);
  } catch (const std::invalid_argument&) {
    ++rejected;
  }
  check.measured = rejected;
  check.bound = expected;
  check.pass = rejected == expected;
  check.detail = "sigma < 0, zero signal, p = 0, m = 0 all rejected";
  return check;
}

}  // namespace

OracleReport oracle_checks(std::uint64_t seed) {
  OracleReport report;
  report.checks.push_back(check_expected_second_moment(seed));
  report.checks.push_back(check_marginal_identity(seed));
  report.checks.push_back(check_design_spectral_norm(seed));
  report.checks.push_back(check_constructor_guards());
  report.all_pass = true;
  for (const auto& check : report.checks)
    if (!check.pass) report.all_pass = false;
  return report;
}

std::string figure_axis_name(FigureAxis axis) {
  switch (axis) {
    case FigureAxis::beta: return "beta";
    case FigureAxis::nsr: return "nsr";
    case FigureAxis::m: return "m";
    case FigureAxis::k: return "k";
  }
  throw std::logic_error("figure_axis_name: unknown axis");
}

SweepSpec figure_sweep(FigureAxis axis, PresetKind preset,
                       std::uint64_t master_seed) {
  SweepSpec spec;
  spec.master_seed = master_seed;
  const bool paper = preset == PresetKind::paper;
  spec.fixed.p = paper ? 1000 : 200;
  spec.fixed.m = paper ? 7000 : 2000;
  spec.fixed.k = paper ? 100 : 20;
  spec.axis = figure_axis_name(axis);

  auto linspace = [](double lo, double hi, double step) {
    std::vector<double> grid;
    const int n = static_cast<int>(std::llround((hi - lo) / step)) + 1;
    for (int i = 0; i < n; ++i)
      grid.push_back(std::round((lo + i * step) * 1e9) / 1e9);
    return grid;
  };

  switch (axis) {
    case FigureAxis::beta:
      spec.grid = linspace(0.0, 3.0, 0.25);
      spec.trials = paper ? 10 : 5;
      break;
    case FigureAxis::nsr:
      spec.grid = linspace(0.0, 1.0, 0.1);
      spec.trials = 5;
      break;
    case FigureAxis::m:
      spec.grid = paper ? linspace(2000, 11000, 1000) : linspace(400, 2200, 200);
      spec.trials = 5;
      break;
    case FigureAxis::k:
      spec.grid = paper ? linspace(25, 200, 25) : linspace(5, 40, 5);
      spec.trials = paper ? 10 : 5;
      break;
  }
  return spec;
}

}  // namespace twf
