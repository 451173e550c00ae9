#include "twf/flow.hpp"

#include <cmath>
#include <stdexcept>

#include "twf/errors.hpp"

namespace twf {

void TwfConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("TwfConfig: mu must be positive");
  if (beta < 0.0 || !std::isfinite(beta))
    throw std::invalid_argument("TwfConfig: beta must be >= 0");
  if (iterations < 0)
    throw std::invalid_argument("TwfConfig: iterations must be >= 0");
  if (!(phi_sq > 0.0) || !std::isfinite(phi_sq))
    throw std::invalid_argument("TwfConfig: phi_sq must be positive");
}

namespace {

struct ForwardPass {
  Vector w;  // A z
  Vector r;  // w.^2 - y
};

ForwardPass forward(const Vector& z, const ProblemInstance& instance) {
  if (z.size() != instance.p())
    throw std::invalid_argument("dimension mismatch between z and instance");
  ForwardPass fp;
  fp.w = instance.design() * z;
  fp.r = fp.w.array().square().matrix() - instance.measurements();
  return fp;
}

double risk_from(const ForwardPass& fp, int m) {
  return fp.r.squaredNorm() / (4.0 * m);
}

double tau_from(const ForwardPass& fp, int m, int p, double beta) {
  const double s = (fp.r.array().square() * fp.w.array().square()).sum();
  return std::sqrt(beta * std::log(static_cast<double>(p)) /
                   (static_cast<double>(m) * m) * s);
}

Vector gradient_from(const ForwardPass& fp, const ProblemInstance& instance) {
  return instance.design().transpose() *
         (fp.r.array() * fp.w.array()).matrix() / static_cast<double>(instance.m());
}

int support_size(const Vector& z) {
  int n = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] != 0.0) ++n;
  return n;
}

struct StepOutcome {
  Vector next;
  double risk;
  double tau;
};

StepOutcome step_impl(const Vector& z, const ProblemInstance& instance,
                      const TwfConfig& config, int iteration) {
  ForwardPass fp = forward(z, instance);
  const double scale = config.mu / config.phi_sq;
  const double tau = tau_from(fp, instance.m(), instance.p(), config.beta);
  Vector next = apply_threshold(config.operator_kind,
                                z - scale * gradient_from(fp, instance),
                                scale * tau);
  if (!next.allFinite() ||
      next.norm() > 1e6 * std::sqrt(config.phi_sq))
    throw DivergenceError("twf_step: iterates diverged", iteration);
  return {std::move(next), risk_from(fp, instance.m()), tau};
}

}  // namespace

double empirical_risk(const Vector& z, const ProblemInstance& instance) {
  return risk_from(forward(z, instance), instance.m());
}

Vector gradient(const Vector& z, const ProblemInstance& instance) {
  return gradient_from(forward(z, instance), instance);
}

double threshold_level(const Vector& z, const ProblemInstance& instance,
                       double beta) {
  if (beta < 0.0 || !std::isfinite(beta))
    throw std::invalid_argument("threshold_level: beta must be >= 0");
  return tau_from(forward(z, instance), instance.m(), instance.p(), beta);
}

Vector twf_step(const Vector& z, const ProblemInstance& instance,
                const TwfConfig& config) {
  config.validate();
  return step_impl(z, instance, config, 0).next;
}

TwfTrace run(const Vector& init, const ProblemInstance& instance,
             const TwfConfig& config) {
  config.validate();
  if (!init.allFinite())
    throw std::invalid_argument("run: init must be finite");

  TwfTrace trace;
  Vector z = init;
  Vector prev;
  for (int t = 0; t < config.iterations; ++t) {
    StepOutcome out;
    try {
      out = step_impl(z, instance, config, t);
    } catch (const DivergenceError& e) {
      trace.final = z;
      throw TwfDivergenceError(e.what(), e.iteration, std::move(trace));
    }
    if (config.record_trajectory)
      trace.records.push_back({t, out.risk, out.tau,
                               t == 0 ? 0.0 : (z - prev).norm(),
                               support_size(z)});
    prev = std::move(z);
    z = std::move(out.next);
  }
  if (config.record_trajectory) {
    ForwardPass fp = forward(z, instance);
    trace.records.push_back({config.iterations, risk_from(fp, instance.m()),
                             tau_from(fp, instance.m(), instance.p(), config.beta),
                             config.iterations == 0 ? 0.0 : (z - prev).norm(),
                             support_size(z)});
  }
  trace.final = z;
  return trace;
}

}  // namespace twf
