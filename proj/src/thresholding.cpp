#include "twf/thresholding.hpp"

#include <cmath>
#include <stdexcept>

namespace twf {

double apply_threshold(ThresholdKind kind, double x, double tau) {
  const double a = std::abs(x);
  if (a <= tau) return 0.0;
  if (kind == ThresholdKind::hard) return x;
  double t = x > 0.0 ? x - tau : x + tau;
  // Rounding can push the shrinkage a hair past tau; nudge back so
  // |T(x) - x| <= tau holds under exact comparison.
  while (std::abs(t - x) > tau) t = std::nextafter(t, x);
  return t;
}

Vector apply_threshold(ThresholdKind kind, const Vector& v, double tau) {
  if (tau < 0.0 || !std::isfinite(tau))
    throw std::invalid_argument("apply_threshold: tau must be finite and >= 0");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = apply_threshold(kind, v[i], tau);
  return out;
}

std::string threshold_kind_name(ThresholdKind kind) {
  return kind == ThresholdKind::soft ? "soft" : "hard";
}

ThresholdKind threshold_kind_from_name(const std::string& name) {
  if (name == "soft") return ThresholdKind::soft;
  if (name == "hard") return ThresholdKind::hard;
  throw std::invalid_argument("unknown threshold operator: " + name);
}

}  // namespace twf
