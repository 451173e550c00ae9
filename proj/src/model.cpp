#include "twf/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twf {

SparseSignal::SparseSignal(int p, std::vector<int> support,
                           std::vector<double> values)
    : p_(p), support_(std::move(support)), values_(std::move(values)) {
  if (p_ <= 0) throw std::invalid_argument("SparseSignal: p must be positive");
  if (support_.empty() || support_.size() != values_.size())
    throw std::invalid_argument("SparseSignal: support/values size mismatch");
  if (!std::is_sorted(support_.begin(), support_.end()))
    throw std::invalid_argument("SparseSignal: support must be sorted");
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i] < 0 || support_[i] >= p_)
      throw std::invalid_argument("SparseSignal: support index out of range");
    if (i > 0 && support_[i] == support_[i - 1])
      throw std::invalid_argument("SparseSignal: duplicate support index");
  }
  double sq = 0.0;
  for (double v : values_) sq += v * v;
  two_norm_ = std::sqrt(sq);
  if (!(two_norm_ > 0.0))
    throw std::invalid_argument("SparseSignal: the zero signal is rejected");
}

Vector SparseSignal::dense() const {
  Vector x = Vector::Zero(p_);
  for (std::size_t i = 0; i < support_.size(); ++i)
    x[support_[i]] = values_[i];
  return x;
}

void NoiseSpec::validate() const {
  if (scale < 0.0 || !std::isfinite(scale))
    throw std::invalid_argument("NoiseSpec: scale must be finite and >= 0");
  if (family == NoiseFamily::none && scale != 0.0)
    throw std::invalid_argument("NoiseSpec: family none forces scale = 0");
}

double NoiseSpec::draw(RngStream& rng) const {
  switch (family) {
    case NoiseFamily::none:
      return 0.0;
    case NoiseFamily::gaussian:
      return scale * rng.next_normal();
    case NoiseFamily::laplace:
      return rng.next_laplace(scale);
    case NoiseFamily::centered_exponential:
      return rng.next_centered_exponential(scale);
  }
  throw std::logic_error("NoiseSpec: unknown family");
}

std::string noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::none: return "none";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::centered_exponential: return "centered_exponential";
  }
  throw std::logic_error("noise_family_name: unknown family");
}

NoiseFamily noise_family_from_name(const std::string& name) {
  if (name == "none") return NoiseFamily::none;
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "laplace") return NoiseFamily::laplace;
  if (name == "centered_exponential") return NoiseFamily::centered_exponential;
  throw std::invalid_argument("unknown noise family: " + name);
}

ProblemInstance::ProblemInstance(DesignMatrix design, SparseSignal signal,
                                 Vector noise, NoiseSpec noise_spec,
                                 SeedRecord seed)
    : design_(std::move(design)),
      signal_(std::move(signal)),
      noise_(std::move(noise)),
      noise_spec_(noise_spec),
      seed_(std::move(seed)) {
  const auto m = design_.rows();
  if (m < 1) throw std::invalid_argument("ProblemInstance: m must be >= 1");
  if (design_.cols() != signal_.p())
    throw std::invalid_argument("ProblemInstance: design/signal dimension mismatch");
  if (noise_.size() != m)
    throw std::invalid_argument("ProblemInstance: noise length mismatch");
  noise_spec_.validate();
  Vector w = design_ * signal_.dense();
  y_ = w.array().square().matrix() + noise_;
}

SparseSignal generate_signal(int p, int k, RngStream& rng) {
  if (k < 1 || k > p)
    throw std::invalid_argument("generate_signal: need 1 <= k <= p");
  std::vector<int> support = rng.sample_subset(p, k);
  std::vector<double> values(k);
  for (;;) {
    bool any_nonzero = false;
    for (int i = 0; i < k; ++i) {
      values[i] = rng.next_normal();
      if (values[i] != 0.0) any_nonzero = true;
    }
    if (any_nonzero) break;  // redraw on the probability-zero all-zeros event
  }
  return SparseSignal(p, std::move(support), std::move(values));
}

ProblemInstance generate_instance(const SparseSignal& signal, int m,
                                  const NoiseSpec& noise, RngStream& rng,
                                  SeedRecord seed) {
  if (m < 1) throw std::invalid_argument("generate_instance: m must be >= 1");
  noise.validate();
  const int p = signal.p();
  DesignMatrix design(m, p);
  // Row-major fill order: entry (j, l) is draw j*p + l of the stream.
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < p; ++l) design(j, l) = rng.next_normal();
  Vector eps(m);
  for (int j = 0; j < m; ++j) eps[j] = noise.draw(rng);
  return ProblemInstance(std::move(design), signal, std::move(eps), noise,
                         std::move(seed));
}

double relative_error(const Vector& estimate, const SparseSignal& truth) {
  if (estimate.size() != truth.p())
    throw std::invalid_argument("relative_error: dimension mismatch");
  if (!(truth.two_norm() > 0.0))
    throw std::invalid_argument("relative_error: zero truth");
  Vector x = truth.dense();
  double d_minus = (estimate - x).norm();
  double d_plus = (estimate + x).norm();
  return std::min(d_minus, d_plus) / truth.two_norm();
}

}  // namespace twf
