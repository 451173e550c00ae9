#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twf/rng.hpp"
#include "twf/types.hpp"

namespace twf {

/// k-sparse ground truth: explicit support plus the nonzero amplitudes.
class SparseSignal {
public:
  /// support holds 0-based, distinct, sorted indices into [0, p).
  SparseSignal(int p, std::vector<int> support, std::vector<double> values);

  int p() const { return p_; }
  int k() const { return static_cast<int>(support_.size()); }
  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double two_norm() const { return two_norm_; }

  /// Materialize as a dense p-vector (off-support entries exactly zero).
  Vector dense() const;

private:
  int p_;
  std::vector<int> support_;
  std::vector<double> values_;
  double two_norm_;
};

enum class NoiseFamily { none, gaussian, laplace, centered_exponential };

/// Mean-zero sub-exponential noise. `scale` is the family's natural scale:
/// the standard deviation for gaussian, the diversity b for laplace, the
/// exponential mean theta for centered_exponential. The psi_1 norm equals
/// the scale up to a family-dependent constant.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::none;
  double scale = 0.0;

  static NoiseSpec none() { return {NoiseFamily::none, 0.0}; }
  static NoiseSpec gaussian(double sd) { return {NoiseFamily::gaussian, sd}; }

  void validate() const;
  double draw(RngStream& rng) const;
};

std::string noise_family_name(NoiseFamily f);
NoiseFamily noise_family_from_name(const std::string& name);

/// Where an instance's randomness came from: (master seed, derivation path).
struct SeedRecord {
  std::uint64_t master = 0;
  std::vector<std::uint64_t> path;
};

/// One synthetic problem: Gaussian design, measurements y_j = (a_j'x)^2 + eps_j,
/// and the generating metadata.
class ProblemInstance {
public:
  ProblemInstance(DesignMatrix design, SparseSignal signal, Vector noise,
                  NoiseSpec noise_spec, SeedRecord seed);

  int m() const { return static_cast<int>(design_.rows()); }
  int p() const { return static_cast<int>(design_.cols()); }
  const DesignMatrix& design() const { return design_; }
  const SparseSignal& signal() const { return signal_; }
  const Vector& noise() const { return noise_; }
  const Vector& measurements() const { return y_; }
  const NoiseSpec& noise_spec() const { return noise_spec_; }
  const SeedRecord& seed() const { return seed_; }

private:
  DesignMatrix design_;
  SparseSignal signal_;
  Vector noise_;
  Vector y_;
  NoiseSpec noise_spec_;
  SeedRecord seed_;
};

/// Uniform random k-subset support, i.i.d. standard normal amplitudes.
SparseSignal generate_signal(int p, int k, RngStream& rng);

/// Standard Gaussian design rows, noise per spec, measurements assembled
/// from the signal.
ProblemInstance generate_instance(const SparseSignal& signal, int m,
                                  const NoiseSpec& noise, RngStream& rng,
                                  SeedRecord seed = {});

/// min over the two global signs of ||estimate -+ x||_2 / ||x||_2.
double relative_error(const Vector& estimate, const SparseSignal& truth);

}  // namespace twf
