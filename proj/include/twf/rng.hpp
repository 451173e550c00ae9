#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace twf {

/// Counter-based splittable random stream.
///
/// Every output is a pure function of (key, counter), where the key is derived
/// by hashing a (master seed, path...) tuple. Substreams derived from distinct
/// paths are statistically independent, so trials can run in any order, or in
/// parallel, and still produce bit-identical draws.
class RngStream {
public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  /// Derive a stream from a master seed and a path of indices,
  /// e.g. {point_index, trial_index}.
  static RngStream from_path(std::uint64_t master_seed,
                             std::initializer_list<std::uint64_t> path);

  /// Child stream keyed by (this stream's key, index). Does not disturb
  /// this stream's counter.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double();

  /// Standard normal via Box-Muller (one value per pair of uniforms;
  /// no caching, so the draw sequence is a pure function of the counter).
  double next_normal();

  /// Laplace with scale b (density exp(-|x|/b)/(2b)).
  double next_laplace(double b);

  /// Exponential(mean theta) shifted to mean zero.
  double next_centered_exponential(double theta);

  /// Uniform k-subset of {0, ..., n-1}, returned sorted.
  std::vector<int> sample_subset(int n, int k);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace twf
