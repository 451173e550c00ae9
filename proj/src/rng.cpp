#include "twf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twf {

namespace {

// splitmix64 finalizer (Stafford mix13). Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t derive(std::uint64_t key, std::uint64_t index) {
  return mix64((key ^ kGolden) + mix64(index + kGolden));
}

}  // namespace

RngStream RngStream::from_path(std::uint64_t master_seed,
                               std::initializer_list<std::uint64_t> path) {
  std::uint64_t key = mix64(master_seed + kGolden);
  for (std::uint64_t idx : path) key = derive(key, idx);
  return RngStream(key);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(derive(key_, index));
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  // u1 in (0, 1] keeps the log finite.
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::next_laplace(double b) {
  // u in (-1/2, 1/2), symmetric inverse CDF.
  double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53 - 0.5;
  double s = u < 0.0 ? -1.0 : 1.0;
  return -b * s * std::log(1.0 - 2.0 * std::abs(u));
}

double RngStream::next_centered_exponential(double theta) {
  double u = next_double();  // [0, 1) so 1-u in (0, 1]
  return theta * (-std::log(1.0 - u) - 1.0);
}

std::vector<int> RngStream::sample_subset(int n, int k) {
  if (k < 0 || k > n) throw std::invalid_argument("sample_subset: k out of range");
  // Partial Fisher-Yates over index array.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    // Unbiased bounded draw by rejection.
    std::uint64_t range = static_cast<std::uint64_t>(n - i);
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    int j = i + static_cast<int>(r % range);
    std::swap(idx[i], idx[j]);
  }
  std::vector<int> out(idx.begin(), idx.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace twf
