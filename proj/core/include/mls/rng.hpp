#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace mls {

/// splitmix64 step; used to derive independent stream seeds from one master
/// seed so parallel workers never share a generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded generator with the distributions pinned by this project.
/// std::mt19937_64 output is fully specified by the standard; the std::
/// distributions are not, so bounded ints and gaussians are produced here.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Unbiased uniform draw in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t max_v = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t excess = (max_v % n + 1) % n;  // 2^64 mod n
    const std::uint64_t cut = max_v - excess;          // inclusive acceptance bound
    for (;;) {
      const std::uint64_t x = eng_();
      if (excess == 0 || x <= cut) return x % n;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Marsaglia polar gaussian, mean 0, given sigma.
  double gaussian(double sigma) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sigma;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double k = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * k;
    has_spare_ = true;
    return u * k * sigma;
  }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mls
