#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace bandsim {

// splitmix64 finalizer, used both as a hash and as the stream generator.
// All randomness in the library flows through this so that runs are
// reproducible bit-for-bit across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and a stream tag / counter.
inline std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t stream) {
  return splitmix64(splitmix64(parent) + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

// Stream tags so independent concerns never share a random stream.
namespace rng_tag {
inline constexpr std::uint64_t kArrivals = 0xA1;
inline constexpr std::uint64_t kRewards = 0xB2;
inline constexpr std::uint64_t kLatent = 0xC3;
inline constexpr std::uint64_t kGrouping = 0xD4;
inline constexpr std::uint64_t kCover = 0xE5;
inline constexpr std::uint64_t kLog = 0xF6;
inline constexpr std::uint64_t kPolicy = 0x17;
}  // namespace rng_tag

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::next_below: n must be > 0");
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Index draw proportional to weights; weights must be nonnegative.
  int categorical(std::span<const double> weights, double total) {
    double u = next_double() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Fisher-Yates shuffle of the first n entries.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = next_below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace bandsim
