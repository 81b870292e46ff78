#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace fedgen {

// Counter-based generator: every draw is a pure function of (key, counter).
// Streams are split per client / sample / element by key derivation, so the
// same seed yields the same values regardless of scheduling or language.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kSalt)) {}

  Rng derive(std::uint64_t stream) const {
    Rng r;
    r.key_ = mix(key_ ^ mix(stream + kSalt));
    return r;
  }
  Rng derive(std::uint64_t a, std::uint64_t b) const { return derive(a).derive(b); }

  std::uint64_t next_u64() { return value_at(counter_++); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Pure lookup that does not advance the stream; used where the draw index
  // is part of the contract (e.g. per-element Bernoulli drops).
  double double_at(std::uint64_t index) const {
    return static_cast<double>(value_at(index) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  double next_normal() {
    // Box-Muller, no caching so the draw count stays predictable.
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Marsaglia-Tsang; alpha < 1 handled via the boost trick.
  double next_gamma(double alpha) {
    if (alpha < 1.0) {
      double u = next_double();
      if (u < 1e-300) u = 1e-300;
      return next_gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_double();
      if (u < 1e-300) u = 1e-300;
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t kSalt = 0xA24BAED4963EE407ull;

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ull;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t value_at(std::uint64_t counter) const {
    return mix(key_ + 0x9E3779B97F4A7C15ull * (counter + 1));
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng(seed).derive(stream).next_u64();
}

}  // namespace fedgen
