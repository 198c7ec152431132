#pragma once
// Counter-based random streams. A stream is identified by a 64-bit key derived
// from (seed, label, index); its i-th output is a SplitMix64 finalizer applied
// to key + i * golden-ratio increment. Draws for event i never depend on how
// many draws other events consumed, so generation order and threading cannot
// change results.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace ndc::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a over the label bytes.
constexpr std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ull;
  }
  return h;
}

constexpr std::uint64_t substream_key(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return mix64(mix64(seed ^ hash_label(label)) + index * kGolden);
}

class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) : key_(key) {}
  constexpr Stream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0)
      : key_(substream_key(seed, label, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Standard normal by Box-Muller; uses two draws per call.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ndc::rng
