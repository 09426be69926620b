#pragma once

// Counter-based random numbers.
//
// Every stream is SplitMix64 evaluated at an explicit counter: the n-th value
// of stream `key` is mix(key + (n + 1) * golden). A value therefore depends
// only on (key, n), never on how many values were drawn before it or on which
// thread draws it, which makes replications reproducible bit for bit.

#include <cstdint>
#include <initializer_list>

namespace welfare {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives a child key from a parent key and a list of integer labels.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::initializer_list<std::uint64_t> labels) noexcept {
  std::uint64_t k = mix64(parent ^ 0xA0761D6478BD642FULL);
  for (auto label : labels) k = mix64(k ^ mix64(label + kGolden));
  return k;
}

/// Maps 64 random bits to a double in [0,1) with 53 bits of resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + (counter + 1) * kGolden);
  }
  /// Uniform in [0,1) at the given counter.
  constexpr double uniform(std::uint64_t counter) const noexcept { return to_unit(bits(counter)); }

 private:
  std::uint64_t key_;
};

// Stream labels, so that environment and policy randomness never share keys.
inline constexpr std::uint64_t kEnvironmentStream = 1;
inline constexpr std::uint64_t kPolicyStream = 2;
inline constexpr std::uint64_t kWageStream = 3;

}  // namespace welfare
