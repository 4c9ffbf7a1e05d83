#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace softprior {

// SplitMix64 finalizer. Used for seed derivation only.
std::uint64_t mix64(std::uint64_t x);

// Deterministic child seed: a pure function of (parent, tag) and optionally an index.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index, std::string_view tag);

/// Seedable, splittable random stream.
///
/// Every consumer in a run gets its own stream via split(), so adding or
/// removing draws in one consumer leaves the others untouched.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng split(std::string_view name) const { return Rng(derive_seed(seed_, name)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint32_t uniform_int(std::uint32_t n) {
    // Lemire's multiply-shift on the high 32 bits; bias is below n / 2^32.
    return static_cast<std::uint32_t>(((engine_() >> 32) * n) >> 32);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  double normal() { return std::normal_distribution<double>{}(engine_); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace softprior
