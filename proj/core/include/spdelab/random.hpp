#pragma once

#include <cstdint>
#include <random>

namespace spdelab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the stream owned by path `index` of an ensemble with master seed
/// `master`. Every ensemble in the library derives per-path streams this way,
/// so results do not depend on how paths are scheduled onto threads.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// Deterministic source of uniform and standard normal variates.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// uniform and normal transforms are implemented here rather than through
/// <random> distributions, whose output is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    // 53 random mantissa bits, shifted off zero by half an ulp
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal, Box-Muller with the second variate cached.
  double normal() noexcept;

  std::uint64_t next_u64() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace spdelab
