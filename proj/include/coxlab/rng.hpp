#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coxlab {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of substream `stream` for item `index` under the master `seed`.
/// Depends only on its arguments, so per-item streams are identical under
/// any evaluation order or thread count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ stream) + index);
}

enum Stream : std::uint64_t {
  kEnvironmentStream = 1,
  kArrivalStream = 2,
  kServiceStream = 3,
  kSamplerStream = 4,
  kCurvePointStream = 5,
};

/// Thin wrapper over mt19937_64 with platform-independent variate mappings.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coxlab
