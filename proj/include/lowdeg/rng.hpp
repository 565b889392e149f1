#pragma once

// Counter-based random numbers (Philox4x64-10).
//
// Every random quantity in the library is addressed by (seed, stream, counter),
// so parallel workers can fill disjoint ranges of a tensor or run disjoint
// trials and still produce the bytes a single worker would.

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace lowdeg {

inline constexpr std::string_view kGeneratorId = "philox4x64-10";

using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

/// One application of the Philox4x64 bijection with ten rounds.
PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

/// splitmix64 finalizer, used to derive stream identifiers.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Stream id for a (purpose, index) pair, e.g. (kStreamNoise, trial).
constexpr std::uint64_t derive_stream(std::uint64_t purpose, std::uint64_t index) {
  return mix64(purpose ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

enum StreamPurpose : std::uint64_t {
  kStreamSpike = 0x5350494B45ULL,
  kStreamNoise = 0x4E4F495345ULL,
  kStreamAux = 0x415558ULL,
  kStreamTrial = 0x545249414CULL,
  kStreamNullTrial = 0x4E554C4CULL,
  kStreamPlantedTrial = 0x504C414E54ULL,
};

/// Sequential view of one Philox stream; a UniformRandomBitGenerator.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream, std::uint64_t first_block = 0)
      : key_{seed, stream}, counter_{first_block, 0, 0, 0} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; consumes one block per two draws.
  double normal();

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter buffer_{};
  unsigned used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Fills out[i] with the i-th standard normal of stream (seed, stream).
/// Entry i depends only on (seed, stream, i), so the result is independent of
/// the worker count.
void fill_normals(std::span<double> out, std::uint64_t seed, std::uint64_t stream,
                  unsigned workers = 1);

}  // namespace lowdeg
