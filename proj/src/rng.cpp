#include "lowdeg/rng.hpp"

#include <cmath>
#include <numbers>

#include "lowdeg/parallel.hpp"

namespace lowdeg {
namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  unsigned __int128 product = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(product >> 64);
  lo = static_cast<std::uint64_t>(product);
}

inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Two normals from two raw words; u1 is shifted into (0, 1] so log() is finite.
inline void box_muller(std::uint64_t a, std::uint64_t b, double& z0, double& z1) {
  double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  double u2 = to_unit(b);
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(theta);
  z1 = r * std::sin(theta);
}

}  // namespace

PhiloxCounter philox4x64(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Philox::result_type Philox::operator()() {
  if (used_ == 4) {
    buffer_ = philox4x64(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    used_ = 0;
  }
  return buffer_[used_++];
}

double Philox::uniform() { return to_unit((*this)()); }

double Philox::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  std::uint64_t a = (*this)();
  std::uint64_t b = (*this)();
  double z0, z1;
  box_muller(a, b, z0, z1);
  spare_normal_ = z1;
  has_spare_ = true;
  return z0;
}

void fill_normals(std::span<double> out, std::uint64_t seed, std::uint64_t stream,
                  unsigned workers) {
  // Block c yields entries 4c .. 4c+3.
  const std::size_t blocks = (out.size() + 3) / 4;
  const PhiloxKey key{seed, stream};
  constexpr std::size_t kChunk = 1 << 14;
  const std::size_t chunks = (blocks + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    std::size_t first = chunk * kChunk;
    std::size_t last = std::min(blocks, first + kChunk);
    for (std::size_t c = first; c < last; ++c) {
      PhiloxCounter words = philox4x64({static_cast<std::uint64_t>(c), 0, 0, 0}, key);
      double z[4];
      box_muller(words[0], words[1], z[0], z[1]);
      box_muller(words[2], words[3], z[2], z[3]);
      std::size_t base = 4 * c;
      for (std::size_t j = 0; j < 4 && base + j < out.size(); ++j) out[base + j] = z[j];
    }
  });
}

}  // namespace lowdeg
