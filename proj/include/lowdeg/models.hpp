#pragma once

// Null and planted observations for the additive Gaussian noise model, and
// the maps between the asymmetric and symmetric formulations.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowdeg/model.hpp"
#include "lowdeg/rng.hpp"

namespace lowdeg {

struct Provenance {
  bool planted = false;
  std::uint64_t seed = 0;
  std::string generator{kGeneratorId};
  std::optional<std::uint64_t> spike_hash;  // FNV-1a of the spike's bytes
};

/// Dense order-p tensor with n^p entries in row-major order.
struct Observation {
  unsigned p = 2;
  std::uint64_t n = 0;
  std::vector<double> entries;
  Provenance provenance;

  std::size_t size() const { return entries.size(); }
  /// Entry (i, j) of a matrix observation.
  double operator()(std::uint64_t i, std::uint64_t j) const { return entries[i * n + j]; }
};

inline constexpr std::uint64_t kDefaultEntryCap = std::uint64_t{1} << 30;

/// Seed for trial `index` of a batch drawn from `seed` for `purpose`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index);

/// Y = Z with i.i.d. N(0, 1) entries. Throws CapExceeded when n^p > cap.
Observation sample_null(unsigned p, std::uint64_t n, std::uint64_t seed, unsigned workers = 1,
                        std::uint64_t cap = kDefaultEntryCap);

struct PlantedSample {
  Observation Y;
  std::vector<double> spike;
};

/// Y = lambda x^{(x)p} + Z. The noise is the tensor sample_null draws for the
/// same seed, so lambda = 0 reproduces the null sample exactly.
PlantedSample sample_planted(const ModelSpec& model, std::uint64_t seed, unsigned workers = 1,
                             std::uint64_t cap = kDefaultEntryCap);

/// (Y + Y^T) / sqrt(2n); GOE-distributed under the null.
Eigen::MatrixXd symmetrize(const Observation& Y);
/// (Y + Y^T) / 2.
Eigen::MatrixXd symmetric_part(const Observation& Y);

/// Ytilde + (G - G^T)/2 with fresh i.i.d. Gaussian G. For Ytilde the symmetric
/// part of a model observation this has the law of the asymmetric model, and
/// symmetric_part of the result is Ytilde again (to rounding).
Observation asymmetrize(const Eigen::MatrixXd& Ytilde, std::uint64_t seed);

/// Rows a_1..a_k of a regular simplex in R^{k-1}: unit vectors with
/// <a_i, a_j> = -1/(k-1). Cached per k.
const Eigen::MatrixXd& simplex_vectors(unsigned k);

/// Given ytilde ~ x + N(0, 1/k), returns y_i = ytilde + sqrt(1 - 1/k) <a_i, u>
/// with u ~ N(0, I_{k-1}); jointly these are k independent x + N(0, 1) draws.
std::vector<double> resymmetrize_from_average(double ytilde, unsigned k, Philox& rng);

/// Draws ytilde = x + N(0, 1/k) and applies resymmetrize_from_average.
std::vector<double> resymmetrize_tensor_sample(double x, unsigned k, std::uint64_t seed);

/// Binary dump: "LDLRTNSR", u32 p, u32 n, then little-endian doubles.
void write_tensor(const std::filesystem::path& path, const Observation& Y);
Observation read_tensor(const std::filesystem::path& path);
/// The dump as bytes, for hashing or atomic writes.
std::string tensor_bytes(const Observation& Y);

}  // namespace lowdeg
