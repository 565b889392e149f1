#include "lowdeg/models.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "lowdeg/error.hpp"
#include "lowdeg/io.hpp"

namespace lowdeg {
namespace {

constexpr char kMagic[8] = {'L', 'D', 'L', 'R', 'T', 'N', 'S', 'R'};

std::uint64_t checked_entries(unsigned p, std::uint64_t n, std::uint64_t cap) {
  if (p < 1 || n < 1) throw InvalidArgument("observation: need p >= 1 and n >= 1");
  std::uint64_t total = 1;
  for (unsigned r = 0; r < p; ++r) {
    if (total > cap / n)
      throw CapExceeded("observation: n^p = " + std::to_string(n) + "^" + std::to_string(p) +
                        " entries exceed the cap of " + std::to_string(cap));
    total *= n;
  }
  return total;
}

void require_matrix(const Observation& Y, const char* what) {
  if (Y.p != 2) throw InvalidArgument(std::string(what) + ": needs a p = 2 observation");
}

template <class T>
void put_le(std::string& out, T value) {
  for (unsigned b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((value >> (8 * b)) & 0xff));
}

template <class T>
T get_le(const char* in) {
  T value = 0;
  for (unsigned b = 0; b < sizeof(T); ++b)
    value |= static_cast<T>(static_cast<unsigned char>(in[b])) << (8 * b);
  return value;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  return mix64(seed ^ derive_stream(purpose, index));
}

Observation sample_null(unsigned p, std::uint64_t n, std::uint64_t seed, unsigned workers,
                        std::uint64_t cap) {
  Observation Y;
  Y.p = p;
  Y.n = n;
  Y.entries.resize(checked_entries(p, n, cap));
  fill_normals(Y.entries, seed, kStreamNoise, workers);
  Y.provenance.seed = seed;
  return Y;
}

PlantedSample sample_planted(const ModelSpec& model, std::uint64_t seed, unsigned workers,
                             std::uint64_t cap) {
  PlantedSample s;
  s.Y = sample_null(model.p(), model.n(), seed, workers, cap);
  s.spike = sample_spike(model.prior(), model.n(), seed);
  s.Y.provenance.planted = true;
  s.Y.provenance.spike_hash = fnv1a64(std::span<const double>(s.spike));

  const unsigned p = model.p();
  const std::uint64_t n = model.n();
  const double lambda = model.lambda();
  // Odometer over the p tensor indices with running prefix products.
  std::vector<std::uint64_t> idx(p, 0);
  std::vector<double> prefix(p + 1, 1.0);
  for (unsigned r = 0; r < p; ++r) prefix[r + 1] = prefix[r] * s.spike[0];
  for (double& y : s.Y.entries) {
    y += lambda * prefix[p];
    unsigned r = p;
    while (r > 0) {
      --r;
      if (++idx[r] < n) break;
      idx[r] = 0;
    }
    for (unsigned q = r; q < p; ++q) prefix[q + 1] = prefix[q] * s.spike[idx[q]];
  }
  return s;
}

Eigen::MatrixXd symmetric_part(const Observation& Y) {
  require_matrix(Y, "symmetric_part");
  const auto n = static_cast<Eigen::Index>(Y.n);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
      Y.entries.data(), n, n);
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd symmetrize(const Observation& Y) {
  require_matrix(Y, "symmetrize");
  const auto n = static_cast<Eigen::Index>(Y.n);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
      Y.entries.data(), n, n);
  return (M + M.transpose()) / std::sqrt(2.0 * static_cast<double>(Y.n));
}

Observation asymmetrize(const Eigen::MatrixXd& Yt, std::uint64_t seed) {
  if (Yt.rows() != Yt.cols()) throw InvalidArgument("asymmetrize: matrix is not square");
  const double scale = std::max(1.0, Yt.cwiseAbs().maxCoeff());
  if ((Yt - Yt.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("asymmetrize: input matrix is not symmetric");
  const std::uint64_t n = static_cast<std::uint64_t>(Yt.rows());
  std::vector<double> G(n * n);
  fill_normals(G, seed, kStreamAux);
  Observation out;
  out.p = 2;
  out.n = n;
  out.entries.resize(n * n);
  out.provenance.seed = seed;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      out.entries[i * n + j] = Yt(i, j) + 0.5 * (G[i * n + j] - G[j * n + i]);
  return out;
}

const Eigen::MatrixXd& simplex_vectors(unsigned k) {
  if (k < 2) throw InvalidArgument("simplex_vectors: need k >= 2");
  static std::mutex mutex;
  static std::map<unsigned, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[k];
  if (!slot) {
    const double kk = k;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Constant(k, k, -1.0 / (kk - 1.0));
    gram.diagonal().setOnes();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    // Eigenvalues ascending: one zero (the all-ones direction), then k-1 copies of k/(k-1).
    Eigen::MatrixXd A(k, k - 1);
    for (unsigned c = 1; c < k; ++c)
      A.col(c - 1) = es.eigenvectors().col(c) * std::sqrt(std::max(0.0, es.eigenvalues()[c]));
    slot = std::make_unique<Eigen::MatrixXd>(std::move(A));
  }
  return *slot;
}

std::vector<double> resymmetrize_from_average(double ytilde, unsigned k, Philox& rng) {
  const Eigen::MatrixXd& A = simplex_vectors(k);
  Eigen::VectorXd u(k - 1);
  for (unsigned i = 0; i + 1 < k; ++i) u[i] = rng.normal();
  const double scale = std::sqrt(1.0 - 1.0 / k);
  Eigen::VectorXd proj = A * u;
  std::vector<double> y(k);
  for (unsigned i = 0; i < k; ++i) y[i] = ytilde + scale * proj[i];
  return y;
}

std::vector<double> resymmetrize_tensor_sample(double x, unsigned k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("resymmetrize_tensor_sample: need k >= 2");
  Philox rng(seed, kStreamAux);
  double ytilde = x + rng.normal() / std::sqrt(static_cast<double>(k));
  return resymmetrize_from_average(ytilde, k, rng);
}

std::string tensor_bytes(const Observation& Y) {
  std::string out(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(out, Y.p);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(Y.n));
  out.reserve(out.size() + 8 * Y.entries.size());
  for (double v : Y.entries) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

void write_tensor(const std::filesystem::path& path, const Observation& Y) {
  atomic_write(path, tensor_bytes(Y));
}

Observation read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 16 || std::memcmp(data.data(), kMagic, 8) != 0)
    throw InvalidArgument(path.string() + ": not a tensor dump");
  Observation Y;
  Y.p = get_le<std::uint32_t>(data.data() + 8);
  Y.n = get_le<std::uint32_t>(data.data() + 12);
  const std::uint64_t count = checked_entries(Y.p, Y.n, kDefaultEntryCap);
  if (data.size() != 16 + 8 * count)
    throw InvalidArgument(path.string() + ": truncated tensor dump");
  Y.entries.resize(count);
  for (std::uint64_t i = 0; i < count; ++i)
    Y.entries[i] = std::bit_cast<double>(get_le<std::uint64_t>(data.data() + 16 + 8 * i));
  return Y;
}

}  // namespace lowdeg
