#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "lowdeg/error.hpp"
#include "lowdeg/io.hpp"
#include "lowdeg/models.hpp"

using namespace lowdeg;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

// Critical value at level 0.001.
double ks_critical(std::size_t n, std::size_t m) { return 1.95 * std::sqrt(double(n + m) / (double(n) * m)); }

struct Moments {
  double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= v.size();
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= v.size() - 1;
  return m;
}

}  // namespace

TEST_CASE("null samples: moments, determinism, cap") {
  const Observation Y = sample_null(3, 40, 12);
  REQUIRE(Y.size() == 64000);
  const Moments m = moments(Y.entries);
  CHECK(std::fabs(m.mean) < 5 / std::sqrt(64000.0));
  CHECK(std::fabs(m.var - 1) < 5 * std::sqrt(2.0 / 64000));
  CHECK(sample_null(3, 40, 12).entries == Y.entries);
  CHECK(sample_null(3, 40, 13).entries != Y.entries);
  CHECK_FALSE(Y.provenance.planted);
  CHECK(Y.provenance.seed == 12);
  CHECK_THROWS_AS(sample_null(4, 1000, 1), CapExceeded);
  CHECK_THROWS_AS(sample_null(2, 100, 1, 1, 1000), CapExceeded);
}

TEST_CASE("sampling does not depend on the worker count") {
  const ModelSpec m = ModelSpec::with_lambda(3, 17, 0.3, PriorSpec::sparse_rademacher(Rational(1, 3)));
  const PlantedSample a = sample_planted(m, 8, 1), b = sample_planted(m, 8, 16);
  CHECK(a.Y.entries == b.Y.entries);
  CHECK(a.spike == b.spike);
  CHECK(a.Y.provenance.spike_hash == b.Y.provenance.spike_hash);
  CHECK(tensor_bytes(a.Y) == tensor_bytes(b.Y));
}

TEST_CASE("lambda = 0 reproduces the null sample") {
  const ModelSpec m = ModelSpec::with_lambda(2, 30, 0.0, PriorSpec::rademacher());
  const PlantedSample s = sample_planted(m, 77);
  CHECK(s.Y.entries == sample_null(2, 30, 77).entries);
  CHECK(s.Y.provenance.planted);
  CHECK(s.spike.size() == 30);
}

TEST_CASE("planted = null + lambda x^{(x)p} entrywise") {
  const ModelSpec m = ModelSpec::with_lambda(3, 6, 0.5, PriorSpec::rademacher());
  const PlantedSample s = sample_planted(m, 3);
  const Observation z = sample_null(3, 6, 3);
  for (std::uint64_t i = 0; i < 6; ++i)
    for (std::uint64_t j = 0; j < 6; ++j)
      for (std::uint64_t k = 0; k < 6; ++k) {
        const std::size_t idx = (i * 6 + j) * 6 + k;
        CHECK(s.Y.entries[idx] == doctest::Approx(z.entries[idx] + 0.5 * s.spike[i] * s.spike[j] * s.spike[k]));
      }
}

TEST_CASE("planted diagonal mean is lambda E[x^p] and E[Y]/lambda is rank one") {
  // Sparse prior: E x^2 = 1, E x^4 = 1/rho.
  const ModelSpec m = ModelSpec::with_lambda(2, 4, 2.0, PriorSpec::sparse_rademacher(Rational(1, 2)));
  const int trials = 20000;
  std::vector<double> sum(16, 0.0), sum2(16, 0.0);
  for (int t = 0; t < trials; ++t) {
    const PlantedSample s = sample_planted(m, trial_seed(5, kStreamPlantedTrial, t));
    for (std::size_t e = 0; e < 16; ++e) {
      sum[e] += s.Y.entries[e];
      sum2[e] += s.Y.entries[e] * s.Y.entries[e];
    }
  }
  for (std::size_t e = 0; e < 16; ++e) {
    const double mean = sum[e] / trials;
    const double se = std::sqrt((sum2[e] / trials - mean * mean) / trials);
    const double expect = e % 5 == 0 ? 2.0 : 0.0;  // E[x_i x_j] = delta_ij
    CHECK(std::fabs(mean - expect) < 5 * se);
  }
}

TEST_CASE("symmetrize: identity and GOE variances") {
  Observation I;
  I.p = 2;
  I.n = 2;
  I.entries = {1, 0, 0, 1};
  const Eigen::MatrixXd S = symmetrize(I);
  CHECK((S - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-15);

  const std::uint64_t n = 10;
  const int trials = 4000;
  std::vector<double> diag, off;
  for (int t = 0; t < trials; ++t) {
    const Eigen::MatrixXd W = symmetrize(sample_null(2, n, trial_seed(1, kStreamNullTrial, t)));
    CHECK((W - W.transpose()).norm() == 0.0);
    diag.push_back(W(0, 0));
    off.push_back(W(0, 1));
  }
  const double vd = moments(diag).var, vo = moments(off).var;
  CHECK(std::fabs(vd - 2.0 / n) < 5 * (2.0 / n) * std::sqrt(2.0 / trials));
  CHECK(std::fabs(vo - 1.0 / n) < 5 * (1.0 / n) * std::sqrt(2.0 / trials));

  Observation t;
  t.p = 3;
  t.n = 2;
  t.entries.assign(8, 0.0);
  CHECK_THROWS_AS(symmetrize(t), InvalidArgument);
}

TEST_CASE("asymmetrize round trip and output law") {
  const Observation Y = sample_null(2, 8, 4);
  const Eigen::MatrixXd Yt = symmetric_part(Y);
  const Observation back = asymmetrize(Yt, 9);
  CHECK((symmetric_part(back) - Yt).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd bad = Yt;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(asymmetrize(bad, 1), InvalidArgument);
  CHECK_THROWS_AS(asymmetrize(Eigen::MatrixXd::Zero(2, 3), 1), InvalidArgument);

  // Under Q: entries have unit variance, skew part variance 1/2, entries uncorrelated.
  const int trials = 6000;
  std::vector<double> e01, e10, skew, diag;
  for (int t = 0; t < trials; ++t) {
    const Observation y = sample_null(2, 3, trial_seed(2, kStreamNullTrial, t));
    const Observation a = asymmetrize(symmetric_part(y), trial_seed(3, kStreamAux, t));
    e01.push_back(a(0, 1));
    e10.push_back(a(1, 0));
    skew.push_back((a(0, 1) - a(1, 0)) / 2);
    diag.push_back(a(2, 2));
  }
  const double band = 5 * std::sqrt(2.0 / trials);
  CHECK(std::fabs(moments(e01).var - 1) < band);
  CHECK(std::fabs(moments(diag).var - 1) < band);
  CHECK(std::fabs(moments(skew).var - 0.5) < 0.5 * band);
  double cov = 0;
  for (int t = 0; t < trials; ++t) cov += e01[t] * e10[t];
  CHECK(std::fabs(cov / trials) < 5 / std::sqrt(double(trials)));
}

TEST_CASE("simplex inner products") {
  for (unsigned k = 2; k <= 12; ++k) {
    const Eigen::MatrixXd& A = simplex_vectors(k);
    REQUIRE(A.rows() == k);
    REQUIRE(A.cols() == k - 1);
    const Eigen::MatrixXd G = A * A.transpose();
    for (unsigned i = 0; i < k; ++i)
      for (unsigned j = 0; j < k; ++j)
        CHECK(std::fabs(G(i, j) - (i == j ? 1.0 : -1.0 / (k - 1))) < 1e-14);
    CHECK(A.colwise().sum().norm() < 1e-13);
  }
  CHECK(simplex_vectors(2)(0, 0) == doctest::Approx(-simplex_vectors(2)(1, 0)));
  CHECK(&simplex_vectors(5) == &simplex_vectors(5));
  CHECK_THROWS_AS(simplex_vectors(1), InvalidArgument);
}

TEST_CASE("resymmetrized samples behave like k independent draws") {
  const unsigned k = 4;
  const double x = 0.7;
  const int trials = 20000;
  std::vector<std::vector<double>> y(k);
  std::vector<double> avg, direct_avg, direct;
  Philox ref(99, kStreamAux);
  for (int t = 0; t < trials; ++t) {
    const auto s = resymmetrize_tensor_sample(x, k, trial_seed(6, kStreamTrial, t));
    REQUIRE(s.size() == k);
    double mean = 0;
    for (unsigned i = 0; i < k; ++i) {
      y[i].push_back(s[i]);
      mean += s[i] / k;
    }
    avg.push_back(mean);
    double m2 = 0;
    for (unsigned i = 0; i < k; ++i) m2 += (x + ref.normal()) / k;
    direct_avg.push_back(m2);
    direct.push_back(x + ref.normal());
  }
  const double band = 5 * std::sqrt(2.0 / trials);
  for (unsigned i = 0; i < k; ++i) {
    const Moments m = moments(y[i]);
    CHECK(std::fabs(m.mean - x) < 5 / std::sqrt(double(trials)));
    CHECK(std::fabs(m.var - 1) < band);
    for (unsigned j = i + 1; j < k; ++j) {
      double cov = 0;
      for (int t = 0; t < trials; ++t) cov += (y[i][t] - x) * (y[j][t] - x);
      CHECK(std::fabs(cov / trials) < 5 / std::sqrt(double(trials)));
    }
  }
  CHECK(ks_statistic(y[0], direct) < ks_critical(trials, trials));
  CHECK(ks_statistic(avg, direct_avg) < ks_critical(trials, trials));
  CHECK_THROWS_AS(resymmetrize_tensor_sample(x, 1, 0), InvalidArgument);
}

TEST_CASE("averaging the outputs returns ytilde") {
  Philox rng(4, kStreamAux);
  for (unsigned k : {2u, 3u, 7u})
    for (double yt : {-1.0, 0.0, 2.5}) {
      const auto y = resymmetrize_from_average(yt, k, rng);
      double mean = 0;
      for (double v : y) mean += v / k;
      CHECK(mean == doctest::Approx(yt).epsilon(1e-13).scale(1));
    }
}

TEST_CASE("tensor dump round trip and header") {
  const ModelSpec m = ModelSpec::with_lambda(3, 5, 0.2, PriorSpec::rademacher());
  const PlantedSample s = sample_planted(m, 21);
  const auto path = std::filesystem::temp_directory_path() / "lowdeg_models_test.bin";
  write_tensor(path, s.Y);
  CHECK(std::filesystem::file_size(path) == 16 + 8 * 125);
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  std::uint32_t p = 0, n = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&p), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  CHECK(std::string(magic, 8) == "LDLRTNSR");
  CHECK(p == 3);
  CHECK(n == 5);
  in.close();
  const Observation back = read_tensor(path);
  CHECK(back.p == 3);
  CHECK(back.n == 5);
  CHECK(back.entries == s.Y.entries);

  atomic_write(path, "LDLRTNSR\x03\x00");
  CHECK_THROWS_AS(read_tensor(path), InvalidArgument);
  atomic_write(path, "NOTATENSOR123456");
  CHECK_THROWS_AS(read_tensor(path), InvalidArgument);
  std::filesystem::remove(path);
}
