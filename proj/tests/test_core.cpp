#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "lowdeg/error.hpp"
#include "lowdeg/io.hpp"
#include "lowdeg/logspace.hpp"
#include "lowdeg/parallel.hpp"
#include "lowdeg/rational.hpp"
#include "lowdeg/rng.hpp"

using namespace lowdeg;

TEST_CASE("parse_rational accepts fractions, integers and decimals") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-6/8") == Rational(-3, 4));
  CHECK(parse_rational("12") == Rational(12));
  CHECK(parse_rational("0.95") == Rational(19, 20));
  CHECK(parse_rational("-1.5e-2") == Rational(-3, 200));
  CHECK(parse_rational("2.5E1") == Rational(25));
  CHECK(to_string(Rational(9, 10)) == "9/10");
  CHECK(to_string(Rational(4, 2)) == "2");
}

TEST_CASE("parse_rational rejects malformed text") {
  for (const char* bad : {"", "1/0", "abc", "1/2/3", "0.5.1", "1e", "--1"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), InvalidArgument);
  }
}

TEST_CASE("factorial, binomial and Gaussian moments against direct loops") {
  std::uint64_t f = 1;
  for (unsigned k = 0; k <= 20; ++k) {
    if (k > 0) f *= k;
    CHECK(factorial(k) == Integer(std::to_string(f)));
  }
  for (unsigned n = 0; n <= 30; ++n) {
    std::uint64_t c = 1;
    for (unsigned k = 0; k <= n; ++k) {
      CHECK(binomial(n, k) == Integer(std::to_string(c)));
      c = c * (n - k) / (k + 1);
    }
  }
  CHECK(gaussian_moment(0) == 1);
  CHECK(gaussian_moment(1) == 0);
  CHECK(gaussian_moment(4) == 3);
  CHECK(gaussian_moment(8) == 105);
  CHECK(gaussian_moment(7) == 0);
  const auto rows = pascal_triangle(10);
  for (unsigned n = 0; n <= 10; ++n)
    for (unsigned k = 0; k <= n; ++k) CHECK(rows[n][k] == binomial(n, k));
}

TEST_CASE("log_abs of huge rationals") {
  Integer big = factorial(400);
  CHECK(log_abs(big) == doctest::Approx(std::lgamma(401.0)).epsilon(1e-13));
  CHECK(log_abs(Rational(1) / Rational(big)) == doctest::Approx(-std::lgamma(401.0)).epsilon(1e-13));
  CHECK(std::isinf(log_abs(Rational(0))));
  CHECK(to_double(pow(Rational(3, 2), 5)) == doctest::Approx(7.59375));
}

TEST_CASE("log_sum_exp against direct summation") {
  std::vector<double> logs{-1.0, 0.5, 2.0, -30.0};
  double direct = 0.0;
  for (double l : logs) direct += std::exp(l);
  CHECK(log_sum_exp(logs) == doctest::Approx(std::log(direct)).epsilon(1e-15));

  std::vector<double> huge{1000.0, 1000.0};
  CHECK(log_sum_exp(huge) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("LogSumAccumulator handles signs and cancellation") {
  LogSumAccumulator acc;
  acc.add(SignedLog::from_double(1e20));
  acc.add(SignedLog::from_double(3.0));
  acc.add(SignedLog::from_double(-1e20));
  CHECK(acc.result().to_double() == doctest::Approx(3.0).epsilon(1e-6));

  LogSumAccumulator zero;
  zero.add(SignedLog::from_double(2.0));
  zero.add(SignedLog::from_double(-2.0));
  CHECK(zero.result().is_zero());

  const SignedLog a = SignedLog::from_double(-4.0), b = SignedLog::from_double(0.5);
  CHECK((a * b).to_double() == doctest::Approx(-2.0));
  CHECK((a / b).to_double() == doctest::Approx(-8.0));
  CHECK((a + b).to_double() == doctest::Approx(-3.5));
}

TEST_CASE("Philox4x64-10 known answers") {
  // Published known-answer vector for a zero counter and key.
  const PhiloxCounter zero = philox4x64({0, 0, 0, 0}, {0, 0});
  CHECK(zero[0] == 0x16554d9eca36314cULL);
  CHECK(zero[1] == 0xdb20fe9d672d0fdcULL);
  CHECK(zero[2] == 0xd7e772cee186176bULL);
  CHECK(zero[3] == 0x7e68b68aec7ba23bULL);

  // numpy.random.Philox(key=k, counter=c).random_raw(4) draws the block at c + 1.
  struct Case {
    PhiloxKey key;
    std::uint64_t counter;
    PhiloxCounter expect;
  };
  const Case cases[] = {
      {{0, 0}, 1, {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL}},
      {{7, 3}, 1, {0x7b6cc7b1862cc5f2ULL, 0xb960f2ea4b3f8d9fULL, 0x0cdd72e015deb1a6ULL, 0x50edb0d22a6a6fd5ULL}},
      {{123456789, 42}, 6, {0xf1656b9fc34ffbd7ULL, 0x243e52c5d9485f51ULL, 0x08f7a446b2a1da89ULL, 0xe63c3ca322226c79ULL}},
      {{~0ULL, 1}, ~0ULL, {0x82f541be9bd725dcULL, 0x0c989c8ebf59eab8ULL, 0x618e392525122d1eULL, 0x770038a463816c6aULL}},
  };
  for (const auto& c : cases) CHECK(philox4x64({c.counter, 0, 0, 0}, c.key) == c.expect);
}

TEST_CASE("Philox streams are reproducible and distinct") {
  Philox a(5, kStreamNoise), b(5, kStreamNoise), c(5, kStreamSpike);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a(), y = b(), z = c();
    CHECK(x == y);
    differ = differ || x != z;
  }
  CHECK(differ);
}

TEST_CASE("uniform and normal draws have the right moments") {
  Philox rng(11, kStreamAux);
  const int m = 200000;
  double su = 0, sn = 0, sn2 = 0, sn4 = 0;
  for (int i = 0; i < m; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    double g = rng.normal();
    sn += g;
    sn2 += g * g;
    sn4 += g * g * g * g;
  }
  CHECK(su / m == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::fabs(sn / m) < 5.0 / std::sqrt(m));
  CHECK(sn2 / m == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sn4 / m == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("fill_normals does not depend on the worker count") {
  std::vector<double> one(10007), many(10007);
  fill_normals(one, 99, kStreamNoise, 1);
  fill_normals(many, 99, kStreamNoise, 7);
  CHECK(one == many);
}

TEST_CASE("parallel_for writes every slot and rethrows failures") {
  std::vector<int> out(1000, 0);
  parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 2);
  CHECK_THROWS_AS(parallel_for(100, 4, [](std::size_t i) {
                    if (i == 37) throw InvalidArgument("boom");
                  }),
                  InvalidArgument);
}

TEST_CASE("default_workers reads LOWDEG_WORKERS") {
  setenv("LOWDEG_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  unsetenv("LOWDEG_WORKERS");
  CHECK(default_workers() >= 1);
}

TEST_CASE("fnv1a64 reference values and atomic_write") {
  CHECK(fnv1a64(std::string_view("")) == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64(std::string_view("a")) == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64(std::string_view("foobar")) == 0x85944171f73967e8ULL);
  CHECK(hex64(255) == "00000000000000ff");

  const auto path = std::filesystem::temp_directory_path() / "lowdeg_atomic_write_test.txt";
  atomic_write(path, "first");
  atomic_write(path, "second");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text == "second");
  std::filesystem::remove(path);
}
