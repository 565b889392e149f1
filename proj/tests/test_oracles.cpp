#include <doctest.h>

#include <cmath>
#include <set>

#include "lowdeg/ldlr.hpp"
#include "lowdeg/oracles.hpp"

using namespace lowdeg;

TEST_CASE("every oracle comparison passes on the default instances") {
  const auto checks = run_oracle_suite();
  REQUIRE(checks.size() > 100);
  std::set<std::string> exact_names;
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.expected);
    CAPTURE(c.actual);
    CHECK(c.passed);
    if (c.exact) exact_names.insert(c.name);
    else CHECK(c.rel_error <= c.tolerance);
  }
  CHECK_FALSE(exact_names.empty());
}

TEST_CASE("naive overlap law of a Rademacher pair") {
  const Prior r = make_prior(PriorSpec::rademacher());
  const auto law = overlap_distribution(r, 3);
  REQUIRE(law.size() == 4);
  CHECK(law.at(Rational(3)) == Rational(1, 8));
  CHECK(law.at(Rational(1)) == Rational(3, 8));
  CHECK(law.at(Rational(-1)) == Rational(3, 8));
  const auto m = overlap_moments_naive(r, 3, 4);
  CHECK(m[2] == 3);
  CHECK(m[4] == 3 * 9 - 2 * 3);
}

TEST_CASE("Hermite degree sums reproduce 5/2") {
  const auto sums = hermite_degree_sums(2, 1, PriorSpec::rademacher(), 2);
  CHECK(hermite_norm_sq(sums, Rational(1), 2) == Rational(5, 2));
}

TEST_CASE("single-coordinate expansion converges to the closed form") {
  const ModelSpec m = ModelSpec::with_lambda(3, 1, Rational(1, 2), PriorSpec::rademacher());
  const auto e = single_coordinate_expansion(m, 30);
  for (double y : {-1.0, 0.0, 0.6})
    CHECK(e.evaluate(y) == doctest::Approx(single_coordinate_lr(m, y)).epsilon(1e-12));
  CHECK(e.norm_sq() == doctest::Approx(std::cosh(0.25)).epsilon(1e-12));
  CHECK(lr_norm_sq_from_distribution(m) == doctest::Approx(std::cosh(0.25)).epsilon(1e-14));
}
