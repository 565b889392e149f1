#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include "lowdeg/bounds.hpp"
#include "lowdeg/error.hpp"
#include "lowdeg/ldlr.hpp"

using namespace lowdeg;

namespace {

// E|S|^k by summing over the number of +1 signs.
double brute_abs_moment(unsigned n, unsigned k) {
  double total = 0;
  for (unsigned j = 0; j <= n; ++j) {
    const double s = std::fabs(2.0 * j - n);
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0)) *
             std::pow(s, k);
  }
  return total;
}

double eval(const MultilinearPoly& f, const std::vector<double>& x) {
  double v = 0;
  for (std::size_t i = 0; i < f.monomials.size(); ++i) {
    double t = f.coefficients[i];
    for (unsigned b = 0; b < x.size(); ++b)
      if (f.monomials[i] >> b & 1) t *= x[b];
    v += t;
  }
  return v;
}

// E f^2 and E f^4 over all sign patterns.
std::pair<double, double> rademacher_enumeration(const MultilinearPoly& f, unsigned N) {
  double m2 = 0, m4 = 0;
  std::vector<double> x(N);
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    for (unsigned i = 0; i < N; ++i) x[i] = mask >> i & 1 ? 1.0 : -1.0;
    const double v = eval(f, x);
    m2 += v * v;
    m4 += v * v * v * v;
  }
  return {m2 / (1u << N), m4 / (1u << N)};
}

// Product of the 3-point Gauss-Hermite rule; exact for per-variable degree <= 5.
std::pair<double, double> gaussian_quadrature(const MultilinearPoly& f, unsigned N) {
  const double nodes[3] = {-std::sqrt(3.0), 0.0, std::sqrt(3.0)};
  const double weights[3] = {1.0 / 6, 2.0 / 3, 1.0 / 6};
  double m2 = 0, m4 = 0;
  std::vector<double> x(N);
  std::uint64_t total = 1;
  for (unsigned i = 0; i < N; ++i) total *= 3;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    double w = 1;
    std::uint64_t r = idx;
    for (unsigned i = 0; i < N; ++i, r /= 3) {
      x[i] = nodes[r % 3];
      w *= weights[r % 3];
    }
    const double v = eval(f, x);
    m2 += w * v * v;
    m4 += w * v * v * v * v;
  }
  return {m2, m4};
}

}  // namespace

TEST_CASE("subgaussian moment bound values") {
  CHECK(subgaussian_moment_bound(1.0, 2) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(subgaussian_moment_bound(1.0, 4) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(subgaussian_moment_bound(3.0, 3) == doctest::Approx(std::pow(6.0, 1.5) * 3 * std::sqrt(std::numbers::pi) / 2).epsilon(1e-13));
  CHECK(subgaussian_moment_bound_log(50.0, 200) ==
        doctest::Approx(100 * std::log(100.0) + std::log(200.0) + std::lgamma(100.0)).epsilon(1e-13));
  CHECK_THROWS_AS(subgaussian_moment_bound(0.0, 2), InvalidArgument);
  CHECK_THROWS_AS(subgaussian_moment_bound(1.0, 0), InvalidArgument);
}

TEST_CASE("exact Rademacher absolute moments match direct summation") {
  for (unsigned n = 1; n <= 30; ++n)
    for (unsigned k = 1; k <= 12; ++k) {
      CAPTURE(n);
      CAPTURE(k);
      CHECK(to_double(rademacher_sum_abs_moment(n, k)) == doctest::Approx(brute_abs_moment(n, k)).epsilon(1e-12));
    }
  CHECK(rademacher_sum_abs_moment(1, 2) == 1);
  CHECK(rademacher_sum_abs_moment(2, 1) == 1);  // |S| in {0, 2}
  CHECK(rademacher_sum_abs_moment(3, 1) == Rational(3, 2));
}

TEST_CASE("subgaussian dominance over the full grid") {
  const BoundReport r = subgaussian_dominance_check(100, 20);
  CHECK(r.satisfied);
  CHECK(r.lhs <= 1.0);
  CHECK(rademacher_moment_dominated(1, 2));
  for (unsigned n : {1u, 5u, 37u})
    for (unsigned k = 1; k <= 20; ++k)
      CHECK(brute_abs_moment(n, k) <= subgaussian_moment_bound(n, k) * (1 + 1e-12));
}

TEST_CASE("Gautschi inequality") {
  const BoundReport a = gamma_ratio_bound(1.0, 1.0);
  CHECK(a.lhs == doctest::Approx(1.0));
  CHECK(a.rhs == doctest::Approx(2.0));
  CHECK(a.satisfied);
  const BoundReport b = gamma_ratio_bound(2.0, 0.5);
  CHECK(b.lhs == doctest::Approx(1.329340388).epsilon(1e-8));
  CHECK(b.rhs == doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));
  const BoundReport c = gamma_ratio_bound(3.0, 1e-12);
  CHECK(c.lhs == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(c.satisfied);
  for (double x : {0.1, 0.5, 3.0, 40.0})
    for (double s : {0.1, 0.5, 0.9, 1.0}) CHECK(gamma_ratio_bound(x, s).satisfied);
  CHECK_THROWS_AS(gamma_ratio_bound(0.0, 1.0), InvalidArgument);
}

TEST_CASE("local Chernoff bound holds for subgaussian priors") {
  ChernoffOptions opt;
  opt.trials = 4000;
  const BoundReport r = local_chernoff_check(PriorSpec::rademacher(), 400, opt, 1, 4);
  CHECK(r.satisfied);
  CHECK(r.rows.size() == 21);
  CHECK(r.rows.front().lhs <= 1.0);
  const BoundReport g = local_chernoff_check(PriorSpec::gaussian_iid(), 200, opt, 2, 4);
  CHECK(g.satisfied);
  CHECK(local_chernoff_check(PriorSpec::rademacher(), 100, opt, 5, 1).lhs ==
        local_chernoff_check(PriorSpec::rademacher(), 100, opt, 5, 6).lhs);
  opt.t_grid = {0.0, 100.0};
  CHECK_THROWS_AS(local_chernoff_check(PriorSpec::rademacher(), 100, opt, 1), InvalidArgument);
}

TEST_CASE("Bonami worked instances") {
  MultilinearPoly x1{{0b1}, {1.0}};
  auto [g2, g4] = multilinear_moments(x1, BonamiBase::gaussian);
  CHECK(g2 == 1.0);
  CHECK(g4 == 3.0);
  CHECK(bonami_check(x1, 1, BonamiBase::gaussian, 0, 0).rhs == 9.0);

  MultilinearPoly x1x2{{0b11}, {1.0}};
  auto [r2, r4] = multilinear_moments(x1x2, BonamiBase::rademacher);
  CHECK(r4 == 1.0);
  CHECK(bonami_check(x1x2, 2, BonamiBase::rademacher, 0, 0).rhs == 81.0);

  MultilinearPoly one{{0}, {2.0}};
  const BoundReport c = bonami_check(one, 3, BonamiBase::gaussian, 100, 1);
  CHECK(c.lhs == 16.0);
  CHECK(c.rhs == 16.0 * 729);
  CHECK(c.satisfied);

  CHECK_THROWS_AS(bonami_check(x1x2, 1, BonamiBase::gaussian, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(bonami_check(5, 10, BonamiBase::gaussian, 1, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(bonami_check(2, 51, BonamiBase::gaussian, 1, 10, 1), InvalidArgument);
}

TEST_CASE("exact multilinear moments match enumeration and quadrature") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const unsigned k = 1 + s % 4, N = std::max(k, 4u + unsigned(s % 6));
    const MultilinearPoly f = random_multilinear_poly(k, N, s);
    CHECK(f.degree() == k);
    CHECK(f.monomials.size() <= 20);
    for (double c : f.coefficients) CHECK(std::fabs(c) == 1.0);
    const auto [e2, e4] = rademacher_enumeration(f, N);
    const auto [a2, a4] = multilinear_moments(f, BonamiBase::rademacher);
    CHECK(a2 == doctest::Approx(e2).epsilon(1e-12));
    CHECK(a4 == doctest::Approx(e4).epsilon(1e-12));
    if (N <= 8) {
      const auto [q2, q4] = gaussian_quadrature(f, N);
      const auto [b2, b4] = multilinear_moments(f, BonamiBase::gaussian);
      CHECK(b2 == doctest::Approx(q2).epsilon(1e-10));
      CHECK(b4 == doctest::Approx(q4).epsilon(1e-10));
    }
  }
}

TEST_CASE("Bonami holds over random polynomials") {
  for (std::uint64_t s = 0; s < 100; ++s)
    for (BonamiBase base : {BonamiBase::gaussian, BonamiBase::rademacher}) {
      const unsigned k = 1 + s % 4;
      CHECK(bonami_check(k, std::max(k, 4u + unsigned(7 * s % 47)), base, s, 500, s + 1).satisfied);
    }
}

TEST_CASE("Paley-Zygmund") {
  CHECK(paley_zygmund_bound(1, 2, 0) == 0.5);
  CHECK(paley_zygmund_bound(1, 2, 1) == 0.0);
  CHECK(paley_zygmund_bound(1, 1, 0) == 1.0);
  double last = 2;
  for (double t = 0; t <= 1; t += 0.1) {
    const double v = paley_zygmund_bound(1, 3, t);
    CHECK(v <= last);
    last = v;
  }
  CHECK_THROWS_AS(paley_zygmund_bound(2, 3, 0.5), InvalidArgument);
  CHECK_THROWS_AS(paley_zygmund_bound(1, 2, 1.5), InvalidArgument);
}

TEST_CASE("lower bounds from tests") {
  const LdlrLowerBound a = ldlr_lb_from_poly_test(2, 1, 3, 1);
  CHECK(a.bound == 32.0);
  CHECK(a.delta_admissible == doctest::Approx(0.5 * std::pow(3.0, -12)));
  CHECK(ldlr_lb_from_poly_test(2, 1, 1, 1).delta_admissible == doctest::Approx(1.0 / 162));
  CHECK(ldlr_lb_from_spectral(2, 1, 3, 1, 4).bound == 8.0);
  CHECK(ldlr_lb_from_spectral(3, 2, 2, 1, 1).bound == ldlr_lb_from_poly_test(3, 2, 2, 1).bound);
  CHECK(ldlr_lb_from_poly_test(1.001, 1, 1000, 1).bound == doctest::Approx(0.5 * std::pow(1.001, 2000)));
  // Ratio near 1: below 1 unless k is of order log L.
  CHECK(ldlr_lb_from_spectral(1.1, 1, 2, 1, 1000).bound < 1);
  CHECK(ldlr_lb_from_spectral(1.1, 1, 40, 1, 1000).bound > 1);

  CHECK_THROWS_AS(ldlr_lb_from_poly_test(1, 1, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(ldlr_lb_from_poly_test(1, 2, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(ldlr_lb_from_poly_test(2, 1, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(ldlr_lb_from_spectral(2, 1, 1, 1, 0.5), InvalidArgument);
}

TEST_CASE("lower bounds are monotone") {
  for (unsigned k : {1u, 2u, 5u}) {
    double last = 0;
    for (double A = 1.5; A < 10; A += 0.5) {
      const double v = ldlr_lb_from_poly_test(A, 1.0, k, 1).bound;
      CHECK(v > last);
      last = v;
    }
    last = 1e300;
    for (double B = 0.1; B < 1.4; B += 0.1) {
      const double v = ldlr_lb_from_poly_test(1.5, B, k, 1).bound;
      CHECK(v < last);
      last = v;
    }
    last = 1e300;
    for (double L = 1; L < 100; L *= 2) {
      const double v = ldlr_lb_from_spectral(3, 1, k, 1, L).bound;
      CHECK(v < last);
      last = v;
    }
  }
  CHECK(ldlr_lb_from_poly_test(2, 1, 1, 1).delta_admissible > ldlr_lb_from_poly_test(2, 1, 1, 2).delta_admissible);
}

TEST_CASE("crosscheck: vacuous and joint cases") {
  const ModelSpec zero = ModelSpec::with_lambda_hat(4, 0.0, PriorSpec::rademacher());
  const BoundReport v = consistency_crosscheck(zero, {0.1, 1.0, 0.001, 1, 1});
  CHECK(v.satisfied);
  CHECK(v.note.find("not met") != std::string::npos);

  const ModelSpec m = ModelSpec::with_lambda_hat(4, 5.0, PriorSpec::rademacher());
  const BoundReport bad_delta = consistency_crosscheck(m, {3.0, 1.0, 0.5, 1, 1});
  CHECK(bad_delta.note.find("delta") != std::string::npos);

  // A consistent fabricated test: A/B small enough to be implied.
  const BoundReport ok = consistency_crosscheck(m, {1.5, 1.0, 0.001, 1, 1});
  CHECK(ok.satisfied);
  CHECK(ok.rhs == doctest::Approx(0.5 * ldlr_norm_sq(m, 2).log_norm_sq()));

  // An impossible claim is flagged.
  const BoundReport wrong = consistency_crosscheck(m, {1e6, 1.0, 0.001, 1, 1});
  CHECK_FALSE(wrong.satisfied);
}

TEST_CASE("crosscheck with measured trace-statistic performance") {
  const ModelSpec m = ModelSpec::with_lambda_hat(4, 5.0, PriorSpec::rademacher());
  const double target = 0.65 * ldlr_lb_from_poly_test(2, 1, 1, 1).delta_admissible;
  const PolyPerformance perf =
      measure_poly_performance([](const Observation& Y) { return trace_statistic(Y); }, m, target, 40000, 7, 4);
  CHECK(perf.delta_upper <= 1.0 / 162);
  const BoundReport r = consistency_crosscheck(m, {perf.A, perf.B, perf.delta_upper, 1, 1});
  CHECK(r.note.find("not met") == std::string::npos);
  CHECK(r.satisfied);
}

TEST_CASE("within_bound tolerance") {
  CHECK(within_bound(1.0, 1.0));
  CHECK(within_bound(1.0 + 1e-13, 1.0));
  CHECK_FALSE(within_bound(1.0 + 1e-10, 1.0));
  CHECK(within_bound(-5, -4));
}
