#pragma once

// Auxiliary inequalities (subgaussian moments, Gautschi, local Chernoff,
// Bonami, Paley-Zygmund) and the LDLR lower bounds implied by good tests.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lowdeg/detect.hpp"
#include "lowdeg/model.hpp"
#include "lowdeg/priors.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg {

/// One checked comparison lhs <= rhs.
struct BoundRow {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = true;
};

/// satisfied <=> lhs <= rhs up to a relative tolerance of 1e-12 (on the logs
/// when log_scale is set). margin = rhs - lhs.
struct BoundReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  double lhs = 0.0;
  double rhs = 0.0;
  bool log_scale = false;
  bool satisfied = true;
  double margin = 0.0;
  std::string note;
  std::vector<BoundRow> rows;
};

inline constexpr double kBoundRelTol = 1e-12;

/// lhs <= rhs (1 + 1e-12), or lhs <= rhs + 1e-12 |rhs| for log values.
bool within_bound(double lhs, double rhs);

/// (2 sigma^2)^{k/2} k Gamma(k/2); returned as its natural log.
double subgaussian_moment_bound_log(double sigma_sq, unsigned k);
double subgaussian_moment_bound(double sigma_sq, unsigned k);

/// Exact E|S|^k for S a sum of n Rademacher signs.
Rational rademacher_sum_abs_moment(unsigned n, unsigned k);

/// Compares E|S|^k with the bound at variance proxy n exactly: integer
/// arithmetic for even k, squared comparison against a rational lower bound
/// for pi when k is odd.
bool rademacher_moment_dominated(unsigned n, unsigned k);

/// Runs rademacher_moment_dominated over n = 1..n_max, k = 1..k_max.
BoundReport subgaussian_dominance_check(unsigned n_max, unsigned k_max);

/// lhs = Gamma(x+a)/Gamma(x), rhs = (x+a)^a, both via log-gamma.
BoundReport gamma_ratio_bound(double x, double a);

struct ChernoffOptions {
  double eta = 0.1;
  double delta = 0.2;           // t ranges over [0, delta n]
  unsigned grid_points = 21;    // used when t_grid is empty
  std::vector<double> t_grid;
  std::uint64_t trials = 20000;
  double confidence = 0.999;    // one-sided Clopper-Pearson level per t
};

/// Pr{|<x1, x2>| >= t} against C exp(-(1 - eta) t^2 / 2n), with C the tail
/// frequency at t = 0. A row is violated only when the Clopper-Pearson lower
/// limit of the frequency exceeds the bound; the upper limit is reported as lhs.
BoundReport local_chernoff_check(const PriorSpec& prior, std::uint64_t n,
                                 const ChernoffOptions& options, std::uint64_t seed,
                                 unsigned workers = 1);

enum class BonamiBase { gaussian, rademacher };

/// Multilinear polynomial over at most 64 variables: sum of coefficient times
/// the product of the variables in each bit mask.
struct MultilinearPoly {
  std::vector<std::uint64_t> monomials;
  std::vector<double> coefficients;
  unsigned degree() const;
};

/// Up to 20 distinct monomials of degree <= k (at least one of degree k) over
/// N variables with coefficients +-1.
MultilinearPoly random_multilinear_poly(unsigned k, unsigned N, std::uint64_t seed);

/// Exact E f^2 and E f^4 for i.i.d. N(0,1) or Rademacher inputs.
std::pair<double, double> multilinear_moments(const MultilinearPoly& f, BonamiBase base);

/// Checks E f^4 <= 3^{2k} (E f^2)^2 exactly, and by Monte Carlo with a 5 sigma
/// margin on the fourth-moment estimate.
BoundReport bonami_check(const MultilinearPoly& f, unsigned k, BonamiBase base,
                         std::uint64_t trials, std::uint64_t seed);
BoundReport bonami_check(unsigned k, unsigned N, BonamiBase base, std::uint64_t poly_seed,
                         std::uint64_t trials, std::uint64_t seed);

/// (1 - theta)^2 EZ^2 / EZ2, a lower bound on Pr{Z > theta EZ}.
double paley_zygmund_bound(double EZ, double EZ2, double theta);

struct LdlrLowerBound {
  double bound = 0.0;            // lower bound on ||L^{<=2kd}||
  double delta_admissible = 0.0; // (1/2) 3^{-4kd}
};

/// (1/2)(A/B)^{2k} with delta <= (1/2) 3^{-4kd}.
LdlrLowerBound ldlr_lb_from_poly_test(double A, double B, unsigned k, unsigned d);
/// (A/B)^{2k} / (2L).
LdlrLowerBound ldlr_lb_from_spectral(double A, double B, unsigned k, unsigned d, double L);

struct TestPerformance {
  double A = 0.0;
  double B = 0.0;
  double delta = 0.0;
  unsigned k = 1;
  unsigned d = 1;
};

/// Compares ||L^{<=2kd}|| from the engine with the lower bound implied by
/// a test with the given performance. Unmet hypotheses give a vacuous pass
/// with a note.
BoundReport consistency_crosscheck(const ModelSpec& model, const TestPerformance& perf);

struct BoundsSuiteOptions {
  unsigned dominance_n_max = 100;
  unsigned dominance_k_max = 20;
  unsigned bonami_polynomials = 1000;  // per base measure
  std::uint64_t bonami_trials = 2000;
  std::uint64_t chernoff_n = 200;
  ChernoffOptions chernoff;
  std::uint64_t crosscheck_n = 4;
  double crosscheck_lambda_hat = 5.0;
  std::uint64_t crosscheck_trials = 40000;
};

/// Every check in this module on its default instances: subgaussian
/// dominance, Gautschi ratios, local Chernoff for Rademacher and Gaussian
/// priors, Bonami over random polynomials (one aggregated report per base,
/// one row per polynomial), and the crosscheck against the trace statistic.
std::vector<BoundReport> bounds_suite(const BoundsSuiteOptions& options, std::uint64_t seed,
                                      unsigned workers = 1);

}  // namespace lowdeg
