#pragma once

// Independent exact computations used to cross-check the main code paths on
// small instances.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lowdeg/model.hpp"
#include "lowdeg/priors.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg {

/// Exact law of <x1, x2> by n-fold naive convolution of the entrywise law.
std::map<Rational, Rational> overlap_distribution(const Prior& prior, unsigned n);

/// E<x1, x2>^k for k = 0..kmax from overlap_distribution.
std::vector<Rational> overlap_moments_naive(const Prior& prior, unsigned n, unsigned kmax);

/// S_d = sum over |alpha| = d of E[x^{(x)p} ^ alpha]^2 / prod(alpha_i!), d = 0..D,
/// by enumerating multi-indices over the n^p tensor coordinates. Then
/// ||L^{<=D}||^2 = sum_d lambda^{2d} S_d.
std::vector<Rational> hermite_degree_sums(unsigned p, unsigned n, const PriorSpec& prior,
                                          unsigned D, std::uint64_t cap = 2'000'000);

/// sum_{d <= D} lambda^{2d} S_d with lambda^2 rational.
Rational hermite_norm_sq(const std::vector<Rational>& degree_sums, const Rational& lambda_sq,
                         unsigned D);

/// E exp(lambda^2 S^p) over overlap_distribution, as a double.
double lr_norm_sq_from_distribution(const ModelSpec& model);

/// One-coordinate model (n = 1): X = lambda x^p. Coefficients c_k of
/// L^{<=D}(Y) = sum_k c_k h_k(Y), c_k = lambda^k E[x^{pk}] / k!, needing an
/// exact lambda^2 when odd powers of lambda appear only with zero moments.
struct SingleCoordinateExpansion {
  std::vector<double> hermite_coefficients;  // c_0..c_D
  std::vector<double> monomial_coefficients; // same polynomial in powers of Y
  double evaluate(double y) const;
  /// sum_k c_k^2 k!
  double norm_sq() const;
};

SingleCoordinateExpansion single_coordinate_expansion(const ModelSpec& model, unsigned D);

/// sum over atoms a of P(a) exp(lambda a^p y - lambda^2 a^{2p} / 2), n = 1.
double single_coordinate_lr(const ModelSpec& model, double y);

struct OracleCheck {
  std::string name;
  std::string expected;
  std::string actual;
  bool exact = false;     // compared as rationals
  double rel_error = 0.0; // float comparisons only
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleSuiteOptions {
  unsigned max_n_hermite = 5;  // Hermite-sum comparison at n = 1..max
  unsigned max_D_hermite = 6;
  unsigned max_n_pairs = 10;   // pair enumeration at n = 1..max
};

/// Every oracle against the corresponding library path on the shipped small
/// instances.
std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& options = {});

}  // namespace lowdeg
