#pragma once

// Exact integer and rational arithmetic on top of GMP.

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace lowdeg {

using Integer = mpz_class;
using Rational = mpq_class;

/// Parses "p/q", an integer, or a finite decimal such as "0.95" or "-1.5e-2"
/// into an exact rational. Throws InvalidArgument on malformed input or q = 0.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form ("p" when the denominator is 1).
std::string to_string(const Rational& value);
std::string to_string(const Integer& value);

double to_double(const Rational& value);

/// Natural log of |value| without overflow for huge numerators/denominators.
/// Returns -inf for zero.
double log_abs(const Integer& value);
double log_abs(const Rational& value);

Integer factorial(unsigned k);
Integer binomial(unsigned n, unsigned k);
/// (k-1)!! for even k (with (-1)!! = 1), 0 for odd k: the k-th moment of N(0,1).
Integer gaussian_moment(unsigned k);
Rational pow(const Rational& base, unsigned exponent);

/// Rows 0..kmax of Pascal's triangle.
std::vector<std::vector<Integer>> pascal_triangle(unsigned kmax);

}  // namespace lowdeg
