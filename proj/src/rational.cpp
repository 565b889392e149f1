#include "lowdeg/rational.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "lowdeg/error.hpp"

namespace lowdeg {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

Integer parse_integer(std::string_view text, std::string_view whole) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  if (!all_digits(body))
    throw InvalidArgument("malformed rational \"" + std::string(whole) + "\"");
  Integer value(std::string(body), 10);
  return negative ? Integer(-value) : value;
}

Rational parse_decimal(std::string_view text) {
  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    Integer exp = parse_integer(text.substr(e + 1), text);
    if (!exp.fits_slong_p() || std::abs(exp.get_si()) > 4096)
      throw InvalidArgument("exponent out of range in \"" + std::string(text) + "\"");
    exponent = exp.get_si();
  }
  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  auto dot = mantissa.find('.');
  std::string_view int_part = mantissa.substr(0, dot);
  std::string_view frac_part =
      dot == std::string_view::npos ? std::string_view{} : mantissa.substr(dot + 1);
  if ((int_part.empty() && frac_part.empty()) ||
      (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part)))
    throw InvalidArgument("malformed rational \"" + std::string(text) + "\"");
  digits.append(int_part);
  digits.append(frac_part);
  exponent -= static_cast<long>(frac_part.size());

  Rational value{Integer(digits, 10)};
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(exponent)));
  if (exponent >= 0)
    value *= ten_pow;
  else
    value /= ten_pow;
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty()) throw InvalidArgument("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(text.substr(0, slash), text);
    Integer den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw InvalidArgument("zero denominator in \"" + std::string(text) + "\"");
    Rational value(num, den);
    value.canonicalize();
    return value;
  }
  return parse_decimal(text);
}

std::string to_string(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  if (v.get_den() == 1) return v.get_num().get_str();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

std::string to_string(const Integer& value) { return value.get_str(); }

double to_double(const Rational& value) { return mpq_get_d(value.get_mpq_t()); }

double log_abs(const Integer& value) {
  if (value == 0) return -std::numeric_limits<double>::infinity();
  long exp2 = 0;
  double mant = mpz_get_d_2exp(&exp2, value.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::log(2.0);
}

double log_abs(const Rational& value) {
  if (value == 0) return -std::numeric_limits<double>::infinity();
  return log_abs(value.get_num()) - log_abs(value.get_den());
}

Integer factorial(unsigned k) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), k);
  return out;
}

Integer binomial(unsigned n, unsigned k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

Integer gaussian_moment(unsigned k) {
  if (k % 2 == 1) return 0;
  if (k == 0) return 1;
  Integer out;
  mpz_2fac_ui(out.get_mpz_t(), k - 1);
  return out;
}

Rational pow(const Rational& base, unsigned exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  out.canonicalize();
  return out;
}

std::vector<std::vector<Integer>> pascal_triangle(unsigned kmax) {
  std::vector<std::vector<Integer>> rows(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) {
    rows[k].resize(k + 1);
    rows[k][0] = rows[k][k] = 1;
    for (unsigned j = 1; j < k; ++j) rows[k][j] = rows[k - 1][j - 1] + rows[k - 1][j];
  }
  return rows;
}

}  // namespace lowdeg
