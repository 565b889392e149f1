#pragma once

// Sign-aware log-space numbers and compensated summation.
//
// A SignedLog stores sign(x) and log|x|, so products and quotients of
// astronomically large moments stay finite. Sums go through LogSumAccumulator,
// which keeps a running reference scale and a Neumaier-compensated partial sum
// of the rescaled terms.

#include <cmath>
#include <limits>
#include <span>

namespace lowdeg {

struct SignedLog {
  int sign = 0;  // -1, 0 or +1
  double log_mag = -std::numeric_limits<double>::infinity();

  static SignedLog zero() { return {}; }
  static SignedLog one() { return {1, 0.0}; }
  static SignedLog from_log(double log_mag, int sign = 1) {
    return sign == 0 ? SignedLog{} : SignedLog{sign > 0 ? 1 : -1, log_mag};
  }
  static SignedLog from_double(double x) {
    if (x == 0.0) return {};
    return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
  }

  bool is_zero() const { return sign == 0; }
  double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(log_mag); }

  friend SignedLog operator*(SignedLog a, SignedLog b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.sign * b.sign, a.log_mag + b.log_mag};
  }
  friend SignedLog operator/(SignedLog a, SignedLog b) {
    if (a.sign == 0) return {};
    return {a.sign * b.sign, a.log_mag - b.log_mag};
  }
};

SignedLog operator+(SignedLog a, SignedLog b);

class LogSumAccumulator {
 public:
  void add(SignedLog term);
  void add_log(double log_mag, int sign = 1) { add(SignedLog::from_log(log_mag, sign)); }
  SignedLog result() const;

 private:
  double ref_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(exp(a_1) + ... + exp(a_m)) for nonnegative terms given by their logs.
double log_sum_exp(std::span<const double> logs);

}  // namespace lowdeg
