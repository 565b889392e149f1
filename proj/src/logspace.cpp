#include "lowdeg/logspace.hpp"

namespace lowdeg {

SignedLog operator+(SignedLog a, SignedLog b) {
  LogSumAccumulator acc;
  acc.add(a);
  acc.add(b);
  return acc.result();
}

void LogSumAccumulator::add(SignedLog term) {
  if (term.sign == 0) return;
  if (term.log_mag > ref_) {
    if (std::isfinite(ref_)) {
      double scale = std::exp(ref_ - term.log_mag);
      sum_ *= scale;
      comp_ *= scale;
    }
    ref_ = term.log_mag;
  }
  double x = term.sign * std::exp(term.log_mag - ref_);
  double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

SignedLog LogSumAccumulator::result() const {
  double total = sum_ + comp_;
  if (total == 0.0 || !std::isfinite(ref_)) return SignedLog::zero();
  return {total > 0 ? 1 : -1, ref_ + std::log(std::fabs(total))};
}

double log_sum_exp(std::span<const double> logs) {
  LogSumAccumulator acc;
  for (double l : logs) acc.add_log(l);
  return acc.result().log_mag;
}

}  // namespace lowdeg
