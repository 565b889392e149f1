#pragma once

// Small statistics helpers shared by the Monte Carlo checks.

#include <cstdint>
#include <span>

namespace lowdeg {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for `successes` out of `trials` (95% by default).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                         double z = 1.959963984540054);

/// One-sided Clopper-Pearson limits at the given confidence level.
double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double confidence);
double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double confidence);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
};

MeanSe mean_and_se(std::span<const double> values);

}  // namespace lowdeg
