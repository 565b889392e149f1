#include "lowdeg/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "lowdeg/error.hpp"

namespace lowdeg {

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double x = static_cast<double>(successes);
  const double z2 = z * z;
  const double center = (x + z2 / 2.0) / (n + z2);
  const double half = z / (n + z2) * std::sqrt(x * (n - x) / n + z2 / 4.0);
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == trials ? 1.0 : std::min(1.0, center + half)};
}

double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (successes > trials) throw InvalidArgument("clopper_pearson: successes > trials");
  if (successes == trials) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(successes + 1),
                                static_cast<double>(trials - successes), confidence);
}

double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (successes > trials) throw InvalidArgument("clopper_pearson: successes > trials");
  if (successes == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(successes),
                                static_cast<double>(trials - successes + 1), 1.0 - confidence);
}

MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  return out;
}

}  // namespace lowdeg
