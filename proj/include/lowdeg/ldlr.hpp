#pragma once

// Norms of the low-degree likelihood ratio, the full likelihood ratio and its
// second moment, and threshold scans over (n, D, lambda) grids.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lowdeg/logspace.hpp"
#include "lowdeg/model.hpp"
#include "lowdeg/priors.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg {

/// ||L^{<=D}||^2 = sum_d T_d with T_d = lambda^{2d} / d! * E<x1, x2>^{pd}.
struct LdlrResult {
  unsigned p = 2;
  unsigned D = 0;
  ArithmeticMode mode = ArithmeticMode::log_space;
  std::vector<SignedLog> terms;        // T_0..T_D; skipped degrees hold zero
  std::vector<bool> skipped;           // pd odd for a sign-symmetric prior
  std::vector<double> cumulative_log;  // log ||L^{<=d}||^2, d = 0..D
  std::optional<std::vector<Rational>> exact_terms;
  std::optional<Rational> exact_total;

  double log_norm_sq() const { return cumulative_log.back(); }
  double norm_sq() const;
};

/// Builds the moment table it needs (kmax = pD) with the requested mode.
LdlrResult ldlr_norm_sq(const ModelSpec& model, unsigned D,
                        ModeRequest request = ModeRequest::automatic);
/// Same, with a precomputed table covering moments up to pD.
LdlrResult ldlr_norm_sq(const ModelSpec& model, unsigned D, const MomentTable& table);

/// Successive-term ratios r_d = T_{d'}/T_d over the nonzero terms with d >= 1,
/// where d' is the next degree with a nonzero term.
struct TermRatios {
  std::vector<unsigned> degrees;
  std::vector<double> ratios;
  std::vector<bool> dominated;  // r_d <= 1/2
  bool all_dominated = false;
  /// log(1 + 2 T_first), with T_first the first nonzero term after T_0;
  /// reported only when every ratio is dominated.
  std::optional<double> geometric_bound_log;
};

TermRatios term_ratios(std::span<const SignedLog> terms);
TermRatios term_ratios(const LdlrResult& result);

/// T_d = lambda^{2d} / d! * (2n)^{pd/2} pd Gamma(pd/2), the terms obtained by
/// replacing E|<x1, x2>|^{pd} with its subgaussian bound at variance proxy n.
std::vector<SignedLog> subgaussian_majorant_terms(unsigned p, std::uint64_t n, double lambda,
                                                  unsigned D);

struct ThresholdBounds {
  double A = 0.0;  // 2^{-1/2} p^{-p/4-1/2}
  double B = 0.0;  // sqrt(2) e^{p/2} p^{-p/4}
  double lambda_low = 0.0;
  double lambda_high = 0.0;
};

/// lambda_low = A_p n^{-p/4} D^{(2-p)/4}, lambda_high = B_p n^{-p/4} D^{(2-p)/4}.
ThresholdBounds tensor_threshold_bounds(unsigned p, std::uint64_t n, unsigned D);

/// Terms (lambda_hat^2/2)^d (2d-1)!!/d! obtained by treating the overlap of
/// a spiked Wigner model as N(0, n).
struct GaussianHeuristic {
  std::vector<SignedLog> terms;
  std::vector<double> cumulative_log;

  /// lambda_hat^2 (2d+1) / (2(d+1)).
  static double ratio(double lambda_hat, unsigned d);
};

GaussianHeuristic gaussian_heuristic_norm_sq(double lambda_hat, unsigned D);

/// L(Y) = E_X exp(-||X||^2/2 + <X, Y>) by enumerating the spike support.
double lr_evaluate(const ModelSpec& model, std::span<const double> Y,
                   std::uint64_t cap = kDefaultSupportCap);
double lr_log_evaluate(const ModelSpec& model, std::span<const double> Y,
                       std::uint64_t cap = kDefaultSupportCap);

/// Representable exponent range of a double.
inline constexpr double kMaxLogDouble = 709.782712893384;

struct LrNormResult {
  double value = 0.0;      // +inf when overflowed
  double log_value = 0.0;  // always finite
  bool overflow = false;
  double finite_partial = 0.0;  // largest partial sum that stayed representable
  bool enumerated = true;
  std::uint64_t samples = 0;  // pairs enumerated, or Monte Carlo trials
  std::optional<double> std_error;
};

inline constexpr std::uint64_t kDefaultPairCap = std::uint64_t{1} << 22;

/// ||L||^2 = E exp(<X1, X2>) = E exp(lambda^2 <x1, x2>^p), enumerating pairs of
/// support vectors. Throws CapExceeded when |support|^{2n} > pair_cap.
LrNormResult lr_norm_sq(const ModelSpec& model, std::uint64_t pair_cap = kDefaultPairCap);

/// Monte Carlo estimate over `trials` independent overlaps, with the
/// standard error of the mean.
LrNormResult lr_norm_sq_monte_carlo(const ModelSpec& model, std::uint64_t trials,
                                    std::uint64_t seed, unsigned workers = 1);

/// D as a function of n.
class DegreeSchedule {
 public:
  enum class Kind { constant, log, log_power, power };

  static DegreeSchedule constant(unsigned c);
  static DegreeSchedule log();
  /// ceil((log n)^{1+eps}), eps > 0.
  static DegreeSchedule log_power(double eps);
  /// ceil(n^delta), 0 < delta < 1.
  static DegreeSchedule power(double delta);
  /// "const:<c>", "log", "logpow:<eps>" or "pow:<delta>".
  static DegreeSchedule parse(std::string_view text);

  unsigned operator()(std::uint64_t n) const;
  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double param_ = 0.0;
};

enum class Classification { bounded, diverging, inconclusive };
std::string_view to_string(Classification c);

struct ClassifierRule {
  double diverging_log_floor = 4.605170185988092;  // log 100
  double bounded_log_ceiling = 2.302585092994046;  // log 10
  double bounded_slope = 0.05;
};

struct ScanConfig {
  unsigned p = 2;
  PriorSpec prior;
  std::vector<std::uint64_t> n_grid;
  DegreeSchedule schedule = DegreeSchedule::log();
  std::vector<Rational> signals;
  bool signals_are_lambda_hat = true;  // p = 2 only
  ModeRequest mode = ModeRequest::automatic;
  ClassifierRule rule;
  unsigned workers = 1;
};

struct ScanPoint {
  std::uint64_t n = 0;
  unsigned D = 0;
  std::size_t signal_index = 0;
  double lambda = 0.0;
  std::optional<double> lambda_hat;
  double log_norm_sq = 0.0;
  ArithmeticMode mode = ArithmeticMode::log_space;
  std::string error;  // empty on success
};

struct SignalSummary {
  Rational signal;
  Classification classification = Classification::inconclusive;
  double slope = 0.0;  // least-squares slope of log-norm against log n, top half
  double sup_log_norm_sq = 0.0;
};

struct ScanResult {
  std::vector<ScanPoint> points;  // n-major, then D, then signal
  std::vector<SignalSummary> signals;
  std::size_t failures = 0;
};

/// Applies the classifier to one signal's series, ordered by increasing n.
/// Failed points are left out of the series.
SignalSummary classify_series(std::span<const std::uint64_t> n,
                              std::span<const double> log_norm_sq, const ClassifierRule& rule);

ScanResult scan(const ScanConfig& config);

/// CSV with header p,n,D,lambda,lambda_hat,log_norm_sq,mode,classification.
std::string scan_to_csv(const ScanConfig& config, const ScanResult& result);

}  // namespace lowdeg
