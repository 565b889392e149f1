#pragma once

// Executable tests between the planted and null models and their error rates.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lowdeg/error.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/model.hpp"
#include "lowdeg/models.hpp"
#include "lowdeg/stats.hpp"

namespace lowdeg {

struct EigPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;  // ||M v - value v||
  unsigned iterations = 0;
};

/// Raised when the eigensolver stops at maxiter; carries the best iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, EigPair best) : Error(what), best_(std::move(best)) {}
  const EigPair& best() const { return best_; }

 private:
  EigPair best_;
};

/// Largest eigenpair of a symmetric matrix by Lanczos with full
/// reorthogonalization. maxiter = 0 means 10 n.
EigPair top_eigpair(const Eigen::MatrixXd& M, double tol = 1e-8, unsigned maxiter = 0,
                    std::uint64_t start_seed = 0);

/// t(lambda_hat) = 2 + (lambda_hat + 1/lambda_hat - 2) / 2.
double pca_threshold(double lambda_hat);

struct PcaVerdict {
  bool planted = false;
  double lambda_max = 0.0;
  double threshold = 0.0;
};

/// Verdict p iff lambda_max((Y + Y^T)/sqrt(2n)) > t(lambda_hat).
PcaVerdict pca_test(const Observation& Y, double lambda_hat);

struct BbpEstimate {
  std::uint64_t trials = 0;
  double mean_lambda_max = 0.0;
  double se_lambda_max = 0.0;
  double mean_overlap_sq = 0.0;  // <v_max, x/sqrt(n)>^2
  double se_overlap_sq = 0.0;
  std::vector<std::uint64_t> seeds;
};

BbpEstimate bbp_estimate(double lambda_hat, std::uint64_t n, std::uint64_t trials,
                         const PriorSpec& prior, std::uint64_t seed, unsigned workers = 1);

/// Verdict p iff L^{<=D}(Y) > eta.
bool poly_threshold_test(const LowDegreeLikelihood& L, const Observation& Y, double eta);
bool poly_threshold_test(const ModelSpec& model, unsigned D, const Observation& Y, double eta);

/// Verdict p iff L(Y) > eta, compared in log space so eta = 0 always rejects
/// the null and eta = +inf never does.
bool lr_test(const ModelSpec& model, const Observation& Y, double eta);

/// A real-valued statistic of an observation.
using Statistic = std::function<double(const Observation&)>;

/// Empirical (1 - alpha) quantile of `statistic` over `trials` fresh null
/// samples: the smallest sample value exceeded by at most floor(alpha trials)
/// of the samples.
double calibrate_threshold(const Statistic& statistic, unsigned p, std::uint64_t n, double alpha,
                           std::uint64_t trials, std::uint64_t seed, unsigned workers = 1);

/// A test: returns true for verdict p (planted).
struct HypothesisTest {
  std::string id;
  std::function<bool(const Observation&)> decide;
};

struct TestReport {
  std::string test_id;
  std::uint64_t trials = 0;  // per hypothesis
  double alpha_hat = 0.0;    // null trials with verdict p
  double beta_hat = 0.0;     // planted trials with verdict q
  Interval alpha_ci;
  Interval beta_ci;
  double alpha_half_width = 0.0;
  double beta_half_width = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> null_seeds;
  std::vector<std::uint64_t> planted_seeds;
};

/// Runs `trials` null and `trials` planted observations through the test.
TestReport error_rates(const HypothesisTest& test, const ModelSpec& model, std::uint64_t trials,
                       std::uint64_t seed, unsigned workers = 1);

/// Diagonal sum sum_i Y_{i...i}, a degree-1 statistic.
double trace_statistic(const Observation& Y);

/// Measured hypotheses of a thresholded polynomial: E_P f >= A and
/// Q(|f| >= B) <= delta.
struct PolyPerformance {
  double A = 0.0;
  double A_se = 0.0;
  double B = 0.0;
  double delta_hat = 0.0;
  double delta_upper = 0.0;  // one-sided 95% Clopper-Pearson upper limit
  std::uint64_t null_trials = 0;
  std::uint64_t planted_trials = 0;
};

/// A = planted mean of f; B = the smallest level with empirical
/// Q(|f| >= B) <= target_delta.
PolyPerformance measure_poly_performance(const Statistic& f, const ModelSpec& model,
                                         double target_delta, std::uint64_t trials,
                                         std::uint64_t seed, unsigned workers = 1);

}  // namespace lowdeg
