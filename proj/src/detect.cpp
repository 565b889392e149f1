#include "lowdeg/detect.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "lowdeg/ldlr.hpp"
#include "lowdeg/parallel.hpp"
#include "lowdeg/rng.hpp"

namespace lowdeg {
namespace {

constexpr unsigned kMaxKrylov = 400;

Eigen::VectorXd random_unit(Eigen::Index n, std::uint64_t seed, std::uint64_t stream) {
  Eigen::VectorXd v(n);
  Philox rng(seed, stream);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v / v.norm();
}

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::fabs(v[i]) > std::fabs(v[arg]) + 1e-12) arg = i;
  if (v[arg] < 0) v = -v;
}

}  // namespace

EigPair top_eigpair(const Eigen::MatrixXd& M, double tol, unsigned maxiter,
                    std::uint64_t start_seed) {
  const Eigen::Index n = M.rows();
  if (n == 0 || M.cols() != n) throw InvalidArgument("top_eigpair: matrix must be square and nonempty");
  if (!M.allFinite()) throw InvalidArgument("top_eigpair: matrix has non-finite entries");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("top_eigpair: matrix is not symmetric");
  if (maxiter == 0) maxiter = static_cast<unsigned>(10 * n);

  if (n == 1) {
    EigPair e;
    e.value = M(0, 0);
    e.vector = Eigen::VectorXd::Ones(1);
    return e;
  }

  const unsigned m_cap = static_cast<unsigned>(std::min<Eigen::Index>(n, kMaxKrylov));
  EigPair best;
  best.residual = std::numeric_limits<double>::infinity();
  Eigen::VectorXd v = random_unit(n, start_seed, kStreamAux);
  unsigned iter = 0;
  unsigned restart = 0;

  while (iter < maxiter) {
    Eigen::MatrixXd Q(n, m_cap);
    Eigen::VectorXd alpha(m_cap), beta(m_cap);
    Q.col(0) = v;
    Eigen::VectorXd w(n), ritz;
    for (unsigned j = 0; j < m_cap; ++j) {
      w.noalias() = M * Q.col(j);
      ++iter;
      if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
      alpha[j] = Q.col(j).dot(w);
      w -= alpha[j] * Q.col(j);
      for (int rep = 0; rep < 2; ++rep) {
        Eigen::VectorXd h = Q.leftCols(j + 1).transpose() * w;
        w.noalias() -= Q.leftCols(j + 1) * h;
      }
      const double b = w.norm();

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      Eigen::VectorXd diag = alpha.head(j + 1);
      Eigen::VectorXd sub = beta.head(j);
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const double theta = tri.eigenvalues()[j];
      const Eigen::VectorXd s = tri.eigenvectors().col(j);
      const double estimate = std::fabs(b * s[j]);
      const bool invariant = b <= 1e-13 * scale;
      const bool last = j + 1 == m_cap || iter >= maxiter;

      if (estimate <= tol || invariant || last) {
        Eigen::VectorXd x = Q.leftCols(j + 1) * s;
        x /= x.norm();
        const double r = (M * x - theta * x).norm();
        if (r < best.residual) {
          best.value = theta;
          best.vector = x;
          best.residual = r;
        }
        best.iterations = iter;
        if (r <= tol) {
          fix_sign(best.vector);
          return best;
        }
        if (invariant || last) {
          // Restart from the Ritz vector, nudged out of any invariant subspace.
          v = x + 1e-3 * random_unit(n, start_seed, derive_stream(kStreamAux, ++restart));
          v /= v.norm();
          break;
        }
      }
      beta[j] = b;
      if (j + 1 < m_cap) Q.col(j + 1) = w / b;
    }
  }
  fix_sign(best.vector);
  throw ConvergenceError("top_eigpair: no convergence after " + std::to_string(iter) +
                             " iterations (best residual " + std::to_string(best.residual) + ")",
                         best);
}

double pca_threshold(double lambda_hat) {
  if (!(lambda_hat > 0.0)) throw InvalidArgument("pca_threshold: lambda_hat must be > 0");
  return 2.0 + (lambda_hat + 1.0 / lambda_hat - 2.0) / 2.0;
}

PcaVerdict pca_test(const Observation& Y, double lambda_hat) {
  PcaVerdict v;
  v.threshold = pca_threshold(lambda_hat);
  v.lambda_max = top_eigpair(symmetrize(Y)).value;
  v.planted = v.lambda_max > v.threshold;
  return v;
}

BbpEstimate bbp_estimate(double lambda_hat, std::uint64_t n, std::uint64_t trials,
                         const PriorSpec& prior, std::uint64_t seed, unsigned workers) {
  if (trials < 1) throw InvalidArgument("bbp_estimate: need at least one trial");
  const ModelSpec model = ModelSpec::with_lambda_hat(n, lambda_hat, prior);
  BbpEstimate out;
  out.trials = trials;
  out.seeds.resize(trials);
  std::vector<double> lmax(trials), overlap(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const std::uint64_t s = trial_seed(seed, kStreamPlantedTrial, t);
    out.seeds[t] = s;
    PlantedSample sample = sample_planted(model, s);
    EigPair e = top_eigpair(symmetrize(sample.Y));
    Eigen::Map<const Eigen::VectorXd> x(sample.spike.data(), static_cast<Eigen::Index>(n));
    const double c = e.vector.dot(x) / std::sqrt(static_cast<double>(n));
    lmax[t] = e.value;
    overlap[t] = c * c;
  });
  MeanSe a = mean_and_se(lmax), b = mean_and_se(overlap);
  out.mean_lambda_max = a.mean;
  out.se_lambda_max = a.se;
  out.mean_overlap_sq = b.mean;
  out.se_overlap_sq = b.se;
  return out;
}

bool poly_threshold_test(const LowDegreeLikelihood& L, const Observation& Y, double eta) {
  return L(Y.entries) > eta;
}

bool poly_threshold_test(const ModelSpec& model, unsigned D, const Observation& Y, double eta) {
  return poly_threshold_test(LowDegreeLikelihood(model, D), Y, eta);
}

bool lr_test(const ModelSpec& model, const Observation& Y, double eta) {
  if (std::isnan(eta)) throw InvalidArgument("lr_test: threshold is NaN");
  if (eta <= 0.0) return true;
  if (std::isinf(eta)) return false;
  return lr_log_evaluate(model, Y.entries) > std::log(eta);
}

double calibrate_threshold(const Statistic& statistic, unsigned p, std::uint64_t n, double alpha,
                           std::uint64_t trials, std::uint64_t seed, unsigned workers) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw InvalidArgument("calibrate_threshold: alpha must lie in [0, 1)");
  if (trials < 1) throw InvalidArgument("calibrate_threshold: need at least one trial");
  std::vector<double> values(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    values[t] = statistic(sample_null(p, n, trial_seed(seed, kStreamTrial, t)));
  });
  std::sort(values.begin(), values.end());
  const auto allowed = static_cast<std::uint64_t>(std::floor(alpha * static_cast<double>(trials)));
  return values[trials - 1 - std::min(allowed, trials - 1)];
}

TestReport error_rates(const HypothesisTest& test, const ModelSpec& model, std::uint64_t trials,
                       std::uint64_t seed, unsigned workers) {
  if (trials < 30) throw InvalidArgument("error_rates: need at least 30 trials per hypothesis");
  TestReport r;
  r.test_id = test.id;
  r.trials = trials;
  r.seed = seed;
  r.null_seeds.resize(trials);
  r.planted_seeds.resize(trials);
  std::vector<char> null_p(trials), planted_p(trials);
  parallel_for(2 * trials, workers, [&](std::size_t i) {
    const std::size_t t = i / 2;
    if (i % 2 == 0) {
      const std::uint64_t s = trial_seed(seed, kStreamNullTrial, t);
      r.null_seeds[t] = s;
      null_p[t] = test.decide(sample_null(model.p(), model.n(), s));
    } else {
      const std::uint64_t s = trial_seed(seed, kStreamPlantedTrial, t);
      r.planted_seeds[t] = s;
      planted_p[t] = test.decide(sample_planted(model, s).Y);
    }
  });
  std::uint64_t false_p = 0, false_q = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    false_p += null_p[t] ? 1 : 0;
    false_q += planted_p[t] ? 0 : 1;
  }
  r.alpha_hat = static_cast<double>(false_p) / static_cast<double>(trials);
  r.beta_hat = static_cast<double>(false_q) / static_cast<double>(trials);
  r.alpha_ci = wilson_interval(false_p, trials);
  r.beta_ci = wilson_interval(false_q, trials);
  r.alpha_half_width = 0.5 * (r.alpha_ci.hi - r.alpha_ci.lo);
  r.beta_half_width = 0.5 * (r.beta_ci.hi - r.beta_ci.lo);
  return r;
}

double trace_statistic(const Observation& Y) {
  // Flat index of (i, ..., i) is i (n^{p-1} + ... + n + 1).
  std::uint64_t stride = 0, power = 1;
  for (unsigned r = 0; r < Y.p; ++r) {
    stride += power;
    power *= Y.n;
  }
  double acc = 0.0;
  for (std::uint64_t i = 0; i < Y.n; ++i) acc += Y.entries[i * stride];
  return acc;
}

PolyPerformance measure_poly_performance(const Statistic& f, const ModelSpec& model,
                                         double target_delta, std::uint64_t trials,
                                         std::uint64_t seed, unsigned workers) {
  if (trials < 2) throw InvalidArgument("measure_poly_performance: need at least two trials");
  std::vector<double> null_abs(trials), planted(trials);
  parallel_for(2 * trials, workers, [&](std::size_t i) {
    const std::size_t t = i / 2;
    if (i % 2 == 0)
      null_abs[t] = std::fabs(f(sample_null(model.p(), model.n(), trial_seed(seed, kStreamNullTrial, t))));
    else
      planted[t] = f(sample_planted(model, trial_seed(seed, kStreamPlantedTrial, t)).Y);
  });
  PolyPerformance out;
  out.null_trials = trials;
  out.planted_trials = trials;
  MeanSe m = mean_and_se(planted);
  out.A = m.mean;
  out.A_se = m.se;

  std::sort(null_abs.begin(), null_abs.end());
  const auto allowed = static_cast<std::uint64_t>(std::floor(target_delta * static_cast<double>(trials)));
  const double level = null_abs[trials - 1 - std::min(allowed, trials - 1)];
  out.B = std::nextafter(level, std::numeric_limits<double>::infinity());
  const auto exceed = static_cast<std::uint64_t>(
      null_abs.end() - std::lower_bound(null_abs.begin(), null_abs.end(), out.B));
  out.delta_hat = static_cast<double>(exceed) / static_cast<double>(trials);
  out.delta_upper = clopper_pearson_upper(exceed, trials, 0.95);
  return out;
}

}  // namespace lowdeg
