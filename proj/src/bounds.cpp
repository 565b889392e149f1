#include "lowdeg/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "lowdeg/error.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/parallel.hpp"
#include "lowdeg/rng.hpp"
#include "lowdeg/stats.hpp"

namespace lowdeg {
namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void finish(BoundReport& r) {
  r.satisfied = r.satisfied && within_bound(r.lhs, r.rhs);
  r.margin = r.rhs - r.lhs;
}

// Rational lower bound on pi.
const Rational& pi_lower() {
  static const Rational value(Integer("314159265358979"), Integer("100000000000000"));
  return value;
}

}  // namespace

bool within_bound(double lhs, double rhs) {
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (lhs <= rhs) return true;
  return lhs - rhs <= kBoundRelTol * std::max(std::fabs(lhs), std::fabs(rhs));
}

double subgaussian_moment_bound_log(double sigma_sq, unsigned k) {
  if (!(sigma_sq > 0.0)) throw InvalidArgument("subgaussian_moment_bound: sigma^2 must be > 0");
  if (k < 1) throw InvalidArgument("subgaussian_moment_bound: k must be >= 1");
  const double kk = k;
  return 0.5 * kk * std::log(2.0 * sigma_sq) + std::log(kk) + std::lgamma(0.5 * kk);
}

double subgaussian_moment_bound(double sigma_sq, unsigned k) {
  return std::exp(subgaussian_moment_bound_log(sigma_sq, k));
}

Rational rademacher_sum_abs_moment(unsigned n, unsigned k) {
  Integer acc = 0;
  for (unsigned j = 0; j <= n; ++j) {
    Integer s = Integer(static_cast<long>(n) - 2 * static_cast<long>(j));
    s = abs(s);
    Integer term;
    mpz_pow_ui(term.get_mpz_t(), s.get_mpz_t(), k);
    acc += binomial(n, j) * term;
  }
  Integer denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), 2, n);
  Rational out(acc, denom);
  out.canonicalize();
  return out;
}

bool rademacher_moment_dominated(unsigned n, unsigned k) {
  if (k < 1) throw InvalidArgument("rademacher_moment_dominated: k must be >= 1");
  const Rational lhs = rademacher_sum_abs_moment(n, k);
  const unsigned m = k / 2;
  Integer two_n_m;
  mpz_ui_pow_ui(two_n_m.get_mpz_t(), 2UL * n, m);
  if (k % 2 == 0) {
    // (2n)^m k (m-1)!
    Rational bound(two_n_m * k * factorial(m - 1));
    return lhs <= bound;
  }
  // (2n)^m sqrt(2n) k (2m)! / (4^m m!) sqrt(pi) = R sqrt(2 n pi)
  Integer four_m;
  mpz_ui_pow_ui(four_m.get_mpz_t(), 4, m);
  Rational R(two_n_m * k * factorial(2 * m), four_m * factorial(m));
  R.canonicalize();
  return lhs * lhs <= R * R * Rational(2 * n) * pi_lower();
}

BoundReport subgaussian_dominance_check(unsigned n_max, unsigned k_max) {
  BoundReport r;
  r.name = "subgaussian_moment_dominance";
  r.parameters = {{"n_max", std::to_string(n_max)}, {"k_max", std::to_string(k_max)},
                  {"sigma_sq", "n"}};
  double worst = 0.0;
  std::size_t failures = 0;
  for (unsigned n = 1; n <= n_max; ++n) {
    for (unsigned k = 1; k <= k_max; ++k) {
      const bool ok = rademacher_moment_dominated(n, k);
      const double ratio = std::exp(log_abs(rademacher_sum_abs_moment(n, k)) -
                                    subgaussian_moment_bound_log(static_cast<double>(n), k));
      worst = std::max(worst, ratio);
      if (!ok) {
        ++failures;
        r.rows.push_back({"n=" + std::to_string(n) + " k=" + std::to_string(k), ratio, 1.0, false});
      }
    }
  }
  r.lhs = worst;
  r.rhs = 1.0;
  r.satisfied = failures == 0;
  r.note = "lhs is the largest E|S|^k / bound; comparisons are exact";
  finish(r);
  return r;
}

BoundReport gamma_ratio_bound(double x, double a) {
  if (!(x > 0.0) || !(a >= 0.0)) throw InvalidArgument("gamma_ratio_bound: need x > 0 and a >= 0");
  BoundReport r;
  r.name = "gamma_ratio";
  r.parameters = {{"x", fmt(x)}, {"a", fmt(a)}};
  r.lhs = std::exp(std::lgamma(x + a) - std::lgamma(x));
  r.rhs = std::pow(x + a, a);
  finish(r);
  return r;
}

BoundReport local_chernoff_check(const PriorSpec& prior_spec, std::uint64_t n,
                                 const ChernoffOptions& opt, std::uint64_t seed,
                                 unsigned workers) {
  if (n < 1) throw InvalidArgument("local_chernoff_check: n must be >= 1");
  if (!(opt.eta >= 0.0 && opt.eta < 1.0)) throw InvalidArgument("local_chernoff_check: eta must lie in [0, 1)");
  if (opt.trials < 1) throw InvalidArgument("local_chernoff_check: need at least one trial");
  const Prior prior = make_prior(prior_spec);
  const double limit = opt.delta * static_cast<double>(n);

  std::vector<double> grid = opt.t_grid;
  if (grid.empty()) {
    const unsigned m = std::max(2u, opt.grid_points);
    for (unsigned i = 0; i < m; ++i) grid.push_back(limit * i / (m - 1));
  }
  for (double t : grid)
    if (t < 0.0 || t > limit * (1 + 1e-12))
      throw InvalidArgument("local_chernoff_check: t = " + fmt(t) + " outside [0, delta n]");

  std::vector<double> overlap(opt.trials);
  parallel_for(opt.trials, workers, [&](std::size_t t) {
    Philox rng(seed, derive_stream(kStreamTrial, t));
    double s = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) s += prior.sample(rng) * prior.sample(rng);
    overlap[t] = std::fabs(s);
  });
  std::sort(overlap.begin(), overlap.end());
  auto tail_count = [&](double t) {
    return static_cast<std::uint64_t>(overlap.end() - std::lower_bound(overlap.begin(), overlap.end(), t));
  };
  const double T = static_cast<double>(opt.trials);
  const double C = static_cast<double>(tail_count(0.0)) / T;

  BoundReport r;
  r.name = "local_chernoff";
  r.parameters = {{"prior", prior.describe()}, {"n", std::to_string(n)}, {"eta", fmt(opt.eta)},
                  {"delta", fmt(opt.delta)}, {"trials", std::to_string(opt.trials)},
                  {"confidence", fmt(opt.confidence)}, {"C", fmt(C)}, {"seed", std::to_string(seed)}};
  double worst = 0.0;
  std::size_t undecided = 0;
  for (double t : grid) {
    const std::uint64_t count = tail_count(t);
    const double freq = count / T;
    const double bound = C * std::exp(-(1.0 - opt.eta) * t * t / (2.0 * static_cast<double>(n)));
    const double lo = clopper_pearson_lower(count, opt.trials, opt.confidence);
    const double hi = clopper_pearson_upper(count, opt.trials, opt.confidence);
    const bool ok = within_bound(lo, bound);
    if (ok && hi > bound) ++undecided;
    worst = std::max(worst, bound > 0 ? lo / bound : (lo > 0 ? INFINITY : 0.0));
    r.rows.push_back({"t=" + fmt(t) + " freq in [" + fmt(lo) + ", " + fmt(hi) + "]", freq, bound, ok});
    r.satisfied = r.satisfied && ok;
  }
  r.lhs = worst;
  r.rhs = 1.0;
  r.note = "lhs is the largest Clopper-Pearson lower limit over the bound; " +
           std::to_string(undecided) + " grid points have an upper limit above the bound";
  finish(r);
  return r;
}

unsigned MultilinearPoly::degree() const {
  unsigned d = 0;
  for (auto m : monomials) d = std::max(d, static_cast<unsigned>(std::popcount(m)));
  return d;
}

MultilinearPoly random_multilinear_poly(unsigned k, unsigned N, std::uint64_t seed) {
  if (N < 1 || N > 64) throw InvalidArgument("random_multilinear_poly: need 1 <= N <= 64");
  if (k > N) throw InvalidArgument("random_multilinear_poly: degree exceeds the variable count");
  Philox rng(seed, kStreamAux);
  auto random_subset = [&](unsigned size) {
    std::uint64_t mask = 0;
    while (static_cast<unsigned>(std::popcount(mask)) < size) mask |= std::uint64_t{1} << (rng() % N);
    return mask;
  };
  const unsigned target = 1 + static_cast<unsigned>(rng() % 20);
  MultilinearPoly f;
  f.monomials.push_back(random_subset(k));
  for (unsigned attempt = 0; f.monomials.size() < target && attempt < 200; ++attempt) {
    std::uint64_t mask = random_subset(static_cast<unsigned>(rng() % (k + 1)));
    if (std::find(f.monomials.begin(), f.monomials.end(), mask) == f.monomials.end())
      f.monomials.push_back(mask);
  }
  for (std::size_t i = 0; i < f.monomials.size(); ++i) f.coefficients.push_back(rng() & 1 ? 1.0 : -1.0);
  return f;
}

std::pair<double, double> multilinear_moments(const MultilinearPoly& f, BonamiBase base) {
  const auto& M = f.monomials;
  const auto& c = f.coefficients;
  const std::size_t m = M.size();
  double second = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (M[a] == M[b]) second += c[a] * c[b];
  double fourth = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t e = 0; e < m; ++e) {
        const std::uint64_t abe = M[a] ^ M[b] ^ M[e];
        const double cabe = c[a] * c[b] * c[e];
        for (std::size_t g = 0; g < m; ++g) {
          if (abe != M[g]) continue;
          double w = 1.0;
          if (base == BonamiBase::gaussian)
            w = std::pow(3.0, std::popcount(M[a] & M[b] & M[e] & M[g]));
          fourth += cabe * c[g] * w;
        }
      }
  return {second, fourth};
}

BoundReport bonami_check(const MultilinearPoly& f, unsigned k, BonamiBase base,
                         std::uint64_t trials, std::uint64_t seed) {
  if (f.degree() > k) throw InvalidArgument("bonami_check: polynomial degree exceeds k");
  auto [second, fourth] = multilinear_moments(f, base);
  const double factor = std::pow(3.0, 2.0 * k);

  BoundReport r;
  r.name = "bonami";
  r.parameters = {{"k", std::to_string(k)},
                  {"base", base == BonamiBase::gaussian ? "gaussian" : "rademacher"},
                  {"monomials", std::to_string(f.monomials.size())},
                  {"trials", std::to_string(trials)}};
  r.lhs = fourth;
  r.rhs = factor * second * second;
  r.rows.push_back({"exact", fourth, factor * second * second, within_bound(fourth, factor * second * second)});

  if (trials >= 2) {
    Philox rng(seed, kStreamTrial);
    std::uint64_t used = 0;
    for (auto m : f.monomials) used |= m;
    const unsigned vars = used == 0 ? 0 : 64 - static_cast<unsigned>(std::countl_zero(used));
    std::vector<double> f2(trials), f4(trials);
    std::vector<double> x(vars);
    for (std::uint64_t t = 0; t < trials; ++t) {
      for (auto& v : x) v = base == BonamiBase::gaussian ? rng.normal() : (rng() & 1 ? 1.0 : -1.0);
      double val = 0.0;
      for (std::size_t i = 0; i < f.monomials.size(); ++i) {
        double term = f.coefficients[i];
        for (std::uint64_t mask = f.monomials[i]; mask; mask &= mask - 1) term *= x[std::countr_zero(mask)];
        val += term;
      }
      f2[t] = val * val;
      f4[t] = f2[t] * f2[t];
    }
    MeanSe m2 = mean_and_se(f2), m4 = mean_and_se(f4);
    const double mc_rhs = factor * m2.mean * m2.mean;
    const bool ok = within_bound(m4.mean - 5.0 * m4.se, mc_rhs);
    r.rows.push_back({"monte_carlo (E f^4 - 5 se)", m4.mean - 5.0 * m4.se, mc_rhs, ok});
    r.satisfied = ok;
  }
  r.satisfied = r.satisfied && r.rows.front().satisfied;
  finish(r);
  return r;
}

BoundReport bonami_check(unsigned k, unsigned N, BonamiBase base, std::uint64_t poly_seed,
                         std::uint64_t trials, std::uint64_t seed) {
  if (k > 4 || N > 50) throw InvalidArgument("bonami_check: supported for k <= 4 and N <= 50");
  BoundReport r = bonami_check(random_multilinear_poly(k, N, poly_seed), k, base, trials, seed);
  r.parameters.emplace_back("N", std::to_string(N));
  r.parameters.emplace_back("poly_seed", std::to_string(poly_seed));
  return r;
}

double paley_zygmund_bound(double EZ, double EZ2, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("paley_zygmund_bound: theta must lie in [0, 1]");
  if (!(EZ2 > 0.0)) throw InvalidArgument("paley_zygmund_bound: E[Z^2] must be > 0");
  if (EZ * EZ > EZ2 * (1.0 + 1e-12))
    throw InvalidArgument("paley_zygmund_bound: infeasible moments, E[Z]^2 > E[Z^2]");
  return (1.0 - theta) * (1.0 - theta) * EZ * EZ / EZ2;
}

LdlrLowerBound ldlr_lb_from_poly_test(double A, double B, unsigned k, unsigned d) {
  if (!(B > 0.0) || !(A > B)) throw InvalidArgument("ldlr_lb_from_poly_test: need A > B > 0");
  if (k < 1 || d < 1) throw InvalidArgument("ldlr_lb_from_poly_test: need k >= 1 and d >= 1");
  LdlrLowerBound out;
  out.bound = 0.5 * std::pow(A / B, 2.0 * k);
  out.delta_admissible = 0.5 * std::pow(3.0, -4.0 * k * d);
  return out;
}

LdlrLowerBound ldlr_lb_from_spectral(double A, double B, unsigned k, unsigned d, double L) {
  if (!(L >= 1.0)) throw InvalidArgument("ldlr_lb_from_spectral: need L >= 1");
  LdlrLowerBound out = ldlr_lb_from_poly_test(A, B, k, d);
  out.bound = std::pow(A / B, 2.0 * k) / (2.0 * L);
  return out;
}

BoundReport consistency_crosscheck(const ModelSpec& model, const TestPerformance& perf) {
  BoundReport r;
  r.name = "consistency_crosscheck";
  r.parameters = {{"model", model.describe()}, {"A", fmt(perf.A)}, {"B", fmt(perf.B)},
                  {"delta", fmt(perf.delta)}, {"k", std::to_string(perf.k)},
                  {"d", std::to_string(perf.d)}};
  r.log_scale = true;
  std::string unmet;
  if (!(perf.B > 0.0) || !(perf.A > perf.B)) unmet = "A > B > 0 fails";
  if (perf.k < 1 || perf.d < 1) unmet = "k, d must be >= 1";
  const double delta_adm = 0.5 * std::pow(3.0, -4.0 * perf.k * perf.d);
  if (unmet.empty() && perf.delta > delta_adm)
    unmet = "delta = " + fmt(perf.delta) + " exceeds (1/2) 3^{-4kd} = " + fmt(delta_adm);
  if (!unmet.empty()) {
    r.note = "hypotheses not met (" + unmet + "); nothing to check";
    r.satisfied = true;
    return r;
  }
  const unsigned D = 2 * perf.k * perf.d;
  const LdlrResult L = ldlr_norm_sq(model, D);
  r.lhs = std::log(ldlr_lb_from_poly_test(perf.A, perf.B, perf.k, perf.d).bound);
  r.rhs = 0.5 * L.log_norm_sq();
  r.note = "log of (1/2)(A/B)^{2k} against log ||L^{<=" + std::to_string(D) + "}||";
  finish(r);
  return r;
}

std::vector<BoundReport> bounds_suite(const BoundsSuiteOptions& opt, std::uint64_t seed,
                                      unsigned workers) {
  std::vector<BoundReport> out;
  out.push_back(subgaussian_dominance_check(opt.dominance_n_max, opt.dominance_k_max));
  for (double x : {0.5, 1.0, 4.0, 25.0})
    for (double a : {0.25, 0.5, 1.0}) out.push_back(gamma_ratio_bound(x, a));

  out.push_back(local_chernoff_check(PriorSpec::rademacher(), opt.chernoff_n, opt.chernoff,
                                     trial_seed(seed, kStreamAux, 1), workers));
  out.push_back(local_chernoff_check(PriorSpec::gaussian_iid(), opt.chernoff_n, opt.chernoff,
                                     trial_seed(seed, kStreamAux, 2), workers));

  for (BonamiBase base : {BonamiBase::gaussian, BonamiBase::rademacher}) {
    const std::uint64_t purpose = base == BonamiBase::gaussian ? 3 : 4;
    std::vector<BoundReport> each(opt.bonami_polynomials);
    parallel_for(each.size(), workers, [&](std::size_t i) {
      const unsigned k = 1 + static_cast<unsigned>(i % 4);
      const unsigned N = std::max(k, 4 + static_cast<unsigned>((7 * i) % 47));
      each[i] = bonami_check(k, N, base, trial_seed(seed, derive_stream(kStreamAux, purpose), i),
                             opt.bonami_trials, trial_seed(seed, kStreamTrial, purpose * 1'000'003 + i));
    });
    BoundReport r;
    r.name = "bonami_random_family";
    r.parameters = {{"base", base == BonamiBase::gaussian ? "gaussian" : "rademacher"},
                    {"polynomials", std::to_string(opt.bonami_polynomials)},
                    {"trials", std::to_string(opt.bonami_trials)},
                    {"seed", std::to_string(seed)}};
    std::size_t violations = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < each.size(); ++i) {
      const BoundReport& b = each[i];
      std::string label = "poly " + std::to_string(i);
      for (const auto& [key, value] : b.parameters)
        if (key == "k" || key == "N") label += " " + key + "=" + value;
      r.rows.push_back({label, b.lhs, b.rhs, b.satisfied});
      if (!b.satisfied) ++violations;
      if (b.rhs > 0) worst = std::max(worst, b.lhs / b.rhs);
    }
    r.lhs = worst;
    r.rhs = 1.0;
    r.satisfied = violations == 0;
    r.note = std::to_string(violations) + " violations; lhs is the largest E f^4 / (3^{2k} (E f^2)^2)";
    finish(r);
    out.push_back(std::move(r));
  }

  const ModelSpec model =
      ModelSpec::with_lambda_hat(opt.crosscheck_n, opt.crosscheck_lambda_hat, PriorSpec::rademacher());
  const double delta_adm = 0.5 * std::pow(3.0, -4.0);
  const PolyPerformance perf = measure_poly_performance(
      trace_statistic, model, 0.65 * delta_adm, opt.crosscheck_trials,
      trial_seed(seed, kStreamAux, 5), workers);
  BoundReport cross = consistency_crosscheck(model, {perf.A, perf.B, perf.delta_upper, 1, 1});
  cross.parameters.emplace_back("statistic", "trace");
  cross.parameters.emplace_back("A_se", fmt(perf.A_se));
  cross.parameters.emplace_back("delta_hat", fmt(perf.delta_hat));
  cross.note += "; A, B are Monte Carlo estimates and delta is a 95% upper confidence limit";
  out.push_back(std::move(cross));
  return out;
}

}  // namespace lowdeg
