#include "lowdeg/oracles.hpp"

#include <cmath>
#include <cstdio>

#include "lowdeg/error.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/logspace.hpp"

namespace lowdeg {
namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

OracleCheck exact_check(std::string name, const Rational& expected, const Rational& actual) {
  OracleCheck c;
  c.name = std::move(name);
  c.expected = to_string(expected);
  c.actual = to_string(actual);
  c.exact = true;
  c.passed = expected == actual;
  return c;
}

OracleCheck float_check(std::string name, double expected, double actual, double tol) {
  OracleCheck c;
  c.name = std::move(name);
  c.expected = fmt(expected);
  c.actual = fmt(actual);
  c.tolerance = tol;
  const double scale = std::max(1.0, std::fabs(expected));
  c.rel_error = std::fabs(expected - actual) / scale;
  c.passed = c.rel_error <= tol;
  return c;
}

// Mean 0, variance 1, not sign-symmetric.
PriorSpec skewed_prior() {
  return PriorSpec::discrete_custom({{Rational(-2), Rational(1, 5)}, {Rational(1, 2), Rational(4, 5)}});
}

}  // namespace

std::map<Rational, Rational> overlap_distribution(const Prior& prior, unsigned n) {
  const auto entry = entrywise_overlap_distribution(prior);
  std::map<Rational, Rational> law{{Rational(0), Rational(1)}};
  for (unsigned i = 0; i < n; ++i) {
    std::map<Rational, Rational> next;
    for (const auto& [s, ps] : law)
      for (const auto& [v, pv] : entry) {
        Rational key = s + v;
        key.canonicalize();
        next[key] += ps * pv;
      }
    law = std::move(next);
  }
  return law;
}

std::vector<Rational> overlap_moments_naive(const Prior& prior, unsigned n, unsigned kmax) {
  const auto law = overlap_distribution(prior, n);
  std::vector<Rational> out(kmax + 1, Rational(0));
  for (const auto& [s, ps] : law) {
    Rational power = 1;
    for (unsigned k = 0; k <= kmax; ++k) {
      out[k] += ps * power;
      power *= s;
    }
  }
  for (auto& v : out) v.canonicalize();
  return out;
}

std::vector<Rational> hermite_degree_sums(unsigned p, unsigned n, const PriorSpec& prior,
                                          unsigned D, std::uint64_t cap) {
  const ModelSpec model = ModelSpec::with_lambda(p, n, Rational(1), prior);
  std::vector<Rational> sums(D + 1, Rational(0));
  MultiIndexEnumerator e(model.dimension(), D, cap);
  MultiIndex alpha;
  while (e.next(alpha)) {
    Rational m = mixed_prior_moment(model, alpha);
    if (m == 0) continue;
    Integer fact = 1;
    for (const auto& [coord, exp] : alpha.entries) fact *= factorial(exp);
    sums[alpha.degree()] += m * m / Rational(fact);
  }
  for (auto& s : sums) s.canonicalize();
  return sums;
}

Rational hermite_norm_sq(const std::vector<Rational>& degree_sums, const Rational& lambda_sq,
                         unsigned D) {
  if (D >= degree_sums.size()) throw InvalidArgument("hermite_norm_sq: D beyond the degree sums");
  Rational total = 0, power = 1;
  for (unsigned d = 0; d <= D; ++d) {
    total += power * degree_sums[d];
    power *= lambda_sq;
  }
  total.canonicalize();
  return total;
}

double lr_norm_sq_from_distribution(const ModelSpec& model) {
  const auto law = overlap_distribution(model.prior(), static_cast<unsigned>(model.n()));
  const double lam2 = model.lambda() * model.lambda();
  LogSumAccumulator acc;
  for (const auto& [s, ps] : law)
    acc.add_log(std::log(to_double(ps)) + lam2 * std::pow(to_double(s), static_cast<double>(model.p())));
  return std::exp(acc.result().log_mag);
}

double SingleCoordinateExpansion::evaluate(double y) const {
  double acc = 0.0;
  for (std::size_t j = monomial_coefficients.size(); j-- > 0;) acc = acc * y + monomial_coefficients[j];
  return acc;
}

double SingleCoordinateExpansion::norm_sq() const {
  double acc = 0.0, fact = 1.0;
  for (std::size_t k = 0; k < hermite_coefficients.size(); ++k) {
    if (k > 0) fact *= static_cast<double>(k);
    acc += hermite_coefficients[k] * hermite_coefficients[k] * fact;
  }
  return acc;
}

SingleCoordinateExpansion single_coordinate_expansion(const ModelSpec& model, unsigned D) {
  if (model.n() != 1) throw InvalidArgument("single_coordinate_expansion: needs n = 1");
  SingleCoordinateExpansion out;
  out.hermite_coefficients.resize(D + 1);
  out.monomial_coefficients.assign(D + 1, 0.0);
  double lam_k = 1.0, fact = 1.0;
  for (unsigned k = 0; k <= D; ++k) {
    if (k > 0) {
      lam_k *= model.lambda();
      fact *= k;
    }
    const double c = lam_k * to_double(model.prior().moment(model.p() * k)) / fact;
    out.hermite_coefficients[k] = c;
    const HermitePoly h = hermite_coeffs(k);
    for (unsigned j = 0; j <= k; ++j) out.monomial_coefficients[j] += c * h.coeffs[j].get_d();
  }
  return out;
}

double single_coordinate_lr(const ModelSpec& model, double y) {
  if (model.n() != 1) throw InvalidArgument("single_coordinate_lr: needs n = 1");
  const Prior& prior = model.prior();
  double acc = 0.0;
  for (const SupportPoint& a : prior.support()) {
    const double x = model.lambda() * std::pow(a.value, static_cast<double>(model.p()));
    acc += to_double(a.probability) * std::exp(x * y - 0.5 * x * x);
  }
  return acc;
}

std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& opt) {
  std::vector<OracleCheck> out;
  const std::vector<std::pair<std::string, PriorSpec>> priors = {
      {"rademacher", PriorSpec::rademacher()},
      {"sparse_rademacher(1/4)", PriorSpec::sparse_rademacher(Rational(1, 4))},
      {"skewed_custom", skewed_prior()}};

  // Overlap moments: doubling convolution against naive n-fold convolution.
  for (const auto& [name, spec] : priors) {
    const Prior prior = make_prior(spec);
    for (unsigned n : {1u, 2u, 3u, 5u}) {
      const unsigned kmax = 12;
      const MomentTable table = overlap_moments(prior, n, kmax, ModeRequest::exact);
      const auto naive = overlap_moments_naive(prior, n, kmax);
      for (unsigned k = 0; k <= kmax; ++k)
        out.push_back(exact_check("overlap_moment " + name + " n=" + std::to_string(n) +
                                      " k=" + std::to_string(k),
                                  naive[k], table.exact_value(k)));
    }
  }

  // ||L^{<=D}||^2 from overlap moments against the Hermite-coefficient sum.
  for (unsigned n = 1; n <= opt.max_n_hermite; ++n) {
    const auto sums = hermite_degree_sums(2, n, PriorSpec::rademacher(), opt.max_D_hermite);
    for (const Rational& lambda : {Rational(1, 4), Rational(1, 2), Rational(1)}) {
      const ModelSpec model = ModelSpec::with_lambda(2, n, lambda, PriorSpec::rademacher());
      for (unsigned D = 0; D <= opt.max_D_hermite; ++D) {
        const LdlrResult r = ldlr_norm_sq(model, D, ModeRequest::exact);
        out.push_back(exact_check("ldlr_norm_sq vs hermite sum n=" + std::to_string(n) + " D=" +
                                      std::to_string(D) + " lambda=" + to_string(lambda),
                                  hermite_norm_sq(sums, lambda * lambda, D), *r.exact_total));
      }
    }
  }

  // Log-space engine against the exact engine.
  for (unsigned n : {3u, 10u, 40u}) {
    const ModelSpec model = ModelSpec::with_lambda_hat(n, Rational(9, 10), PriorSpec::rademacher());
    const LdlrResult ex = ldlr_norm_sq(model, 12, ModeRequest::exact);
    const LdlrResult lg = ldlr_norm_sq(model, 12, ModeRequest::log_space);
    out.push_back(float_check("ldlr_norm_sq log-space vs exact n=" + std::to_string(n),
                              to_double(*ex.exact_total), lg.norm_sq(), 1e-10));
  }

  // Full second moment: pair enumeration against the overlap law.
  for (unsigned n = 1; n <= opt.max_n_pairs; ++n) {
    const ModelSpec model = ModelSpec::with_lambda_hat(n, 0.5, PriorSpec::rademacher());
    out.push_back(float_check("lr_norm_sq pairs vs overlap law n=" + std::to_string(n),
                              lr_norm_sq_from_distribution(model), lr_norm_sq(model).value, 1e-12));
  }
  {
    const ModelSpec model = ModelSpec::with_lambda(3, 1, 1.0, PriorSpec::rademacher());
    out.push_back(float_check("lr_norm_sq single atom pair cosh(1)", std::cosh(1.0),
                              lr_norm_sq(model).value, 1e-12));
  }

  // Single-coordinate models: symbolic expansion against the Hermite engine
  // and the full likelihood ratio.
  for (unsigned p : {2u, 3u}) {
    for (const auto& [name, spec] : priors) {
      const ModelSpec model = ModelSpec::with_lambda(p, 1, Rational(3, 4), spec);
      for (unsigned D : {0u, 2u, 5u, 8u}) {
        const auto sym = single_coordinate_expansion(model, D);
        for (double y : {-1.5, 0.0, 0.5, 2.0}) {
          const double v = ldlr_evaluate(model, D, std::span<const double>(&y, 1));
          out.push_back(float_check("ldlr_evaluate single coordinate p=" + std::to_string(p) + " " +
                                        name + " D=" + std::to_string(D) + " y=" + fmt(y),
                                    sym.evaluate(y), v, 1e-10));
        }
        out.push_back(float_check("ldlr_norm_sq single coordinate p=" + std::to_string(p) + " " +
                                      name + " D=" + std::to_string(D),
                                  sym.norm_sq(), ldlr_norm_sq(model, D).norm_sq(), 1e-10));
      }
      for (double y : {-1.0, 0.0, 1.0}) {
        const double v = lr_evaluate(model, std::span<const double>(&y, 1));
        out.push_back(float_check("lr_evaluate single coordinate p=" + std::to_string(p) + " " + name +
                                      " y=" + fmt(y),
                                  single_coordinate_lr(model, y), v, 1e-12));
      }
    }
  }

  // Hermite coefficients against the closed forms.
  {
    const HermitePoly h4 = hermite_coeffs(4);
    const std::vector<Integer> expect{3, 0, -6, 0, 1};
    OracleCheck c;
    c.name = "hermite_coeffs k=4";
    c.expected = "3 0 -6 0 1";
    for (std::size_t j = 0; j < h4.coeffs.size(); ++j)
      c.actual += (j ? " " : "") + h4.coeffs[j].get_str();
    c.exact = true;
    c.passed = h4.coeffs == expect;
    out.push_back(c);
  }
  return out;
}

}  // namespace lowdeg
