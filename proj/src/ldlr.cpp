#include "lowdeg/ldlr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "lowdeg/error.hpp"
#include "lowdeg/parallel.hpp"
#include "lowdeg/rng.hpp"

namespace lowdeg {
namespace {

double log_of(const SignedLog& x) { return x.is_zero() ? -INFINITY : x.log_mag; }

std::vector<double> cumulative_logs(std::span<const SignedLog> terms) {
  std::vector<double> out;
  out.reserve(terms.size());
  LogSumAccumulator acc;
  for (const auto& t : terms) {
    acc.add(t);
    out.push_back(log_of(acc.result()));
  }
  return out;
}

// <x^{(x)p}, Y> by contracting the trailing index p times.
double tensor_contract(std::span<const double> Y, std::span<const double> x, unsigned p) {
  const std::size_t n = x.size();
  std::vector<double> cur(Y.begin(), Y.end());
  for (unsigned r = 0; r < p; ++r) {
    std::size_t rows = cur.size() / n;
    std::vector<double> next(rows, 0.0);
    for (std::size_t j = 0; j < rows; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += cur[j * n + i] * x[i];
      next[j] = acc;
    }
    cur = std::move(next);
  }
  return cur[0];
}

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

double LdlrResult::norm_sq() const {
  return exact_total ? to_double(*exact_total) : std::exp(log_norm_sq());
}

LdlrResult ldlr_norm_sq(const ModelSpec& model, unsigned D, ModeRequest request) {
  MomentTable table = overlap_moments(model.prior(), model.n(), model.p() * D, request);
  return ldlr_norm_sq(model, D, table);
}

LdlrResult ldlr_norm_sq(const ModelSpec& model, unsigned D, const MomentTable& table) {
  const unsigned p = model.p();
  if (table.kmax() < p * D)
    throw InvalidArgument("ldlr_norm_sq: moment table reaches k=" + std::to_string(table.kmax()) +
                          ", need " + std::to_string(p * D));
  if (table.n() != model.n())
    throw InvalidArgument("ldlr_norm_sq: moment table is for a different n");

  LdlrResult r;
  r.p = p;
  r.D = D;
  r.terms.assign(D + 1, SignedLog::zero());
  r.skipped.assign(D + 1, false);
  const bool symmetric = model.prior().is_sign_symmetric();
  for (unsigned d = 0; d <= D; ++d) r.skipped[d] = symmetric && (p * d) % 2 == 1;

  if (table.mode() == ArithmeticMode::exact && model.lambda_sq_exact()) {
    const Rational& lam2 = *model.lambda_sq_exact();
    std::vector<Rational> exact(D + 1, Rational(0));
    Rational power = 1;
    Integer fact = 1;
    Rational total = 0;
    r.cumulative_log.reserve(D + 1);
    for (unsigned d = 0; d <= D; ++d) {
      if (d > 0) {
        power *= lam2;
        fact *= d;
      }
      if (!r.skipped[d]) exact[d] = power * table.exact_value(p * d) / Rational(fact);
      exact[d].canonicalize();
      total += exact[d];
      r.terms[d] = SignedLog::from_log(log_abs(exact[d]), sgn(exact[d]));
      r.cumulative_log.push_back(log_abs(total));
    }
    r.mode = ArithmeticMode::exact;
    r.exact_terms = std::move(exact);
    r.exact_total = std::move(total);
    return r;
  }

  r.mode = ArithmeticMode::log_space;
  r.terms[0] = SignedLog::one();
  const double lambda = model.lambda();
  if (lambda > 0.0) {
    const double log_lam2 = 2.0 * std::log(lambda);
    for (unsigned d = 1; d <= D; ++d) {
      if (r.skipped[d]) continue;
      SignedLog m = table.log_value(p * d);
      if (m.is_zero()) continue;
      r.terms[d] = SignedLog::from_log(d * log_lam2 - std::lgamma(d + 1.0) + m.log_mag, m.sign);
    }
  }
  r.cumulative_log = cumulative_logs(r.terms);
  return r;
}

TermRatios term_ratios(std::span<const SignedLog> terms) {
  TermRatios out;
  std::vector<unsigned> nz;
  for (unsigned d = 1; d < terms.size(); ++d)
    if (!terms[d].is_zero()) nz.push_back(d);
  for (std::size_t i = 0; i + 1 < nz.size(); ++i) {
    double ratio = std::exp(terms[nz[i + 1]].log_mag - terms[nz[i]].log_mag);
    out.degrees.push_back(nz[i]);
    out.ratios.push_back(ratio);
    out.dominated.push_back(ratio <= 0.5);
  }
  out.all_dominated = std::all_of(out.dominated.begin(), out.dominated.end(), [](bool b) { return b; });
  if (out.all_dominated) {
    SignedLog first = nz.empty() ? SignedLog::zero() : terms[nz[0]];
    SignedLog bound = SignedLog::one() + first * SignedLog::from_double(2.0);
    out.geometric_bound_log = bound.log_mag;
  }
  return out;
}

TermRatios term_ratios(const LdlrResult& result) { return term_ratios(result.terms); }

std::vector<SignedLog> subgaussian_majorant_terms(unsigned p, std::uint64_t n, double lambda,
                                                  unsigned D) {
  std::vector<SignedLog> terms(D + 1, SignedLog::zero());
  terms[0] = SignedLog::one();
  if (lambda <= 0.0) return terms;
  const double log_lam2 = 2.0 * std::log(lambda);
  const double log_2n = std::log(2.0 * static_cast<double>(n));
  for (unsigned d = 1; d <= D; ++d) {
    const double k = static_cast<double>(p) * d;
    terms[d] = SignedLog::from_log(d * log_lam2 - std::lgamma(d + 1.0) + 0.5 * k * log_2n +
                                   std::log(k) + std::lgamma(0.5 * k));
  }
  return terms;
}

ThresholdBounds tensor_threshold_bounds(unsigned p, std::uint64_t n, unsigned D) {
  if (p < 2) throw InvalidArgument("tensor_threshold_bounds: p must be >= 2");
  if (n < 1 || D < 1) throw InvalidArgument("tensor_threshold_bounds: need n >= 1 and D >= 1");
  const double pd = p;
  ThresholdBounds b;
  b.A = std::pow(2.0, -0.5) * std::pow(pd, -pd / 4.0 - 0.5);
  b.B = std::sqrt(2.0) * std::exp(pd / 2.0) * std::pow(pd, -pd / 4.0);
  const double scale = std::pow(static_cast<double>(n), -pd / 4.0) *
                       std::pow(static_cast<double>(D), (2.0 - pd) / 4.0);
  b.lambda_low = b.A * scale;
  b.lambda_high = b.B * scale;
  return b;
}

double GaussianHeuristic::ratio(double lambda_hat, unsigned d) {
  return lambda_hat * lambda_hat * (2.0 * d + 1.0) / (2.0 * (d + 1.0));
}

GaussianHeuristic gaussian_heuristic_norm_sq(double lambda_hat, unsigned D) {
  if (!(lambda_hat >= 0.0)) throw InvalidArgument("gaussian_heuristic_norm_sq: lambda_hat < 0");
  GaussianHeuristic g;
  g.terms.assign(D + 1, SignedLog::zero());
  g.terms[0] = SignedLog::one();
  if (lambda_hat > 0.0) {
    const double log_half_sq = 2.0 * std::log(lambda_hat) - std::log(2.0);
    for (unsigned d = 1; d <= D; ++d) {
      // (2d-1)!! = (2d)! / (2^d d!)
      double log_dfact = std::lgamma(2.0 * d + 1.0) - d * std::log(2.0) - std::lgamma(d + 1.0);
      g.terms[d] = SignedLog::from_log(d * log_half_sq + log_dfact - std::lgamma(d + 1.0));
    }
  }
  g.cumulative_log = cumulative_logs(g.terms);
  return g;
}

double lr_log_evaluate(const ModelSpec& model, std::span<const double> Y, std::uint64_t cap) {
  const std::uint64_t N = model.dimension();
  if (Y.size() != N)
    throw InvalidArgument("lr_evaluate: observation has " + std::to_string(Y.size()) +
                          " entries, expected " + std::to_string(N));
  const double lambda = model.lambda();
  if (lambda == 0.0) return 0.0;
  const auto support = enumerate_support(model.prior(), model.n(), cap);
  LogSumAccumulator acc;
  for (const auto& sv : support) {
    double sq = 0.0;
    for (double v : sv.x) sq += v * v;
    double norm_sq = lambda * lambda * std::pow(sq, static_cast<double>(model.p()));
    double inner = lambda * tensor_contract(Y, sv.x, model.p());
    acc.add_log(std::log(to_double(sv.probability)) + inner - 0.5 * norm_sq);
  }
  return acc.result().log_mag;
}

double lr_evaluate(const ModelSpec& model, std::span<const double> Y, std::uint64_t cap) {
  return std::exp(lr_log_evaluate(model, Y, cap));
}

namespace {

LrNormResult finish_norm(double log_value) {
  LrNormResult r;
  r.log_value = log_value;
  r.overflow = log_value > kMaxLogDouble;
  r.value = r.overflow ? INFINITY : std::exp(log_value);
  return r;
}

}  // namespace

LrNormResult lr_norm_sq(const ModelSpec& model, std::uint64_t pair_cap) {
  const auto& prior = model.prior();
  if (!prior.is_discrete())
    throw Unsupported("lr_norm_sq: pair enumeration needs a discrete prior; use Monte Carlo");
  const std::uint64_t atoms = prior.support().size();
  // |support|^{2n} pairs
  Integer pairs = 1;
  for (std::uint64_t i = 0; i < 2 * model.n(); ++i) {
    pairs *= static_cast<unsigned long>(atoms);
    if (pairs > Integer(static_cast<unsigned long>(pair_cap))) break;
  }
  if (pairs > Integer(static_cast<unsigned long>(pair_cap)))
    throw CapExceeded("lr_norm_sq: " + std::to_string(atoms) + "^" +
                      std::to_string(2 * model.n()) + " support pairs exceed cap " +
                      std::to_string(pair_cap));
  const auto support = enumerate_support(prior, model.n(), pair_cap);
  std::vector<double> logp(support.size());
  for (std::size_t i = 0; i < support.size(); ++i)
    logp[i] = std::log(to_double(support[i].probability));
  const double lam2 = model.lambda() * model.lambda();
  const double p = model.p();

  LogSumAccumulator acc;
  double finite_partial = 0.0;
  bool overflowed = false;
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = 0; b < support.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < support[a].x.size(); ++i) s += support[a].x[i] * support[b].x[i];
      acc.add_log(logp[a] + logp[b] + lam2 * std::pow(s, p));
    }
    if (!overflowed) {
      double partial = acc.result().log_mag;
      if (partial > kMaxLogDouble)
        overflowed = true;
      else
        finite_partial = std::exp(partial);
    }
  }
  LrNormResult r = finish_norm(acc.result().log_mag);
  r.finite_partial = r.overflow ? finite_partial : r.value;
  r.samples = static_cast<std::uint64_t>(support.size()) * support.size();
  return r;
}

LrNormResult lr_norm_sq_monte_carlo(const ModelSpec& model, std::uint64_t trials,
                                    std::uint64_t seed, unsigned workers) {
  if (trials < 2) throw InvalidArgument("lr_norm_sq_monte_carlo: need at least 2 trials");
  std::vector<double> v(trials);
  const double lam2 = model.lambda() * model.lambda();
  parallel_for(trials, workers, [&](std::size_t t) {
    Philox rng(seed, derive_stream(kStreamTrial, t));
    auto x1 = sample_spike(model.prior(), model.n(), rng);
    auto x2 = sample_spike(model.prior(), model.n(), rng);
    double s = std::inner_product(x1.begin(), x1.end(), x2.begin(), 0.0);
    v[t] = lam2 * std::pow(s, static_cast<double>(model.p()));
  });
  LogSumAccumulator m1, m2;
  for (double e : v) {
    m1.add_log(e);
    m2.add_log(2.0 * e);
  }
  const double logT = std::log(static_cast<double>(trials));
  const double log_mean = m1.result().log_mag - logT;
  const double log_m2 = m2.result().log_mag - logT;
  LrNormResult r = finish_norm(log_mean);
  r.finite_partial = r.overflow ? 0.0 : r.value;
  r.enumerated = false;
  r.samples = trials;
  double q = std::exp(log_m2 - 2.0 * log_mean);
  double rel = std::sqrt(std::max(0.0, q - 1.0) / static_cast<double>(trials - 1));
  r.std_error = r.overflow ? INFINITY : r.value * rel;
  return r;
}

DegreeSchedule DegreeSchedule::constant(unsigned c) {
  DegreeSchedule s;
  s.kind_ = Kind::constant;
  s.param_ = c;
  return s;
}

DegreeSchedule DegreeSchedule::log() {
  DegreeSchedule s;
  s.kind_ = Kind::log;
  return s;
}

DegreeSchedule DegreeSchedule::log_power(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InvalidArgument("degree schedule: epsilon must be > 0");
  DegreeSchedule s;
  s.kind_ = Kind::log_power;
  s.param_ = eps;
  return s;
}

DegreeSchedule DegreeSchedule::power(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("degree schedule: delta must lie in (0, 1)");
  DegreeSchedule s;
  s.kind_ = Kind::power;
  s.param_ = delta;
  return s;
}

DegreeSchedule DegreeSchedule::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string head(text.substr(0, colon));
  std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  auto number = [&]() {
    if (arg.empty()) throw InvalidArgument("degree schedule '" + std::string(text) + "' needs a parameter");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size())
      throw InvalidArgument("degree schedule '" + std::string(text) + "': bad parameter");
    return v;
  };
  if (head == "log" && arg.empty()) return log();
  if (head == "const" || head == "constant") {
    double c = number();
    if (c < 0 || c != std::floor(c)) throw InvalidArgument("degree schedule: constant must be a nonnegative integer");
    return constant(static_cast<unsigned>(c));
  }
  if (head == "logpow") return log_power(number());
  if (head == "pow") return power(number());
  throw InvalidArgument("unknown degree schedule '" + std::string(text) +
                        "' (expected const:<c>, log, logpow:<eps> or pow:<delta>)");
}

unsigned DegreeSchedule::operator()(std::uint64_t n) const {
  const double ln = std::log(static_cast<double>(n));
  double v = 0.0;
  switch (kind_) {
    case Kind::constant: return static_cast<unsigned>(param_);
    case Kind::log: v = ln; break;
    case Kind::log_power: v = std::pow(ln, 1.0 + param_); break;
    case Kind::power: v = std::pow(static_cast<double>(n), param_); break;
  }
  return static_cast<unsigned>(std::max(0.0, std::ceil(v - 1e-9)));
}

std::string DegreeSchedule::describe() const {
  switch (kind_) {
    case Kind::constant: return "const:" + std::to_string(static_cast<unsigned>(param_));
    case Kind::log: return "log";
    case Kind::log_power: return "logpow:" + format_double(param_, 12);
    case Kind::power: return "pow:" + format_double(param_, 12);
  }
  return "?";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::bounded: return "bounded";
    case Classification::diverging: return "diverging";
    case Classification::inconclusive: return "inconclusive";
  }
  return "?";
}

SignalSummary classify_series(std::span<const std::uint64_t> n,
                              std::span<const double> log_norm_sq, const ClassifierRule& rule) {
  SignalSummary s;
  const std::size_t m = n.size();
  if (m == 0) return s;
  s.sup_log_norm_sq = *std::max_element(log_norm_sq.begin(), log_norm_sq.end());
  const std::size_t first = m / 2;
  if (m - first < 2) return s;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(m - first);
  for (std::size_t i = first; i < m; ++i) {
    double x = std::log(static_cast<double>(n[i]));
    sx += x;
    sy += log_norm_sq[i];
    sxx += x * x;
    sxy += x * log_norm_sq[i];
  }
  double denom = k * sxx - sx * sx;
  s.slope = denom > 0 ? (k * sxy - sx * sy) / denom : 0.0;

  bool increasing = true;
  for (std::size_t i = first + 1; i < m; ++i)
    if (!(log_norm_sq[i] > log_norm_sq[i - 1])) increasing = false;
  if (increasing && log_norm_sq[m - 1] > rule.diverging_log_floor)
    s.classification = Classification::diverging;
  else if (s.sup_log_norm_sq <= rule.bounded_log_ceiling && std::fabs(s.slope) < rule.bounded_slope)
    s.classification = Classification::bounded;
  return s;
}

ScanResult scan(const ScanConfig& config) {
  if (config.n_grid.empty()) throw InvalidArgument("scan: n_grid is empty");
  if (config.signals.empty()) throw InvalidArgument("scan: signal grid is empty");
  if (config.signals_are_lambda_hat && config.p != 2)
    throw InvalidArgument("scan: lambda_hat is defined only for p = 2");
  for (const auto& s : config.signals)
    if (s < 0) throw InvalidArgument("scan: signal values must be >= 0");
  const Prior prior = make_prior(config.prior);

  std::vector<std::uint64_t> ns = config.n_grid;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() == 0) throw InvalidArgument("scan: n must be >= 1");

  std::vector<std::optional<MomentTable>> tables(ns.size());
  std::vector<std::string> table_errors(ns.size());
  parallel_for(ns.size(), config.workers, [&](std::size_t i) {
    try {
      tables[i] = overlap_moments(prior, ns[i], config.p * config.schedule(ns[i]), config.mode);
    } catch (const std::exception& e) {
      table_errors[i] = e.what();
    }
  });

  ScanResult result;
  const std::size_t S = config.signals.size();
  result.points.resize(ns.size() * S);
  parallel_for(result.points.size(), config.workers, [&](std::size_t idx) {
    const std::size_t ni = idx / S, si = idx % S;
    ScanPoint& pt = result.points[idx];
    pt.n = ns[ni];
    pt.D = config.schedule(pt.n);
    pt.signal_index = si;
    try {
      ModelSpec model = config.signals_are_lambda_hat
                            ? ModelSpec::with_lambda_hat(pt.n, config.signals[si], config.prior)
                            : ModelSpec::with_lambda(config.p, pt.n, config.signals[si], config.prior);
      pt.lambda = model.lambda();
      pt.lambda_hat = model.lambda_hat();
      if (!tables[ni]) throw Error(table_errors[ni]);
      LdlrResult r = ldlr_norm_sq(model, pt.D, *tables[ni]);
      pt.log_norm_sq = r.log_norm_sq();
      pt.mode = r.mode;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
  });

  for (const auto& pt : result.points)
    if (!pt.error.empty()) ++result.failures;

  for (std::size_t si = 0; si < S; ++si) {
    std::vector<std::uint64_t> n_ok;
    std::vector<double> v_ok;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
      const auto& pt = result.points[ni * S + si];
      if (!pt.error.empty()) continue;
      n_ok.push_back(pt.n);
      v_ok.push_back(pt.log_norm_sq);
    }
    SignalSummary summary = classify_series(n_ok, v_ok, config.rule);
    summary.signal = config.signals[si];
    result.signals.push_back(std::move(summary));
  }
  return result;
}

std::string scan_to_csv(const ScanConfig& config, const ScanResult& result) {
  std::ostringstream os;
  os << "p,n,D,lambda,lambda_hat,log_norm_sq,mode,classification\n";
  for (const auto& pt : result.points) {
    os << config.p << ',' << pt.n << ',' << pt.D << ',';
    if (pt.error.empty() || pt.lambda > 0.0) os << format_double(pt.lambda, 12);
    os << ',';
    if (pt.lambda_hat) os << format_double(*pt.lambda_hat, 12);
    os << ',';
    if (pt.error.empty()) os << format_double(pt.log_norm_sq, 15);
    os << ',' << (pt.error.empty() ? std::string(to_string(pt.mode)) : std::string("failed"));
    os << ',' << to_string(result.signals.at(pt.signal_index).classification) << '\n';
  }
  return os.str();
}

}  // namespace lowdeg
