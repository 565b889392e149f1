#include "lowdeg/priors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lowdeg/error.hpp"

namespace lowdeg {
namespace {

Rational exact_sqrt(const Rational& square) {
  if (square < 0 || !mpz_perfect_square_p(square.get_num_mpz_t()) ||
      !mpz_perfect_square_p(square.get_den_mpz_t()))
    throw Unsupported("overlap value is not rational");
  Rational root;
  mpz_sqrt(root.get_num_mpz_t(), square.get_num_mpz_t());
  mpz_sqrt(root.get_den_mpz_t(), square.get_den_mpz_t());
  root.canonicalize();
  return root;
}

void validate_custom(const std::vector<Atom>& atoms) {
  if (atoms.empty()) throw InvalidArgument("discrete_custom prior: atom list is empty");
  Rational total = 0, mean = 0, second = 0;
  for (const auto& atom : atoms) {
    if (atom.probability < 0)
      throw InvalidArgument("discrete_custom prior: negative probability " +
                            to_string(atom.probability));
    total += atom.probability;
    mean += atom.probability * atom.value;
    second += atom.probability * atom.value * atom.value;
  }
  if (total != 1)
    throw InvalidArgument("discrete_custom prior: probabilities sum to " + to_string(total) +
                          " != 1");
  if (mean != 0)
    throw InvalidArgument("discrete_custom prior: mean = " + to_string(mean) + " != 0");
  if (second != 1)
    throw InvalidArgument("discrete_custom prior: second moment = " + to_string(second) +
                          " != 1");
}

// Binomial convolution of two moment sequences of independent summands.
std::vector<Rational> convolve(const std::vector<Rational>& a, const std::vector<Rational>& b,
                               const std::vector<std::vector<Integer>>& pascal) {
  const unsigned kmax = static_cast<unsigned>(a.size()) - 1;
  std::vector<Rational> out(kmax + 1);
  Rational term;
  for (unsigned k = 0; k <= kmax; ++k) {
    Rational acc = 0;
    for (unsigned j = 0; j <= k; ++j) {
      if (sgn(a[j]) == 0 || sgn(b[k - j]) == 0) continue;
      term = a[j] * b[k - j];
      term *= pascal[k][j];
      acc += term;
    }
    out[k] = std::move(acc);
  }
  return out;
}

std::vector<SignedLog> convolve(const std::vector<SignedLog>& a, const std::vector<SignedLog>& b,
                                const std::vector<std::vector<double>>& log_binom) {
  const unsigned kmax = static_cast<unsigned>(a.size()) - 1;
  std::vector<SignedLog> out(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) {
    LogSumAccumulator acc;
    for (unsigned j = 0; j <= k; ++j) {
      if (a[j].is_zero() || b[k - j].is_zero()) continue;
      acc.add({a[j].sign * b[k - j].sign, log_binom[k][j] + a[j].log_mag + b[k - j].log_mag});
    }
    out[k] = acc.result();
  }
  return out;
}

// Moments of a sum of n i.i.d. copies, by doubling from the most significant bit.
template <class Vec, class Conv>
Vec power_by_doubling(const Vec& base, std::uint64_t n, Conv&& conv) {
  int top = 63;
  while (top > 0 && !((n >> top) & 1)) --top;
  Vec result = base;
  for (int bit = top - 1; bit >= 0; --bit) {
    result = conv(result, result);
    if ((n >> bit) & 1) result = conv(result, base);
  }
  return result;
}

}  // namespace

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::rademacher: return "rademacher";
    case PriorKind::sparse_rademacher: return "sparse_rademacher";
    case PriorKind::gaussian_iid: return "gaussian_iid";
    case PriorKind::discrete_custom: return "discrete_custom";
  }
  return "unknown";
}

PriorKind parse_prior_kind(std::string_view name) {
  if (name == "rademacher") return PriorKind::rademacher;
  if (name == "sparse_rademacher") return PriorKind::sparse_rademacher;
  if (name == "gaussian_iid" || name == "gaussian") return PriorKind::gaussian_iid;
  if (name == "discrete_custom") return PriorKind::discrete_custom;
  throw InvalidArgument("unknown prior kind \"" + std::string(name) + "\"");
}

std::string_view to_string(ArithmeticMode mode) {
  return mode == ArithmeticMode::exact ? "exact" : "log_space";
}

ModeRequest parse_mode_request(std::string_view name) {
  if (name == "auto" || name == "automatic") return ModeRequest::automatic;
  if (name == "exact") return ModeRequest::exact;
  if (name == "log_space" || name == "log") return ModeRequest::log_space;
  throw InvalidArgument("unknown arithmetic mode \"" + std::string(name) + "\"");
}

Prior::Prior(PriorSpec spec) : spec_(std::move(spec)) {
  switch (spec_.kind) {
    case PriorKind::rademacher:
      support_ = {{-1.0, -1, Rational(1), Rational(1, 2)}, {1.0, 1, Rational(1), Rational(1, 2)}};
      break;
    case PriorKind::sparse_rademacher: {
      const Rational& rho = spec_.density;
      if (rho <= 0 || rho > 1)
        throw InvalidArgument("sparse_rademacher prior: density rho = " + to_string(rho) +
                              " outside (0, 1]");
      const double mag = 1.0 / std::sqrt(to_double(rho));
      Rational sq = 1 / rho;
      Rational half = rho / 2;
      if (rho < 1) support_.push_back({0.0, 0, Rational(0), Rational(1 - rho)});
      support_.push_back({-mag, -1, sq, half});
      support_.push_back({mag, 1, sq, half});
      break;
    }
    case PriorKind::gaussian_iid:
      break;
    case PriorKind::discrete_custom: {
      validate_custom(spec_.atoms);
      std::map<Rational, Rational> merged;
      for (const auto& atom : spec_.atoms)
        if (atom.probability > 0) merged[atom.value] += atom.probability;
      for (const auto& [value, prob] : merged)
        support_.push_back({to_double(value), sgn(value), value * value, prob});
      for (const auto& [value, prob] : merged) {
        auto mirror = merged.find(Rational(-value));
        if (mirror == merged.end() || mirror->second != prob) {
          sign_symmetric_ = false;
          break;
        }
      }
      break;
    }
  }
  double running = 0.0;
  for (const auto& point : support_) {
    running += to_double(point.probability);
    cumulative_.push_back(running);
  }
}

Rational Prior::moment(unsigned k) const {
  if (k == 0) return 1;
  switch (spec_.kind) {
    case PriorKind::rademacher:
      return k % 2 == 0 ? 1 : 0;
    case PriorKind::sparse_rademacher:
      // rho * rho^{-k/2} = rho^{1 - k/2}
      if (k % 2 == 1) return 0;
      return 1 / pow(spec_.density, k / 2 - 1);
    case PriorKind::gaussian_iid:
      return Rational(gaussian_moment(k));
    case PriorKind::discrete_custom: {
      Rational acc = 0;
      for (const auto& atom : spec_.atoms) acc += atom.probability * pow(atom.value, k);
      return acc;
    }
  }
  return 0;
}

std::vector<Rational> Prior::moments(unsigned kmax) const {
  std::vector<Rational> out;
  out.reserve(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) out.push_back(moment(k));
  return out;
}

const std::vector<SupportPoint>& Prior::support() const {
  if (!is_discrete()) throw Unsupported("gaussian_iid prior has continuous support");
  return support_;
}

double Prior::sample(Philox& rng) const {
  if (!is_discrete()) return rng.normal();
  double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = std::min<std::size_t>(it - cumulative_.begin(), support_.size() - 1);
  return support_[idx].value;
}

std::string Prior::describe() const {
  std::string out(to_string(spec_.kind));
  if (spec_.kind == PriorKind::sparse_rademacher) out += "(rho=" + to_string(spec_.density) + ")";
  if (spec_.kind == PriorKind::discrete_custom) {
    out += "{";
    for (std::size_t i = 0; i < spec_.atoms.size(); ++i) {
      if (i) out += ", ";
      out += to_string(spec_.atoms[i].value) + ":" + to_string(spec_.atoms[i].probability);
    }
    out += "}";
  }
  return out;
}

Prior make_prior(const PriorSpec& spec) { return Prior(spec); }

std::vector<Rational> entrywise_overlap_moments(const Prior& prior, unsigned kmax) {
  std::vector<Rational> mu;
  mu.reserve(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) {
    Rational m = prior.moment(k);
    mu.push_back(m * m);
  }
  return mu;
}

std::vector<std::pair<Rational, Rational>> entrywise_overlap_distribution(const Prior& prior) {
  const auto& support = prior.support();
  std::map<Rational, Rational> law;
  for (const auto& a : support)
    for (const auto& b : support) {
      Rational value = 0;
      if (a.sign != 0 && b.sign != 0) value = a.sign * b.sign * exact_sqrt(a.square * b.square);
      law[value] += a.probability * b.probability;
    }
  return {law.begin(), law.end()};
}

MomentTable MomentTable::exact(std::uint64_t n, std::vector<Rational> values) {
  MomentTable t;
  t.n_ = n;
  t.mode_ = ArithmeticMode::exact;
  t.logs_.reserve(values.size());
  for (const auto& v : values) t.logs_.push_back(SignedLog::from_log(log_abs(v), sgn(v)));
  t.exact_ = std::move(values);
  return t;
}

MomentTable MomentTable::log_space(std::uint64_t n, std::vector<SignedLog> values) {
  MomentTable t;
  t.n_ = n;
  t.mode_ = ArithmeticMode::log_space;
  t.logs_ = std::move(values);
  return t;
}

const Rational& MomentTable::exact_value(unsigned k) const {
  if (mode_ != ArithmeticMode::exact) throw Unsupported("moment table is in log-space mode");
  return exact_.at(k);
}

ArithmeticMode resolve_mode(const Prior& prior, std::uint64_t n, unsigned kmax,
                            ModeRequest request) {
  switch (request) {
    case ModeRequest::exact:
      if (n > kExactHardLimit || n * std::max(kmax, 1u) > kExactHardLimit)
        throw CapExceeded("exact moments: n*kmax = " + std::to_string(n) + "*" + std::to_string(kmax) +
                          " exceeds " + std::to_string(kExactHardLimit));
      return ArithmeticMode::exact;
    case ModeRequest::log_space: return ArithmeticMode::log_space;
    case ModeRequest::automatic: break;
  }
  const bool small = n <= kExactWorkLimit && n * std::max(kmax, 1u) <= kExactWorkLimit;
  return prior.is_discrete() && small ? ArithmeticMode::exact : ArithmeticMode::log_space;
}

MomentTable overlap_moments(const Prior& prior, std::uint64_t n, unsigned kmax,
                            ModeRequest request) {
  if (n == 0) throw InvalidArgument("overlap_moments: n must be >= 1");
  const std::vector<Rational> mu = entrywise_overlap_moments(prior, kmax);
  const ArithmeticMode mode = resolve_mode(prior, n, kmax, request);

  if (mode == ArithmeticMode::exact) {
    const auto pascal = pascal_triangle(kmax);
    auto conv = [&](const auto& a, const auto& b) { return convolve(a, b, pascal); };
    return MomentTable::exact(n, power_by_doubling(mu, n, conv));
  }

  std::vector<std::vector<double>> log_binom(kmax + 1);
  for (unsigned k = 0; k <= kmax; ++k) {
    log_binom[k].resize(k + 1);
    for (unsigned j = 0; j <= k; ++j)
      log_binom[k][j] = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
  }
  std::vector<SignedLog> base;
  base.reserve(kmax + 1);
  for (const auto& m : mu) base.push_back(SignedLog::from_log(log_abs(m), sgn(m)));
  auto conv = [&](const auto& a, const auto& b) { return convolve(a, b, log_binom); };
  return MomentTable::log_space(n, power_by_doubling(base, n, conv));
}

std::vector<double> sample_spike(const Prior& prior, std::size_t n, Philox& rng) {
  std::vector<double> x(n);
  for (auto& v : x) v = prior.sample(rng);
  return x;
}

std::vector<double> sample_spike(const Prior& prior, std::size_t n, std::uint64_t seed) {
  Philox rng(seed, kStreamSpike);
  return sample_spike(prior, n, rng);
}

std::vector<SupportVector> enumerate_support(const Prior& prior, std::size_t n,
                                             std::uint64_t cap) {
  if (!prior.is_discrete())
    throw Unsupported("enumerate_support: gaussian_iid prior has continuous support");
  const auto& support = prior.support();
  const std::size_t s = support.size();
  if (s > 255) throw CapExceeded("enumerate_support: more than 255 atoms");
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (count > cap / s)
      throw CapExceeded("enumerate_support: " + std::to_string(s) + "^" + std::to_string(n) +
                        " states exceed cap " + std::to_string(cap));
    count *= s;
  }

  std::vector<SupportVector> out;
  out.reserve(count);
  std::vector<std::uint8_t> digits(n, 0);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    SupportVector v;
    v.x.resize(n);
    v.atom = digits;
    v.probability = 1;
    for (std::size_t i = 0; i < n; ++i) {
      v.x[i] = support[digits[i]].value;
      v.probability *= support[digits[i]].probability;
    }
    out.push_back(std::move(v));
    for (std::size_t i = n; i-- > 0;) {
      if (++digits[i] < s) break;
      digits[i] = 0;
    }
  }
  return out;
}

}  // namespace lowdeg
