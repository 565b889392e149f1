#include "lowdeg/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "lowdeg/error.hpp"

namespace lowdeg {
namespace {

constexpr unsigned kMonomialEvalLimit = 30;

// hhat_0..hhat_m at x via hhat_{k+1} = (x hhat_k - sqrt(k) hhat_{k-1}) / sqrt(k+1).
std::pair<double, double> normalized_pair(unsigned m, double x) {
  double prev = 0.0, cur = 1.0;
  for (unsigned k = 0; k < m; ++k) {
    double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev};  // hhat_m, hhat_{m-1}
}

QuadratureRule build_rule(unsigned m) {
  if (m == 0) throw InvalidArgument("gauss_hermite_rule: need at least one node");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
  for (unsigned k = 1; k < m; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (unsigned i = 0; i < m; ++i) {
    double x = solver.eigenvalues()[i];
    for (int it = 0; it < 4; ++it) {
      auto [hm, hm1] = normalized_pair(m, x);
      double deriv = std::sqrt(static_cast<double>(m)) * hm1;
      if (deriv == 0.0) break;
      x -= hm / deriv;
    }
    auto [hm, hm1] = normalized_pair(m, x);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (m * hm1 * hm1);
  }
  // Symmetrize against rounding so odd moments vanish to the last bit.
  for (unsigned i = 0; i < m / 2; ++i) {
    unsigned j = m - 1 - i;
    double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

}  // namespace

double HermitePoly::operator()(double x) const {
  double acc = 0.0;
  for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * x + coeffs[j].get_d();
  return acc;
}

HermitePoly hermite_coeffs(unsigned k) {
  std::vector<Integer> cur{1};
  for (unsigned d = 0; d < k; ++d) {
    std::vector<Integer> next(cur.size() + 1, 0);
    for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] += cur[j];  // x h
    for (std::size_t j = 1; j < cur.size(); ++j)
      next[j - 1] -= cur[j] * static_cast<unsigned long>(j);  // - h'
    cur = std::move(next);
  }
  return {k, std::move(cur), factorial(k)};
}

std::vector<double> hermite_values(unsigned kmax, double y) {
  std::vector<double> h(kmax + 1);
  h[0] = 1.0;
  if (kmax >= 1) h[1] = y;
  for (unsigned k = 1; k < kmax; ++k) h[k + 1] = y * h[k] - k * h[k - 1];
  return h;
}

double hermite_eval(unsigned k, double y) {
  if (k <= kMonomialEvalLimit) return hermite_coeffs(k)(y);
  return hermite_values(k, y).back();
}

double hermite_eval_normalized(unsigned k, double y) {
  if (k <= kMonomialEvalLimit) return hermite_eval(k, y) / std::sqrt(factorial(k).get_d());
  return normalized_pair(k, y).first;
}

const QuadratureRule& gauss_hermite_rule(unsigned points) {
  static std::mutex mutex;
  static std::map<unsigned, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[points];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_rule(points));
  return *slot;
}

double check_translation_identity(unsigned k, double mu, unsigned points) {
  const auto& rule = gauss_hermite_rule(points);
  const HermitePoly h = hermite_coeffs(k);
  double estimate = rule.expect([&](double y) { return h(y + mu); });
  return std::fabs(estimate - std::pow(mu, static_cast<int>(k)));
}

double TestFunction::derivative(unsigned order, double y) const {
  switch (kind) {
    case Kind::polynomial: {
      double acc = 0.0;
      for (std::size_t j = coeffs.size(); j-- > order;) {
        double falling = 1.0;
        for (unsigned r = 0; r < order; ++r) falling *= static_cast<double>(j - r);
        acc = acc * y + coeffs[j] * falling;
      }
      return acc;
    }
    case Kind::exponential:
      return std::pow(rate, static_cast<int>(order)) * std::exp(rate * y);
    case Kind::cosine:
      return std::pow(rate, static_cast<int>(order)) *
             std::cos(rate * y + order * std::numbers::pi / 2.0);
  }
  return 0.0;
}

std::string TestFunction::describe() const {
  switch (kind) {
    case Kind::polynomial: {
      std::string out = "poly[";
      for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (j) out += ",";
        out += std::to_string(coeffs[j]);
      }
      return out + "]";
    }
    case Kind::exponential: return "exp(" + std::to_string(rate) + "*y)";
    case Kind::cosine: return "cos(" + std::to_string(rate) + "*y)";
  }
  return "?";
}

double check_ibp_identity(unsigned k, const TestFunction& f, unsigned points) {
  const auto& rule = gauss_hermite_rule(points);
  const HermitePoly h = hermite_coeffs(k);
  double lhs = rule.expect([&](double y) { return h(y) * f(y); });
  double rhs = rule.expect([&](double y) { return f.derivative(k, y); });
  return std::fabs(lhs - rhs);
}

double check_generating_function(double x, double y, unsigned K) {
  // g_k = x^k h_k(y) / k!, g_{k+1} = (x y g_k - x^2 g_{k-1}) / (k + 1)
  double prev = 0.0, cur = 1.0, partial = 1.0;
  for (unsigned k = 0; k < K; ++k) {
    double next = (x * y * cur - x * x * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    partial += cur;
  }
  return std::fabs(std::exp(x * y - 0.5 * x * x) - partial);
}

double check_orthonormality(unsigned j, unsigned k, unsigned points) {
  const auto& rule = gauss_hermite_rule(points);
  const unsigned top = std::max(j, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto values = hermite_values(top, rule.nodes[i]);
    acc += rule.weights[i] * values[j] * values[k];
  }
  const double norm = std::sqrt(factorial(j).get_d() * factorial(k).get_d());
  return std::fabs(acc / norm - (j == k ? 1.0 : 0.0));
}

std::vector<IdentityResidual> hermite_identity_suite(unsigned points) {
  std::vector<IdentityResidual> out;
  auto push = [&](std::string family, std::string label, double residual, double tol) {
    out.push_back({std::move(family), std::move(label), residual, tol, residual < tol});
  };
  for (unsigned j = 0; j <= 12; ++j)
    for (unsigned k = 0; k <= 12; ++k)
      push("orthonormality", "j=" + std::to_string(j) + " k=" + std::to_string(k),
           check_orthonormality(j, k, points), 1e-10);
  for (double mu : {0.0, 0.5, 1.0, 2.0})
    for (unsigned k = 0; k <= 10; ++k)
      push("translation", "k=" + std::to_string(k) + " mu=" + std::to_string(mu),
           check_translation_identity(k, mu, points), 1e-8);
  for (int xi = -4; xi <= 4; ++xi)
    for (int yi = -6; yi <= 6; ++yi) {
      const double x = 0.5 * xi, y = 0.5 * yi;
      push("generating_function", "x=" + std::to_string(x) + " y=" + std::to_string(y),
           check_generating_function(x, y, 60), 1e-9);
    }
  const std::vector<TestFunction> fs = {
      TestFunction::polynomial({1.0, -2.0, 0.5, 0.0, 3.0, -1.0, 0.25, 0.0, 0.125}),
      TestFunction::exponential(0.5), TestFunction::exponential(-1.25),
      TestFunction::cosine(1.3)};
  for (const auto& f : fs)
    for (unsigned k = 0; k <= 8; ++k) {
      const auto& rule = gauss_hermite_rule(points);
      const double scale = std::max(1.0, std::fabs(rule.expect([&](double y) { return f.derivative(k, y); })));
      push("integration_by_parts", "k=" + std::to_string(k) + " f=" + f.describe(),
           check_ibp_identity(k, f, points) / scale, 1e-10);
    }
  return out;
}

unsigned MultiIndex::degree() const {
  unsigned d = 0;
  for (const auto& [coord, exp] : entries) d += exp;
  return d;
}

Integer multi_index_count(std::uint64_t N, unsigned D) {
  Integer top = Integer(static_cast<unsigned long>(N)) + D;
  Integer out;
  mpz_bin_ui(out.get_mpz_t(), top.get_mpz_t(), D);
  return out;
}

MultiIndexEnumerator::MultiIndexEnumerator(std::uint64_t N, unsigned D, std::uint64_t cap)
    : N_(N), D_(D) {
  Integer total = multi_index_count(N, D);
  if (total > Integer(static_cast<unsigned long>(cap)))
    throw CapExceeded("multi-index enumeration: C(N+D, D) = " + total.get_str() +
                      " indices exceed cap " + std::to_string(cap) + " (N=" + std::to_string(N) +
                      ", D=" + std::to_string(D) + ")");
  count_ = total.get_ui();
  dense_.assign(N_, 0);
}

bool MultiIndexEnumerator::advance() {
  if (!started_) {
    started_ = true;
    return true;  // alpha = 0
  }
  if (N_ == 0) return false;
  if (degree_ > 0) {
    // Next composition of degree_ in lexicographically decreasing order.
    unsigned tail = dense_[N_ - 1];
    dense_[N_ - 1] = 0;
    std::uint64_t i = N_ - 1;
    while (i > 0 && dense_[i - 1] == 0) --i;
    if (i > 0) {
      --dense_[i - 1];
      dense_[i] = tail + 1;
      return true;
    }
  }
  if (degree_ == D_) return false;
  ++degree_;
  std::fill(dense_.begin(), dense_.end(), 0u);
  dense_[0] = degree_;
  return true;
}

bool MultiIndexEnumerator::next(MultiIndex& out) {
  if (done_ || !advance()) {
    done_ = true;
    return false;
  }
  out.entries.clear();
  if (degree_ > 0)
    for (std::uint64_t i = 0; i < N_; ++i)
      if (dense_[i] > 0) out.entries.emplace_back(i, dense_[i]);
  return true;
}

std::vector<MultiIndex> enumerate_multi_indices(std::uint64_t N, unsigned D, std::uint64_t cap) {
  MultiIndexEnumerator e(N, D, cap);
  std::vector<MultiIndex> out;
  out.reserve(e.count());
  MultiIndex alpha;
  while (e.next(alpha)) out.push_back(alpha);
  return out;
}

std::vector<std::uint64_t> tensor_index(std::uint64_t flat, unsigned p, std::uint64_t n) {
  std::vector<std::uint64_t> idx(p);
  for (unsigned r = p; r-- > 0;) {
    idx[r] = flat % n;
    flat /= n;
  }
  return idx;
}

Rational mixed_prior_moment(const ModelSpec& model, const MultiIndex& alpha) {
  std::map<std::uint64_t, unsigned> exponents;
  for (const auto& [coord, exp] : alpha.entries)
    for (auto i : tensor_index(coord, model.p(), model.n())) exponents[i] += exp;
  Rational acc = 1;
  for (const auto& [i, e] : exponents) {
    acc *= model.prior().moment(e);
    if (acc == 0) break;
  }
  return acc;
}

double ldlr_coefficient(const ModelSpec& model, const MultiIndex& alpha) {
  Rational m = mixed_prior_moment(model, alpha);
  if (m == 0) return 0.0;
  return std::pow(model.lambda(), static_cast<double>(alpha.degree())) * to_double(m);
}

LowDegreeLikelihood::LowDegreeLikelihood(const ModelSpec& model, unsigned D, std::uint64_t cap)
    : N_(model.dimension()), D_(D) {
  MultiIndexEnumerator e(N_, D, cap);
  MultiIndex alpha;
  while (e.next(alpha)) {
    double c = ldlr_coefficient(model, alpha);
    if (c == 0.0) continue;
    double fact = 1.0;
    for (const auto& [coord, exp] : alpha.entries) fact *= std::tgamma(exp + 1.0);
    terms_.push_back({alpha, c / fact, fact});
  }
}

double LowDegreeLikelihood::operator()(std::span<const double> Y) const {
  if (Y.size() != N_)
    throw InvalidArgument("ldlr_evaluate: observation has " + std::to_string(Y.size()) +
                          " entries, expected " + std::to_string(N_));
  std::vector<double> table(N_ * (D_ + 1));
  for (std::uint64_t i = 0; i < N_; ++i) {
    auto h = hermite_values(D_, Y[i]);
    std::copy(h.begin(), h.end(), table.begin() + i * (D_ + 1));
  }
  double acc = 0.0;
  for (const auto& term : terms_) {
    double value = term.coefficient;
    for (const auto& [coord, exp] : term.alpha.entries) value *= table[coord * (D_ + 1) + exp];
    acc += value;
  }
  return acc;
}

double LowDegreeLikelihood::norm_sq() const {
  double acc = 0.0;
  for (const auto& term : terms_) acc += term.coefficient * term.coefficient * term.factorial_prod;
  return acc;
}

double ldlr_evaluate(const ModelSpec& model, unsigned D, std::span<const double> Y,
                     std::uint64_t cap) {
  return LowDegreeLikelihood(model, D, cap)(Y);
}

}  // namespace lowdeg
