#pragma once

// Probabilists' Hermite polynomials, Gauss-Hermite quadrature, and the
// Hermite-basis expansion of the projected likelihood ratio.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lowdeg/model.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg {

/// h_k in the monomial basis: coeffs[j] multiplies x^j. Exact integers.
struct HermitePoly {
  unsigned degree = 0;
  std::vector<Integer> coeffs;
  Integer norm_sq;  // k!, so that h_k / sqrt(k!) is normalized

  double operator()(double x) const;
};

/// Coefficients from h_0 = 1, h_{k+1} = x h_k - h_k'.
HermitePoly hermite_coeffs(unsigned k);

/// h_k(y). Uses the exact monomial coefficients for k <= 30 and the value
/// recurrence h_{k+1} = y h_k - k h_{k-1} above that.
double hermite_eval(unsigned k, double y);
/// h_k(y) / sqrt(k!).
double hermite_eval_normalized(unsigned k, double y);

/// h_0(y), ..., h_kmax(y) by the value recurrence.
std::vector<double> hermite_values(unsigned kmax, double y);

/// Gauss-Hermite rule for E_{y ~ N(0,1)}[f(y)]; weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

inline constexpr unsigned kDefaultQuadraturePoints = 64;

/// Nodes from the Jacobi matrix eigenvalues, polished by Newton steps on the
/// normalized recurrence; weights 1 / (m hhat_{m-1}(x_i)^2). Cached per size.
const QuadratureRule& gauss_hermite_rule(unsigned points = kDefaultQuadraturePoints);

/// |E_{y ~ N(mu,1)} h_k(y) - mu^k| by quadrature.
double check_translation_identity(unsigned k, double mu,
                                  unsigned points = kDefaultQuadraturePoints);

/// Smooth test functions with closed-form derivatives of every order.
struct TestFunction {
  enum class Kind { polynomial, exponential, cosine };
  Kind kind = Kind::polynomial;
  std::vector<double> coeffs;  // polynomial: coeffs[j] x^j
  double rate = 1.0;           // exponential exp(rate y), cosine cos(rate y)

  static TestFunction polynomial(std::vector<double> c) { return {Kind::polynomial, std::move(c), 1.0}; }
  static TestFunction exponential(double t) { return {Kind::exponential, {}, t}; }
  static TestFunction cosine(double w) { return {Kind::cosine, {}, w}; }

  double derivative(unsigned order, double y) const;
  double operator()(double y) const { return derivative(0, y); }
  std::string describe() const;
};

/// |E[h_k(y) f(y)] - E[f^{(k)}(y)]| under N(0,1), by quadrature.
double check_ibp_identity(unsigned k, const TestFunction& f,
                          unsigned points = kDefaultQuadraturePoints);

/// |exp(xy - x^2/2) - sum_{k<=K} x^k h_k(y) / k!|.
double check_generating_function(double x, double y, unsigned K);

/// |E[hhat_j(y) hhat_k(y)] - [j == k]| under N(0,1), by quadrature.
double check_orthonormality(unsigned j, unsigned k, unsigned points = kDefaultQuadraturePoints);

/// One residual of the identity suite.
struct IdentityResidual {
  std::string family;  // orthonormality, translation, generating_function, integration_by_parts
  std::string label;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Orthonormality for j, k <= 12; translation for k <= 10 and mu in {0, 0.5, 1, 2};
/// generating-function partial sums with K = 60 on |x| <= 2, |y| <= 3;
/// integration by parts for k <= 8 against polynomial, exponential and
/// cosine test functions.
std::vector<IdentityResidual> hermite_identity_suite(unsigned points = kDefaultQuadraturePoints);

/// Sparse multi-index over coordinates 0..N-1 with strictly positive exponents,
/// sorted by coordinate.
struct MultiIndex {
  std::vector<std::pair<std::uint64_t, unsigned>> entries;

  unsigned degree() const;
  bool empty() const { return entries.empty(); }
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

inline constexpr std::uint64_t kDefaultMultiIndexCap = 1'000'000;

/// C(N + D, D), the number of multi-indices with |alpha| <= D.
Integer multi_index_count(std::uint64_t N, unsigned D);

/// Streams every alpha with |alpha| <= D exactly once in graded order:
/// by degree, then lexicographically decreasing exponent vectors
/// (x_1^d first). Restartable; independent instances share nothing.
class MultiIndexEnumerator {
 public:
  /// Throws CapExceeded when C(N + D, D) > cap.
  MultiIndexEnumerator(std::uint64_t N, unsigned D, std::uint64_t cap = kDefaultMultiIndexCap);

  bool next(MultiIndex& out);
  std::uint64_t count() const { return count_; }

 private:
  bool advance();

  std::uint64_t N_;
  unsigned D_;
  std::uint64_t count_;
  unsigned degree_ = 0;
  bool started_ = false;
  bool done_ = false;
  std::vector<unsigned> dense_;
};

std::vector<MultiIndex> enumerate_multi_indices(std::uint64_t N, unsigned D,
                                                std::uint64_t cap = kDefaultMultiIndexCap);

/// Flat row-major coordinate I of an order-p tensor back to its p indices.
std::vector<std::uint64_t> tensor_index(std::uint64_t flat, unsigned p, std::uint64_t n);

/// E_x[prod_I (x^{(x)p})_I^{alpha_I}] = prod_i E[x_i^{e_i}], with e_i counting
/// how often coordinate i occurs across the tensor indices of alpha.
Rational mixed_prior_moment(const ModelSpec& model, const MultiIndex& alpha);

/// <L_n, H_alpha> = E_{X ~ P}[prod_I X_I^{alpha_I}] = lambda^{|alpha|} * mixed moment.
double ldlr_coefficient(const ModelSpec& model, const MultiIndex& alpha);

/// L^{<=D} as an explicit polynomial: sum over |alpha| <= D of
/// <L, H_alpha> / prod(alpha_i!) * H_alpha(Y). Zero coefficients are dropped.
class LowDegreeLikelihood {
 public:
  LowDegreeLikelihood(const ModelSpec& model, unsigned D,
                      std::uint64_t cap = kDefaultMultiIndexCap);

  double operator()(std::span<const double> Y) const;
  /// sum of <L, H_alpha>^2 / prod(alpha_i!) over the retained terms.
  double norm_sq() const;

  std::size_t size() const { return terms_.size(); }
  unsigned degree() const { return D_; }
  std::uint64_t dimension() const { return N_; }

 private:
  struct Term {
    MultiIndex alpha;
    double coefficient;    // <L, H_alpha> / prod(alpha_i!)
    double factorial_prod;
  };
  std::uint64_t N_;
  unsigned D_;
  std::vector<Term> terms_;
};

/// L^{<=D}(Y) for one observation; Y has n^p entries in row-major order.
double ldlr_evaluate(const ModelSpec& model, unsigned D, std::span<const double> Y,
                     std::uint64_t cap = kDefaultMultiIndexCap);

}  // namespace lowdeg
