#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lowdeg/priors.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg {

/// Planted-vs-null problem Y = lambda x^{(x)p} + Z against Y = Z.
///
/// The signal is stored canonically as lambda. For p = 2 it may be given as
/// lambda_hat = lambda sqrt(2n); lambda_hat is then kept only for display.
/// When lambda (or lambda_hat) is rational, lambda^2 is kept exactly so the
/// exact-arithmetic paths can use it.
class ModelSpec {
 public:
  static ModelSpec with_lambda(unsigned p, std::uint64_t n, double lambda, PriorSpec prior);
  static ModelSpec with_lambda(unsigned p, std::uint64_t n, const Rational& lambda,
                               PriorSpec prior);
  static ModelSpec with_lambda_hat(std::uint64_t n, double lambda_hat, PriorSpec prior);
  static ModelSpec with_lambda_hat(std::uint64_t n, const Rational& lambda_hat, PriorSpec prior);

  unsigned p() const { return p_; }
  std::uint64_t n() const { return n_; }
  double lambda() const { return lambda_; }
  const std::optional<Rational>& lambda_sq_exact() const { return lambda_sq_; }
  std::optional<double> lambda_hat() const { return lambda_hat_; }
  const Prior& prior() const { return prior_; }

  /// n^p, the number of observed coordinates. Throws CapExceeded on overflow.
  std::uint64_t dimension() const;

  /// Same model with a different signal strength.
  ModelSpec with_signal(double lambda) const;

  std::string describe() const;

 private:
  ModelSpec(unsigned p, std::uint64_t n, PriorSpec prior);

  unsigned p_;
  std::uint64_t n_;
  Prior prior_;
  double lambda_ = 0.0;
  std::optional<Rational> lambda_sq_;
  std::optional<double> lambda_hat_;
};

}  // namespace lowdeg
