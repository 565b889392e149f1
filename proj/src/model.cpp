#include "lowdeg/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lowdeg/error.hpp"

namespace lowdeg {

ModelSpec::ModelSpec(unsigned p, std::uint64_t n, PriorSpec prior)
    : p_(p), n_(n), prior_(make_prior(prior)) {
  if (p < 1) throw InvalidArgument("model: tensor order p must be >= 1");
  if (n < 1) throw InvalidArgument("model: dimension n must be >= 1");
}

ModelSpec ModelSpec::with_lambda(unsigned p, std::uint64_t n, double lambda, PriorSpec prior) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("model: lambda must be finite and >= 0");
  ModelSpec m(p, n, std::move(prior));
  m.lambda_ = lambda;
  if (p == 2) m.lambda_hat_ = lambda * std::sqrt(2.0 * static_cast<double>(n));
  return m;
}

ModelSpec ModelSpec::with_lambda(unsigned p, std::uint64_t n, const Rational& lambda,
                                 PriorSpec prior) {
  if (lambda < 0) throw InvalidArgument("model: lambda must be >= 0");
  ModelSpec m(p, n, std::move(prior));
  m.lambda_ = to_double(lambda);
  m.lambda_sq_ = lambda * lambda;
  if (p == 2) m.lambda_hat_ = m.lambda_ * std::sqrt(2.0 * static_cast<double>(n));
  return m;
}

ModelSpec ModelSpec::with_lambda_hat(std::uint64_t n, double lambda_hat, PriorSpec prior) {
  if (!(lambda_hat >= 0.0) || !std::isfinite(lambda_hat))
    throw InvalidArgument("model: lambda_hat must be finite and >= 0");
  ModelSpec m(2, n, std::move(prior));
  m.lambda_ = lambda_hat / std::sqrt(2.0 * static_cast<double>(n));
  m.lambda_hat_ = lambda_hat;
  return m;
}

ModelSpec ModelSpec::with_lambda_hat(std::uint64_t n, const Rational& lambda_hat,
                                     PriorSpec prior) {
  ModelSpec m = with_lambda_hat(n, to_double(lambda_hat), std::move(prior));
  // lambda^2 = lambda_hat^2 / (2n)
  m.lambda_sq_ = lambda_hat * lambda_hat / Rational(2 * Integer(static_cast<unsigned long>(n)));
  return m;
}

std::uint64_t ModelSpec::dimension() const {
  std::uint64_t total = 1;
  for (unsigned r = 0; r < p_; ++r) {
    if (total > std::numeric_limits<std::uint64_t>::max() / n_)
      throw CapExceeded("model: n^p overflows");
    total *= n_;
  }
  return total;
}

ModelSpec ModelSpec::with_signal(double lambda) const {
  ModelSpec m = *this;
  if (!(lambda >= 0.0)) throw InvalidArgument("model: lambda must be >= 0");
  m.lambda_ = lambda;
  m.lambda_sq_.reset();
  m.lambda_hat_.reset();
  if (p_ == 2) m.lambda_hat_ = lambda * std::sqrt(2.0 * static_cast<double>(n_));
  return m;
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os << "p=" << p_ << " n=" << n_ << " lambda=" << lambda_;
  if (lambda_hat_) os << " lambda_hat=" << *lambda_hat_;
  os << " prior=" << prior_.describe();
  return os.str();
}

}  // namespace lowdeg
