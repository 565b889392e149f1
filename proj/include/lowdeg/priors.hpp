#pragma once

// Spike priors and the moments of the replica overlap <x1, x2>.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lowdeg/logspace.hpp"
#include "lowdeg/rational.hpp"
#include "lowdeg/rng.hpp"

namespace lowdeg {

enum class PriorKind { rademacher, sparse_rademacher, gaussian_iid, discrete_custom };

std::string_view to_string(PriorKind kind);
PriorKind parse_prior_kind(std::string_view name);

struct Atom {
  Rational value;
  Rational probability;
};

/// Declarative description of an i.i.d. entrywise spike prior.
///  - rademacher: +-1 with probability 1/2 each
///  - sparse_rademacher: 0 w.p. 1-rho, +-1/sqrt(rho) w.p. rho/2 each
///  - gaussian_iid: N(0, 1)
///  - discrete_custom: finitely many rational atoms
struct PriorSpec {
  PriorKind kind = PriorKind::rademacher;
  Rational density{1};
  std::vector<Atom> atoms;

  static PriorSpec rademacher() { return {}; }
  static PriorSpec sparse_rademacher(Rational rho) {
    return {PriorKind::sparse_rademacher, std::move(rho), {}};
  }
  static PriorSpec gaussian_iid() { return {PriorKind::gaussian_iid, Rational(1), {}}; }
  static PriorSpec discrete_custom(std::vector<Atom> atoms) {
    return {PriorKind::discrete_custom, Rational(1), std::move(atoms)};
  }
};

/// One atom of a discrete prior. `square` is value^2 as an exact rational,
/// which stays rational even when the value itself is +-1/sqrt(rho).
struct SupportPoint {
  double value = 0.0;
  int sign = 0;
  Rational square;
  Rational probability;
};

/// Validated prior. Entrywise moments E[x_i^k] are exact for every kind.
class Prior {
 public:
  explicit Prior(PriorSpec spec);

  const PriorSpec& spec() const { return spec_; }
  PriorKind kind() const { return spec_.kind; }
  bool is_discrete() const { return spec_.kind != PriorKind::gaussian_iid; }
  bool is_sign_symmetric() const { return sign_symmetric_; }

  /// E[pi^k] for a single entry pi.
  Rational moment(unsigned k) const;
  std::vector<Rational> moments(unsigned kmax) const;

  /// Atoms with positive probability. Throws Unsupported for gaussian_iid.
  const std::vector<SupportPoint>& support() const;

  double sample(Philox& rng) const;
  std::string describe() const;

 private:
  PriorSpec spec_;
  bool sign_symmetric_ = true;
  std::vector<SupportPoint> support_;
  std::vector<double> cumulative_;
};

/// Validates `spec`; throws InvalidArgument naming the violated invariant.
Prior make_prior(const PriorSpec& spec);

/// mu_k = E[(pi pi')^k] = (E[pi^k])^2 for k = 0..kmax.
std::vector<Rational> entrywise_overlap_moments(const Prior& prior, unsigned kmax);

/// Exact law of pi*pi' for a discrete prior, sorted by value.
std::vector<std::pair<Rational, Rational>> entrywise_overlap_distribution(const Prior& prior);

enum class ArithmeticMode { exact, log_space };
enum class ModeRequest { automatic, exact, log_space };

std::string_view to_string(ArithmeticMode mode);
ModeRequest parse_mode_request(std::string_view name);

/// Automatic mode uses exact rationals up to this many n*kmax term-operations.
inline constexpr std::uint64_t kExactWorkLimit = 1'000'000;
/// An explicit exact request beyond this many term-operations throws CapExceeded.
inline constexpr std::uint64_t kExactHardLimit = 100'000'000;

/// Moments E[S^k], k = 0..kmax, of the overlap S = <x1, x2> for dimension n.
class MomentTable {
 public:
  static MomentTable exact(std::uint64_t n, std::vector<Rational> values);
  static MomentTable log_space(std::uint64_t n, std::vector<SignedLog> values);

  std::uint64_t n() const { return n_; }
  unsigned kmax() const { return static_cast<unsigned>(logs_.size()) - 1; }
  ArithmeticMode mode() const { return mode_; }

  SignedLog log_value(unsigned k) const { return logs_.at(k); }
  double value(unsigned k) const { return logs_.at(k).to_double(); }
  /// Throws Unsupported in log-space mode.
  const Rational& exact_value(unsigned k) const;

 private:
  std::uint64_t n_ = 0;
  ArithmeticMode mode_ = ArithmeticMode::exact;
  std::vector<Rational> exact_;
  std::vector<SignedLog> logs_;
};

/// Computes the table by binomial convolution of the entrywise law, doubling
/// on n (O(log n * kmax^2) operations).
MomentTable overlap_moments(const Prior& prior, std::uint64_t n, unsigned kmax,
                            ModeRequest request = ModeRequest::automatic);

ArithmeticMode resolve_mode(const Prior& prior, std::uint64_t n, unsigned kmax,
                            ModeRequest request);

std::vector<double> sample_spike(const Prior& prior, std::size_t n, std::uint64_t seed);
std::vector<double> sample_spike(const Prior& prior, std::size_t n, Philox& rng);

struct SupportVector {
  std::vector<double> x;
  std::vector<std::uint8_t> atom;  // index into prior.support() per coordinate
  Rational probability;
};

inline constexpr std::uint64_t kDefaultSupportCap = std::uint64_t{1} << 20;

/// Every spike vector of length n with its exact probability.
/// Throws Unsupported for gaussian_iid and CapExceeded when |support|^n > cap.
std::vector<SupportVector> enumerate_support(const Prior& prior, std::size_t n,
                                             std::uint64_t cap = kDefaultSupportCap);

}  // namespace lowdeg
