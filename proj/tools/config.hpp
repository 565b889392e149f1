#pragma once

// Experiment settings: a TOML file plus command-line overrides.
//
// Every value is kept as text so rationals survive the round trip ("9/10"
// stays 9/10). Lookups for command `c` try the flag first, then `c.key` in the
// file, then the top-level `key`. Each lookup is recorded together with the
// value it resolved to, which is what the provenance block echoes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowdeg/priors.hpp"
#include "lowdeg/rational.hpp"

namespace lowdeg::cli {

/// Invalid configuration; the message names the field and where it came from.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Settings {
 public:
  explicit Settings(std::string command) : command_(std::move(command)) {}

  /// Reads a TOML file. Unknown fields are rejected with their line number.
  void load_file(const std::filesystem::path& path);
  void set_flag(const std::string& key, std::vector<std::string> values);

  bool has(const std::string& key) const;

  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> list(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<std::uint64_t> u64_list(const std::string& key) const;
  double real(const std::string& key, double fallback) const;
  Rational rational(const std::string& key) const;
  std::vector<Rational> rational_list(const std::string& key) const;
  bool boolean(const std::string& key, bool fallback) const;

  /// The prior from prior.kind, prior.rho and prior.atoms (default rademacher).
  PriorSpec prior() const;

  /// Sorted "key = value" lines of every resolved lookup except `exclude`.
  std::string canonical(const std::set<std::string>& exclude) const;
  const std::map<std::string, std::string>& resolved() const { return resolved_; }
  const std::string& command() const { return command_; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::vector<std::string> values;
    bool is_list = false;
    std::string origin;
  };

  const Entry* find(const std::string& key) const;
  const Entry& require(const std::string& key) const;
  void remember(const std::string& key, const std::string& value) const;

  std::string command_;
  std::map<std::string, Entry> file_;
  std::map<std::string, Entry> flags_;
  mutable std::map<std::string, std::string> resolved_;
};

/// Keys every command understands, for unknown-field diagnostics.
const std::set<std::string>& known_keys();
const std::set<std::string>& command_names();

/// "rademacher", "sparse_rademacher:1/4", "gaussian_iid" or
/// "discrete_custom:-2@1/5,1/2@4/5" as flag values for prior.kind/rho/atoms.
std::map<std::string, std::vector<std::string>> prior_flag(const std::string& text);

}  // namespace lowdeg::cli
