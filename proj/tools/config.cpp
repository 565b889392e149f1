#include "config.hpp"

#include <toml.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include "lowdeg/error.hpp"

namespace lowdeg::cli {
namespace {

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string origin_of(const toml::node& node, const std::filesystem::path& path) {
  const auto& src = node.source();
  return path.filename().string() + " line " + std::to_string(src.begin.line);
}

std::string scalar_text(const toml::node& node, const std::string& key,
                        const std::filesystem::path& path) {
  if (auto s = node.as_string()) return s->get();
  if (auto i = node.as_integer()) return std::to_string(i->get());
  if (auto f = node.as_floating_point()) return number_text(f->get());
  if (auto b = node.as_boolean()) return b->get() ? "true" : "false";
  throw ConfigError("config error: field '" + key + "' (" + origin_of(node, path) +
                    "): expected a string, number or boolean");
}

std::string strip_command(const std::string& key) {
  auto dot = key.find('.');
  if (dot != std::string::npos && command_names().count(key.substr(0, dot))) return key.substr(dot + 1);
  return key;
}

}  // namespace

const std::set<std::string>& command_names() {
  static const std::set<std::string> names = {"ldlr-norm", "scan", "simulate", "pca-test",
                                              "error-rates", "hermite-check", "bounds-check",
                                              "oracle-verify"};
  return names;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "p", "n", "n_grid", "D", "schedule", "lambda", "lambda_hat", "prior.kind", "prior.rho",
      "prior.atoms", "mode", "trials", "seed", "output", "test", "alpha", "eta",
      "calibration_trials", "planted", "pair_cap", "multi_index_cap", "entry_cap",
      "classifier.diverging_log_floor", "classifier.bounded_log_ceiling",
      "classifier.bounded_slope", "points", "chernoff_n", "chernoff_eta", "chernoff_delta",
      "chernoff_trials", "bonami_polynomials", "bonami_trials", "crosscheck_trials",
      "max_n_hermite", "max_D_hermite", "max_n_pairs"};
  return keys;
}

void Settings::load_file(const std::filesystem::path& path) {
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError("config error: " + path.string() + " line " +
                      std::to_string(e.source().begin.line) + " column " +
                      std::to_string(e.source().begin.column) + ": " +
                      std::string(e.description()));
  }

  auto add = [&](const std::string& key, const toml::node& node) {
    const std::string bare = strip_command(key);
    if (!known_keys().count(bare))
      throw ConfigError("config error: unknown field '" + key + "' (" + origin_of(node, path) + ")");
    Entry e;
    e.origin = origin_of(node, path);
    if (auto arr = node.as_array()) {
      e.is_list = true;
      for (const auto& item : *arr) {
        if (auto pair = item.as_array()) {
          if (pair->size() != 2)
            throw ConfigError("config error: field '" + key + "' (" + origin_of(item, path) +
                              "): atoms are [value, probability] pairs");
          e.values.push_back(scalar_text(*pair->get(0), key, path) + "@" +
                             scalar_text(*pair->get(1), key, path));
        } else {
          e.values.push_back(scalar_text(item, key, path));
        }
      }
    } else {
      e.values.push_back(scalar_text(node, key, path));
    }
    file_[key] = std::move(e);
  };

  std::function<void(const toml::table&, const std::string&)> walk =
      [&](const toml::table& table, const std::string& prefix) {
        for (const auto& [k, node] : table) {
          const std::string key = prefix + std::string(k.str());
          if (auto sub = node.as_table()) {
            walk(*sub, key + ".");
          } else if (strip_command(key) == "prior" && node.is_string()) {
            add(key + ".kind", node);
          } else {
            add(key, node);
          }
        }
      };
  walk(root, "");
}

void Settings::set_flag(const std::string& key, std::vector<std::string> values) {
  Entry e;
  e.values = std::move(values);
  e.is_list = e.values.size() != 1;
  e.origin = "flag --" + key;
  for (auto& c : e.origin)
    if (c == '_') c = '-';
  flags_[key] = std::move(e);
}

const Settings::Entry* Settings::find(const std::string& key) const {
  if (auto it = flags_.find(key); it != flags_.end()) return &it->second;
  if (auto it = file_.find(command_ + "." + key); it != file_.end()) return &it->second;
  if (auto it = file_.find(key); it != file_.end()) return &it->second;
  return nullptr;
}

bool Settings::has(const std::string& key) const { return find(key) != nullptr; }

const Settings::Entry& Settings::require(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) throw ConfigError("config error: missing required field '" + key + "'");
  return *e;
}

void Settings::fail(const std::string& key, const std::string& message) const {
  const Entry* e = find(key);
  throw ConfigError("config error: field '" + key + "'" + (e ? " (" + e->origin + ")" : std::string()) +
                    ": " + message);
}

void Settings::remember(const std::string& key, const std::string& value) const {
  resolved_[key] = value;
}

std::string Settings::text(const std::string& key) const {
  const Entry& e = require(key);
  if (e.values.size() != 1) fail(key, "expected a single value");
  remember(key, e.values.front());
  return e.values.front();
}

std::string Settings::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) {
    remember(key, fallback);
    return fallback;
  }
  return text(key);
}

std::vector<std::string> Settings::list(const std::string& key) const {
  const Entry& e = require(key);
  std::string joined;
  for (std::size_t i = 0; i < e.values.size(); ++i) joined += (i ? "," : "") + e.values[i];
  remember(key, "[" + joined + "]");
  return e.values;
}

namespace {

std::uint64_t parse_u64(const Settings& s, const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    s.fail(key, "expected a nonnegative integer, got '" + v + "'");
  return out;
}

}  // namespace

std::uint64_t Settings::u64(const std::string& key) const { return parse_u64(*this, key, text(key)); }

std::uint64_t Settings::u64(const std::string& key, std::uint64_t fallback) const {
  return parse_u64(*this, key, text(key, std::to_string(fallback)));
}

std::vector<std::uint64_t> Settings::u64_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& v : list(key)) out.push_back(parse_u64(*this, key, v));
  return out;
}

double Settings::real(const std::string& key, double fallback) const {
  const std::string v = text(key, number_text(fallback));
  try {
    return to_double(parse_rational(v));
  } catch (const Error&) {
    if (v == "inf" || v == "+inf") return INFINITY;
    fail(key, "expected a number, got '" + v + "'");
  }
}

Rational Settings::rational(const std::string& key) const {
  const std::string v = text(key);
  try {
    return parse_rational(v);
  } catch (const Error& e) {
    fail(key, e.what());
  }
}

std::vector<Rational> Settings::rational_list(const std::string& key) const {
  std::vector<Rational> out;
  for (const auto& v : list(key)) {
    try {
      out.push_back(parse_rational(v));
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }
  return out;
}

bool Settings::boolean(const std::string& key, bool fallback) const {
  const std::string v = text(key, fallback ? "true" : "false");
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

PriorSpec Settings::prior() const {
  const std::string kind_text = text("prior.kind", "rademacher");
  PriorKind kind;
  try {
    kind = parse_prior_kind(kind_text);
  } catch (const Error& e) {
    fail("prior.kind", e.what());
  }
  PriorSpec spec;
  switch (kind) {
    case PriorKind::rademacher: spec = PriorSpec::rademacher(); break;
    case PriorKind::gaussian_iid: spec = PriorSpec::gaussian_iid(); break;
    case PriorKind::sparse_rademacher: spec = PriorSpec::sparse_rademacher(rational("prior.rho")); break;
    case PriorKind::discrete_custom: {
      std::vector<Atom> atoms;
      for (const auto& item : list("prior.atoms")) {
        auto at = item.find('@');
        if (at == std::string::npos) fail("prior.atoms", "atom '" + item + "' is not value@probability");
        try {
          atoms.push_back({parse_rational(item.substr(0, at)), parse_rational(item.substr(at + 1))});
        } catch (const Error& e) {
          fail("prior.atoms", e.what());
        }
      }
      spec = PriorSpec::discrete_custom(std::move(atoms));
      break;
    }
  }
  try {
    make_prior(spec);
  } catch (const Error& e) {
    fail("prior.kind", e.what());
  }
  return spec;
}

std::string Settings::canonical(const std::set<std::string>& exclude) const {
  std::ostringstream os;
  os << "command = " << command_ << "\n";
  for (const auto& [k, v] : resolved_)
    if (!exclude.count(k)) os << k << " = " << v << "\n";
  return os.str();
}

std::map<std::string, std::vector<std::string>> prior_flag(const std::string& text) {
  std::map<std::string, std::vector<std::string>> out;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  out["prior.kind"] = {kind};
  if (colon == std::string::npos) return out;
  const std::string rest = text.substr(colon + 1);
  if (kind == "sparse_rademacher") {
    out["prior.rho"] = {rest};
  } else if (kind == "discrete_custom") {
    std::vector<std::string> atoms;
    std::stringstream ss(rest);
    for (std::string item; std::getline(ss, item, ',');) atoms.push_back(item);
    out["prior.atoms"] = atoms;
  } else {
    throw ConfigError("config error: flag --prior: '" + kind + "' takes no parameters");
  }
  return out;
}

}  // namespace lowdeg::cli
