// lowdeg: command-line runner for low-degree likelihood ratio experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 some grid points or checks
// failed, 4 internal error (or every grid point failed).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "lowdeg/bounds.hpp"
#include "lowdeg/detect.hpp"
#include "lowdeg/error.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/io.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/models.hpp"
#include "lowdeg/oracles.hpp"
#include "lowdeg/parallel.hpp"
#include "reports.hpp"

namespace lowdeg::cli {
namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kPartial = 3, kInternal = 4 };

struct FlagSpec {
  std::string key;
  std::string help;
  bool list = false;
};

const std::map<std::string, std::vector<FlagSpec>>& command_flags() {
  static const FlagSpec p{"p", "tensor order (2 = spiked Wigner)"};
  static const FlagSpec n{"n", "dimension"};
  static const FlagSpec D{"D", "degree bound"};
  static const FlagSpec lambda{"lambda", "signal strength, e.g. 3/10"};
  static const FlagSpec lambda_hat{"lambda_hat", "lambda sqrt(2n) for p = 2"};
  static const FlagSpec mode{"mode", "automatic | exact | log_space"};
  static const FlagSpec seed{"seed", "master seed"};
  static const FlagSpec trials{"trials", "Monte Carlo trials per hypothesis"};
  static const std::map<std::string, std::vector<FlagSpec>> flags = {
      {"ldlr-norm", {p, n, D, lambda, lambda_hat, mode}},
      {"scan",
       {p,
        {"n_grid", "comma-separated n values", true},
        {"schedule", "const:<c> | log | logpow:<eps> | pow:<delta>"},
        {"lambda", "comma-separated lambda values", true},
        {"lambda_hat", "comma-separated lambda_hat values (p = 2)", true},
        mode,
        {"classifier.diverging_log_floor", "log-norm floor for 'diverging'"},
        {"classifier.bounded_log_ceiling", "log-norm ceiling for 'bounded'"},
        {"classifier.bounded_slope", "slope limit for 'bounded'"}}},
      {"simulate",
       {p, n, lambda, lambda_hat, seed, {"planted", "true for the planted model"},
        {"entry_cap", "maximum tensor entries"}}},
      {"pca-test", {n, lambda_hat, trials, seed}},
      {"error-rates",
       {{"test", "pca | lr | ldlr | trace"}, p, n, D, lambda, lambda_hat, trials, seed,
        {"alpha", "null rejection level used to calibrate ldlr and trace"},
        {"eta", "explicit threshold (skips calibration)"},
        {"calibration_trials", "null samples for calibration"}}},
      {"hermite-check", {{"points", "quadrature nodes"}}},
      {"bounds-check",
       {seed, {"chernoff_n", "dimension for the local Chernoff check"},
        {"chernoff_eta", "eta"}, {"chernoff_delta", "t ranges over [0, delta n]"},
        {"chernoff_trials", "overlap samples"}, {"bonami_polynomials", "random polynomials per base"},
        {"bonami_trials", "Monte Carlo samples per polynomial"},
        {"crosscheck_trials", "samples for the trace statistic"}}},
      {"oracle-verify",
       {{"max_n_hermite", "largest n in the Hermite-sum comparison"},
        {"max_D_hermite", "largest D in the Hermite-sum comparison"},
        {"max_n_pairs", "largest n in the pair-enumeration comparison"}}},
  };
  return flags;
}

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_' || c == '.') c = '-';
  return "--" + key;
}

void emit(const Settings& s, const std::string& contents) {
  if (s.has("output")) {
    const std::filesystem::path path = s.text("output");
    atomic_write(path, contents);
    std::cerr << "wrote " << path.string() << "\n";
  } else {
    std::cout << contents;
  }
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::uint64_t required_seed(const Settings& s) {
  if (!s.has("seed")) s.fail("seed", "a seed is required; there is no implicit entropy source");
  return s.u64("seed");
}

unsigned order(const Settings& s) {
  const auto p = s.u64("p", 2);
  if (p < 2) s.fail("p", "tensor order must be >= 2");
  return static_cast<unsigned>(p);
}

ModelSpec build_model(const Settings& s) {
  const unsigned p = order(s);
  const std::uint64_t n = s.u64("n");
  if (n < 1) s.fail("n", "n must be >= 1");
  const PriorSpec prior = s.prior();
  const bool has_lambda = s.has("lambda"), has_hat = s.has("lambda_hat");
  if (has_lambda == has_hat) s.fail("lambda", "give exactly one of lambda and lambda_hat");
  if (has_hat) {
    if (p != 2) s.fail("lambda_hat", "lambda_hat is defined for p = 2 only");
    return ModelSpec::with_lambda_hat(n, s.rational("lambda_hat"), prior);
  }
  return ModelSpec::with_lambda(p, n, s.rational("lambda"), prior);
}

ModeRequest mode_request(const Settings& s) {
  const std::string m = s.text("mode", "automatic");
  try {
    return parse_mode_request(m);
  } catch (const Error& e) {
    s.fail("mode", e.what());
  }
}

int run_ldlr_norm(Settings& s) {
  const ModelSpec model = build_model(s);
  const auto D = s.u64("D");
  const LdlrResult r = ldlr_norm_sq(model, static_cast<unsigned>(D), mode_request(s));
  const TermRatios ratios = term_ratios(r);

  Json j;
  j["provenance"] = provenance(s);
  j["model"] = to_json(model);
  j["result"] = to_json(r);
  j["term_ratios"] = to_json(ratios);

  std::ostringstream os;
  os << "# lowdeg ldlr-norm version=" << version() << " config_hash=" << config_hash(s) << "\n";
  os << "model: " << model.describe() << "\n";
  os << "mode: " << to_string(r.mode) << "\n";
  os << "log_norm_sq: " << fmt("%.15g", r.log_norm_sq()) << "\n";
  if (r.exact_total) os << "exact_norm_sq: " << to_string(*r.exact_total) << "\n";
  os << "d\tlog|T_d|\tlog_cumulative\n";
  for (unsigned d = 0; d <= r.D; ++d) {
    os << d << "\t";
    if (r.skipped[d])
      os << "skipped";
    else if (r.terms[d].is_zero())
      os << "zero";
    else
      os << fmt("%.12g", r.terms[d].log_mag);
    os << "\t" << fmt("%.12g", r.cumulative_log[d]) << "\n";
  }
  std::cout << os.str();
  if (s.has("output")) emit(s, json_text(j));
  return kOk;
}

int run_scan(Settings& s) {
  ScanConfig cfg;
  cfg.p = order(s);
  cfg.prior = s.prior();
  if (!s.has("n_grid")) s.fail("n_grid", "missing required field");
  cfg.n_grid = s.u64_list("n_grid");
  if (cfg.n_grid.empty()) s.fail("n_grid", "n_grid must be nonempty");
  for (auto n : cfg.n_grid)
    if (n < 1) s.fail("n_grid", "every n must be >= 1");
  try {
    cfg.schedule = DegreeSchedule::parse(s.text("schedule", "log"));
  } catch (const Error& e) {
    s.fail("schedule", e.what());
  }
  const bool has_lambda = s.has("lambda"), has_hat = s.has("lambda_hat");
  if (has_lambda == has_hat) s.fail("lambda", "give exactly one of lambda and lambda_hat");
  cfg.signals_are_lambda_hat = has_hat;
  if (has_hat && cfg.p != 2) s.fail("lambda_hat", "lambda_hat is defined for p = 2 only");
  cfg.signals = s.rational_list(has_hat ? "lambda_hat" : "lambda");
  if (cfg.signals.empty()) s.fail(has_hat ? "lambda_hat" : "lambda", "signal grid must be nonempty");
  for (const auto& v : cfg.signals)
    if (v < 0) s.fail(has_hat ? "lambda_hat" : "lambda", "signals must be >= 0");
  cfg.mode = mode_request(s);
  cfg.rule.diverging_log_floor = s.real("classifier.diverging_log_floor", cfg.rule.diverging_log_floor);
  cfg.rule.bounded_log_ceiling = s.real("classifier.bounded_log_ceiling", cfg.rule.bounded_log_ceiling);
  cfg.rule.bounded_slope = s.real("classifier.bounded_slope", cfg.rule.bounded_slope);
  cfg.workers = default_workers();

  const ScanResult result = scan(cfg);

  std::ostringstream os;
  const Json prov = provenance(s);
  os << "# command: scan\n# version: " << version() << "\n# generator: " << kGeneratorId
     << "\n# config_hash: " << prov["config_hash"].get<std::string>() << "\n";
  for (const auto& [k, v] : prov["config"].items()) os << "# config: " << k << " = " << v.get<std::string>() << "\n";
  os << scan_to_csv(cfg, result);
  emit(s, os.str());

  for (const auto& sig : result.signals)
    std::cerr << (cfg.signals_are_lambda_hat ? "lambda_hat=" : "lambda=") << to_string(sig.signal)
              << " classification=" << to_string(sig.classification)
              << " slope=" << fmt("%.6g", sig.slope) << " sup_log_norm_sq=" << fmt("%.6g", sig.sup_log_norm_sq)
              << "\n";
  for (const auto& pt : result.points)
    if (!pt.error.empty()) std::cerr << "failed n=" << pt.n << " D=" << pt.D << ": " << pt.error << "\n";
  if (result.failures == 0) return kOk;
  return result.failures == result.points.size() ? kInternal : kPartial;
}

int run_simulate(Settings& s) {
  const std::uint64_t seed = required_seed(s);
  const bool planted = s.boolean("planted", true);
  const std::uint64_t cap = s.u64("entry_cap", kDefaultEntryCap);
  const unsigned workers = default_workers();

  Observation Y;
  Json model_json;
  if (planted) {
    const ModelSpec model = build_model(s);
    Y = sample_planted(model, seed, workers, cap).Y;
    model_json = to_json(model);
  } else {
    const unsigned p = order(s);
    const std::uint64_t n = s.u64("n");
    if (n < 1) s.fail("n", "n must be >= 1");
    Y = sample_null(p, n, seed, workers, cap);
    model_json = {{"p", p}, {"n", n}};
  }

  const std::string bytes = tensor_bytes(Y);
  std::filesystem::path out = s.has("output")
                                  ? std::filesystem::path(s.text("output"))
                                  : std::filesystem::path("simulate_p" + std::to_string(Y.p) + "_n" +
                                                          std::to_string(Y.n) + "_seed" +
                                                          std::to_string(seed) + ".bin");
  Json side;
  side["provenance"] = provenance(s);
  side["model"] = model_json;
  side["planted"] = planted;
  side["format"] = "LDLRTNSR header, u32 p, u32 n, little-endian float64 entries in row-major order";
  side["entries"] = Y.entries.size();
  side["tensor_fnv1a64"] = hex64(fnv1a64(bytes));
  if (Y.provenance.spike_hash)
    side["spike_fnv1a64"] = hex64(*Y.provenance.spike_hash);
  else
    side["spike_fnv1a64"] = nullptr;

  atomic_write(out, bytes);
  std::filesystem::path sidecar = out;
  sidecar += ".json";
  atomic_write(sidecar, json_text(side));
  std::cerr << "wrote " << out.string() << " and " << sidecar.string() << "\n";
  return kOk;
}

int run_pca_test(Settings& s) {
  const std::uint64_t seed = required_seed(s);
  if (!s.has("lambda_hat")) s.fail("lambda_hat", "missing required field");
  const ModelSpec model = build_model(s);
  const double lambda_hat = *model.lambda_hat();
  if (!(lambda_hat > 0)) s.fail("lambda_hat", "must be > 0");
  const auto trials = s.u64("trials", 100);
  if (trials < 1) s.fail("trials", "need at least one trial");

  HypothesisTest test{"pca", [&](const Observation& Y) { return pca_test(Y, lambda_hat).planted; }};
  const TestReport r = error_rates(test, model, trials, seed, default_workers());

  Json j;
  j["provenance"] = provenance(s);
  j["model"] = to_json(model);
  j["threshold"] = pca_threshold(lambda_hat);
  j["report"] = to_json(r);
  emit(s, json_text(j));
  return kOk;
}

int run_error_rates(Settings& s) {
  const std::uint64_t seed = required_seed(s);
  const std::string kind = s.text("test");
  const ModelSpec model = build_model(s);
  const auto trials = s.u64("trials", 200);
  if (trials < 1) s.fail("trials", "need at least one trial");
  const unsigned workers = default_workers();

  Json j;
  HypothesisTest test;
  test.id = kind;
  auto calibrate = [&](const Statistic& stat) {
    if (s.has("eta")) return s.real("eta", 0.0);
    const double alpha = s.real("alpha", 0.05);
    if (!(alpha >= 0 && alpha < 1)) s.fail("alpha", "alpha must lie in [0, 1)");
    const auto cal = s.u64("calibration_trials", trials);
    if (cal < 1) s.fail("calibration_trials", "need at least one trial");
    j["calibrated"] = true;
    return calibrate_threshold(stat, model.p(), model.n(), alpha, cal, trial_seed(seed, kStreamAux, 0),
                               workers);
  };

  std::shared_ptr<LowDegreeLikelihood> L;
  double eta = 0.0;
  if (kind == "pca") {
    if (!model.lambda_hat()) s.fail("test", "the pca test needs lambda_hat (p = 2)");
    const double lh = *model.lambda_hat();
    eta = pca_threshold(lh);
    test.decide = [lh](const Observation& Y) { return pca_test(Y, lh).planted; };
  } else if (kind == "lr") {
    eta = s.real("eta", 1.0);
    test.decide = [&model, eta](const Observation& Y) { return lr_test(model, Y, eta); };
  } else if (kind == "ldlr") {
    L = std::make_shared<LowDegreeLikelihood>(model, static_cast<unsigned>(s.u64("D")));
    eta = calibrate([L](const Observation& Y) { return (*L)(Y.entries); });
    test.decide = [L, eta](const Observation& Y) { return poly_threshold_test(*L, Y, eta); };
  } else if (kind == "trace") {
    eta = calibrate(trace_statistic);
    test.decide = [eta](const Observation& Y) { return trace_statistic(Y) > eta; };
  } else {
    s.fail("test", "unknown test '" + kind + "'; expected pca, lr, ldlr or trace");
  }
  const TestReport r = error_rates(test, model, trials, seed, workers);

  j["provenance"] = provenance(s);
  j["model"] = to_json(model);
  j["threshold"] = eta;
  j["report"] = to_json(r);
  emit(s, json_text(j));
  return kOk;
}

int run_hermite_check(Settings& s) {
  const auto points = s.u64("points", kDefaultQuadraturePoints);
  if (points < 2 || points > 200) s.fail("points", "quadrature size must lie in [2, 200]");
  const auto residuals = hermite_identity_suite(static_cast<unsigned>(points));
  Json j;
  j["provenance"] = provenance(s);
  Json worst = Json::object();
  bool ok = true;
  Json rows = Json::array();
  for (const auto& r : residuals) {
    ok = ok && r.passed;
    if (!worst.contains(r.family) || worst[r.family].get<double>() < r.residual) worst[r.family] = r.residual;
    rows.push_back(to_json(r));
  }
  j["all_passed"] = ok;
  j["max_residual"] = worst;
  j["residuals"] = rows;
  emit(s, json_text(j));
  return ok ? kOk : kPartial;
}

int run_bounds_check(Settings& s) {
  const std::uint64_t seed = required_seed(s);
  BoundsSuiteOptions opt;
  opt.chernoff_n = s.u64("chernoff_n", opt.chernoff_n);
  opt.chernoff.eta = s.real("chernoff_eta", opt.chernoff.eta);
  opt.chernoff.delta = s.real("chernoff_delta", opt.chernoff.delta);
  opt.chernoff.trials = s.u64("chernoff_trials", opt.chernoff.trials);
  opt.bonami_polynomials = static_cast<unsigned>(s.u64("bonami_polynomials", opt.bonami_polynomials));
  opt.bonami_trials = s.u64("bonami_trials", opt.bonami_trials);
  opt.crosscheck_trials = s.u64("crosscheck_trials", opt.crosscheck_trials);
  if (!(opt.chernoff.delta > 0 && opt.chernoff.delta < 1)) s.fail("chernoff_delta", "delta must lie in (0, 1)");
  const auto reports = bounds_suite(opt, seed, default_workers());

  Json j;
  j["provenance"] = provenance(s);
  Json arr = Json::array();
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.satisfied;
    arr.push_back(to_json(r));
  }
  j["all_satisfied"] = ok;
  j["reports"] = arr;
  emit(s, json_text(j));
  return ok ? kOk : kPartial;
}

int run_oracle_verify(Settings& s) {
  OracleSuiteOptions opt;
  opt.max_n_hermite = static_cast<unsigned>(s.u64("max_n_hermite", opt.max_n_hermite));
  opt.max_D_hermite = static_cast<unsigned>(s.u64("max_D_hermite", opt.max_D_hermite));
  opt.max_n_pairs = static_cast<unsigned>(s.u64("max_n_pairs", opt.max_n_pairs));
  const auto checks = run_oracle_suite(opt);
  std::size_t failed = 0;
  Json rows = Json::array();
  for (const auto& c : checks) {
    if (!c.passed) ++failed;
    rows.push_back(to_json(c));
  }
  Json j;
  j["provenance"] = provenance(s);
  j["checks_run"] = checks.size();
  j["checks_failed"] = failed;
  j["checks"] = rows;
  emit(s, json_text(j));
  std::cerr << checks.size() - failed << "/" << checks.size() << " oracle comparisons passed\n";
  return failed == 0 ? kOk : kPartial;
}

using Runner = int (*)(Settings&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"ldlr-norm", run_ldlr_norm},         {"scan", run_scan},
      {"simulate", run_simulate},           {"pca-test", run_pca_test},
      {"error-rates", run_error_rates},     {"hermite-check", run_hermite_check},
      {"bounds-check", run_bounds_check},   {"oracle-verify", run_oracle_verify},
  };
  return table;
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> table = {
      {"ldlr-norm", "norm of the low-degree likelihood ratio for one model"},
      {"scan", "norms over an (n, lambda) grid with D = D(n), as CSV"},
      {"simulate", "sample a planted or null observation to a binary dump"},
      {"pca-test", "error rates of the top-eigenvalue test"},
      {"error-rates", "error rates of a chosen test"},
      {"hermite-check", "Hermite polynomial identity residuals"},
      {"bounds-check", "auxiliary inequality checks"},
      {"oracle-verify", "compare the engines against independent small-instance oracles"},
  };
  return table;
}

}  // namespace
}  // namespace lowdeg::cli

int main(int argc, char** argv) {
  using namespace lowdeg::cli;
  CLI::App app{"lowdeg: low-degree likelihood ratio experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lowdeg::version()));

  struct Bound {
    CLI::App* sub = nullptr;
    std::string config;
    std::string output;
    std::string prior;
    std::map<std::string, std::vector<std::string>> values;
  };
  std::map<std::string, Bound> bound;
  for (const auto& [name, flags] : command_flags()) {
    Bound& b = bound[name];
    b.sub = app.add_subcommand(name, descriptions().at(name));
    b.sub->add_option("--config", b.config, "TOML configuration file");
    b.sub->add_option("-o,--output", b.output, "output path");
    const bool has_prior = name == "ldlr-norm" || name == "scan" || name == "simulate" ||
                           name == "pca-test" || name == "error-rates";
    if (has_prior)
      b.sub->add_option("--prior", b.prior,
                        "rademacher | sparse_rademacher:<rho> | gaussian_iid | discrete_custom:<v@p,...>");
    for (const auto& f : flags) {
      auto* opt = b.sub->add_option(flag_name(f.key), b.values[f.key], f.help);
      if (f.list)
        opt->delimiter(',');
      else
        opt->expected(1);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  for (auto& [name, b] : bound) {
    if (!b.sub->parsed()) continue;
    Settings settings(name);
    try {
      if (!b.config.empty()) settings.load_file(b.config);
      for (auto& [key, values] : b.values)
        if (b.sub->count(flag_name(key)) > 0) settings.set_flag(key, values);
      if (!b.prior.empty())
        for (auto& [key, values] : prior_flag(b.prior)) settings.set_flag(key, values);
      if (!b.output.empty()) settings.set_flag("output", {b.output});
      return runners().at(name)(settings);
    } catch (const ConfigError& e) {
      std::cerr << e.what() << "\n";
      return kConfig;
    } catch (const lowdeg::InvalidArgument& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    } catch (const lowdeg::CapExceeded& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    } catch (const lowdeg::Unsupported& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << "\n";
      return kInternal;
    }
  }
  return kInternal;
}
