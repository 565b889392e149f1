// Acceptance run: one PASS/FAIL line per criterion.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lowdeg/bounds.hpp"
#include "lowdeg/detect.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/models.hpp"
#include "lowdeg/oracles.hpp"
#include "lowdeg/parallel.hpp"

using namespace lowdeg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. ldlr_norm_sq against the Hermite coefficient sum, exactly.
Outcome criterion1() {
  const auto t0 = Clock::now();
  Outcome o;
  int compared = 0, mismatched = 0;
  for (unsigned n = 1; n <= 5; ++n) {
    const auto sums = hermite_degree_sums(2, n, PriorSpec::rademacher(), 6);
    for (const Rational& lam : {Rational(1, 4), Rational(1, 2), Rational(1)}) {
      const ModelSpec m = ModelSpec::with_lambda(2, n, lam, PriorSpec::rademacher());
      for (unsigned D = 0; D <= 6; ++D) {
        const LdlrResult r = ldlr_norm_sq(m, D, ModeRequest::exact);
        ++compared;
        if (!r.exact_total || *r.exact_total != hermite_norm_sq(sums, lam * lam, D)) ++mismatched;
      }
    }
  }
  const double secs = seconds_since(t0);
  o.pass = mismatched == 0 && secs < 60;
  o.detail = std::to_string(compared) + " exact comparisons, " + std::to_string(mismatched) +
             " mismatches, " + fmt(secs, 3) + " s (limit 60 s)";
  return o;
}

// 2. Pair enumeration against the overlap law, plus cosh(1).
Outcome criterion2() {
  Outcome o;
  double worst = 0;
  int compared = 0;
  for (unsigned n = 1; n <= 10; ++n)
    for (double lh : {0.5, 1.0, 2.0}) {
      const ModelSpec m = ModelSpec::with_lambda_hat(n, lh, PriorSpec::rademacher());
      const double a = lr_norm_sq(m).value, b = lr_norm_sq_from_distribution(m);
      worst = std::max(worst, std::fabs(a - b) / std::fabs(b));
      ++compared;
    }
  const ModelSpec one = ModelSpec::with_lambda(3, 1, 1.0, PriorSpec::rademacher());
  const double c = lr_norm_sq(one).value;
  const double c_err = std::fabs(c - std::cosh(1.0)) / std::cosh(1.0);
  o.pass = worst <= 1e-12 && c_err <= 1e-12;
  o.detail = std::to_string(compared) + " instances, max rel error " + fmt(worst, 3) +
             "; single coordinate (p=3) " + fmt(c, 10) + " vs cosh(1), rel error " + fmt(c_err, 3) +
             " (tol 1e-12)";
  return o;
}

// 3. Tensor thresholds.
Outcome criterion3() {
  const auto t0 = Clock::now();
  Outcome o;
  const std::vector<unsigned> Ds{4, 8, 16, 32, 64};
  int low_cases = 0, low_fail = 0, high_checked = 0, high_fail = 0, growth_fail = 0;
  double min_high_log = 1e300, max_low_excess = -1e300;
  for (unsigned p : {2u, 3u, 4u})
    for (unsigned e = 6; e <= 14; ++e) {
      const std::uint64_t n = std::uint64_t{1} << e;
      const MomentTable table = overlap_moments(make_prior(PriorSpec::rademacher()), n, p * 64);
      double last_high = -1;
      for (unsigned D : Ds) {
        if (D * p > 2 * n) continue;
        const ThresholdBounds b = tensor_threshold_bounds(p, n, D);

        ++low_cases;
        const ModelSpec low = ModelSpec::with_lambda(p, n, b.lambda_low, PriorSpec::rademacher());
        const TermRatios tr = term_ratios(subgaussian_majorant_terms(p, n, b.lambda_low, D));
        const double actual = ldlr_norm_sq(low, D, table).log_norm_sq();
        if (!tr.all_dominated || !tr.geometric_bound_log || actual > *tr.geometric_bound_log) ++low_fail;
        if (tr.geometric_bound_log) max_low_excess = std::max(max_low_excess, actual - *tr.geometric_bound_log);

        const ModelSpec high = ModelSpec::with_lambda(p, n, b.lambda_high, PriorSpec::rademacher());
        const double hv = ldlr_norm_sq(high, D, table).log_norm_sq();
        if (hv <= last_high) ++growth_fail;
        last_high = hv;
        if (D == 64) {
          ++high_checked;
          min_high_log = std::min(min_high_log, hv);
          if (hv <= std::log(1e6)) ++high_fail;
        }
      }
    }
  const double secs = seconds_since(t0);
  o.pass = low_fail == 0 && high_fail == 0 && growth_fail == 0 && high_checked > 0 && secs < 300;
  o.detail = "lambda_low: " + std::to_string(low_cases - low_fail) + "/" + std::to_string(low_cases) +
             " with all r_d <= 1/2 and norm <= 1 + 2 T_1 (max log excess " + fmt(max_low_excess, 3) +
             "); lambda_high: " + std::to_string(high_checked - high_fail) + "/" + std::to_string(high_checked) +
             " (p, n) past 1e6 at D=64 (min log norm " + fmt(min_high_log, 4) + " vs " + fmt(std::log(1e6), 4) +
             "), " + std::to_string(growth_fail) + " non-increasing steps in D; " + fmt(secs, 3) +
             " s (limit 300 s)";
  return o;
}

// 4. Sharp threshold for spiked Wigner.
Outcome criterion4() {
  Outcome o;
  ScanConfig cfg;
  cfg.prior = PriorSpec::rademacher();
  cfg.n_grid = {100, 200, 500, 1000, 2000, 5000, 10000};
  cfg.schedule = DegreeSchedule::log_power(1.0);
  cfg.signals = {Rational(4, 5), Rational(9, 10), Rational(19, 20),
                 Rational(21, 20), Rational(11, 10), Rational(6, 5)};
  cfg.workers = default_workers();
  const ScanResult r = scan(cfg);
  std::string classes;
  bool ok = r.failures == 0;
  for (const auto& s : r.signals) {
    const bool below = s.signal < 1;
    const Classification want = below ? Classification::bounded : Classification::diverging;
    ok = ok && s.classification == want;
    classes += " " + to_string(s.signal) + ":" + std::string(to_string(s.classification));
  }
  // Successive-term ratio at d = 30 for n = 10^4.
  double worst_rel = 0, worst_abs = 0;
  for (const auto& sig : cfg.signals) {
    const ModelSpec m = ModelSpec::with_lambda_hat(10000, sig, PriorSpec::rademacher());
    const LdlrResult res = ldlr_norm_sq(m, 31);
    const double ratio = std::exp(res.terms[31].log_mag - res.terms[30].log_mag);
    const double target = to_double(sig * sig);
    worst_rel = std::max(worst_rel, std::fabs(ratio / target - 1));
    worst_abs = std::max(worst_abs, std::fabs(ratio - target));
  }
  o.pass = ok && worst_rel <= 0.02;
  o.detail = "classes" + classes + "; ratio T_31/T_30 at n=1e4: max |r/lambda_hat^2 - 1| = " + fmt(worst_rel, 4) +
             " (tol 0.02), max |r - lambda_hat^2| = " + fmt(worst_abs, 4);
  return o;
}

// 5. BBP transition and PCA error rates.
Outcome criterion5() {
  const auto t0 = Clock::now();
  Outcome o;
  const unsigned workers = default_workers();
  const BbpEstimate hi = bbp_estimate(2.0, 2000, 100, PriorSpec::rademacher(), 501, workers);
  const BbpEstimate lo = bbp_estimate(0.5, 2000, 100, PriorSpec::rademacher(), 502, workers);
  const ModelSpec m = ModelSpec::with_lambda_hat(2000, 2.0, PriorSpec::rademacher());
  const TestReport pca =
      error_rates({"pca", [](const Observation& Y) { return pca_test(Y, 2.0).planted; }}, m, 200, 503, workers);
  const double secs = seconds_since(t0);
  o.pass = std::fabs(hi.mean_lambda_max - 2.5) <= 0.05 && std::fabs(hi.mean_overlap_sq - 0.75) <= 0.05 &&
           std::fabs(lo.mean_lambda_max - 2.0) <= 0.05 && lo.mean_overlap_sq <= 0.05 && pca.alpha_hat <= 0.05 &&
           pca.beta_hat <= 0.05 && secs < 600;
  o.detail = "lambda_hat=2: lambda_max " + fmt(hi.mean_lambda_max, 5) + ", overlap^2 " + fmt(hi.mean_overlap_sq, 4) +
             "; lambda_hat=0.5: lambda_max " + fmt(lo.mean_lambda_max, 5) + ", overlap^2 " +
             fmt(lo.mean_overlap_sq, 3) + "; PCA alpha " + fmt(pca.alpha_hat, 3) + ", beta " +
             fmt(pca.beta_hat, 3) + " over 200 trials; " + fmt(secs, 3) + " s (limit 600 s)";
  return o;
}

// 6. Hermite identities.
Outcome criterion6() {
  Outcome o;
  struct Family {
    std::string name;
    double limit;
    double worst = 0;
    int count = 0;
  };
  std::vector<Family> fams{{"orthonormality", 1e-10}, {"translation", 1e-8},
                           {"generating_function", 1e-9}, {"integration_by_parts", 1e-10}};
  for (const auto& r : hermite_identity_suite())
    for (auto& f : fams)
      if (f.name == r.family) {
        f.worst = std::max(f.worst, r.residual);
        ++f.count;
      }
  for (const auto& f : fams) {
    o.pass = o.pass && f.count > 0 && f.worst < f.limit;
    o.detail += (o.detail.empty() ? "" : "; ") + f.name + " " + std::to_string(f.count) + " cases, max " +
                fmt(f.worst, 3) + " (limit " + fmt(f.limit, 1) + ")";
  }
  return o;
}

// 7. E_P[L^{<=D}] / sqrt(E_Q[(L^{<=D})^2]) against ||L^{<=D}||.
Outcome criterion7() {
  Outcome o;
  const std::uint64_t trials = 100000;
  for (double lh : {0.5, 2.0}) {
    const ModelSpec m = ModelSpec::with_lambda_hat(4, lh, PriorSpec::rademacher());
    const LowDegreeLikelihood L(m, 2);
    std::vector<double> planted(trials), null_sq(trials);
    parallel_for(trials, default_workers(), [&](std::size_t t) {
      planted[t] = L(sample_planted(m, trial_seed(700, kStreamPlantedTrial, t)).Y.entries);
      const double v = L(sample_null(2, 4, trial_seed(700, kStreamNullTrial, t)).entries);
      null_sq[t] = v * v;
    });
    const MeanSe a = mean_and_se(planted), b = mean_and_se(null_sq);
    const double ratio = a.mean / std::sqrt(b.mean);
    const double se = std::hypot(a.se / std::sqrt(b.mean), a.mean * b.se / (2 * std::pow(b.mean, 1.5)));
    const double target = std::sqrt(ldlr_norm_sq(m, 2).norm_sq());
    const double z = std::fabs(ratio - target) / se;
    o.pass = o.pass && z <= 3;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("lambda_hat=") + fmt(lh) + ": estimate " +
                fmt(ratio, 6) + " vs " + fmt(target, 6) + " (" + fmt(z, 3) + " se)";
  }
  return o;
}

// 8. Bounds suite.
Outcome criterion8() {
  Outcome o;
  const auto reports = bounds_suite(BoundsSuiteOptions{}, 800, default_workers());
  int bonami_polys = 0;
  for (const auto& r : reports) {
    bool ok = r.satisfied;
    if (r.name == "bonami_random_family") bonami_polys += static_cast<int>(r.rows.size());
    if (r.name == "consistency_crosscheck" && r.note.find("not met") != std::string::npos) ok = false;
    if (r.name == "subgaussian_moment_dominance" || r.name == "local_chernoff" || r.name == "bonami_random_family" ||
        r.name == "consistency_crosscheck") {
      std::string tag = r.name;
      for (const auto& [k, v] : r.parameters)
        if (k == "prior" || k == "base") tag += "[" + v + "]";
      o.detail += (o.detail.empty() ? "" : "; ") + tag + (ok ? " ok" : " FAILED") + " (lhs " + fmt(r.lhs, 4) +
                  ", rhs " + fmt(r.rhs, 4) + ")";
    }
    o.pass = o.pass && ok;
  }
  o.pass = o.pass && bonami_polys >= 1000;
  o.detail += "; " + std::to_string(reports.size()) + " reports, " + std::to_string(bonami_polys) +
              " Bonami polynomials";
  return o;
}

int run_cli(const std::string& args, unsigned workers) {
  const std::string cmd = "LOWDEG_WORKERS=" + std::to_string(workers) + " " + LOWDEG_CLI_PATH + " " + args +
                          " > /dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Byte-identical artifacts across worker counts.
Outcome criterion9() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "lowdeg_acceptance";
  fs::create_directories(dir);
  std::ofstream(dir / "scan.toml") << "p = 2\nprior = \"rademacher\"\nn_grid = [100, 1000, 10000]\n"
                                      "schedule = \"logpow:1\"\nlambda_hat = [\"9/10\", \"11/10\"]\n";
  std::ofstream(dir / "simulate.toml") << "p = 3\nn = 50\nlambda = \"3/10\"\nseed = 7\n"
                                          "[prior]\nkind = \"sparse_rademacher\"\nrho = \"1/2\"\n";
  struct Job {
    std::string name, args, ext;
  };
  const std::vector<Job> jobs{{"scan", "scan --config " + (dir / "scan.toml").string(), ".csv"},
                              {"simulate", "simulate --config " + (dir / "simulate.toml").string(), ".bin"}};
  for (const auto& job : jobs) {
    std::vector<std::string> outputs;
    bool ran = true;
    for (unsigned w : {1u, 1u, 4u, 16u}) {
      const fs::path out = dir / (job.name + "_w" + std::to_string(w) + "_" + std::to_string(outputs.size()) + job.ext);
      ran = ran && run_cli(job.args + " -o " + out.string(), w) == 0;
      std::string bytes = slurp(out);
      if (job.name == "simulate") bytes += slurp(out.string() + ".json");
      outputs.push_back(std::move(bytes));
    }
    bool same = ran && !outputs[0].empty();
    for (const auto& s : outputs) same = same && s == outputs[0];
    o.pass = o.pass && same;
    o.detail += (o.detail.empty() ? "" : "; ") + job.name + (same ? " identical" : " DIFFERS") + " over workers 1,1,4,16 (" +
                std::to_string(outputs[0].size()) + " bytes)";
  }
  return o;
}

}  // namespace

// Optional arguments pick criteria by number; default is all of them.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", criterion1},     {"second moment oracle", criterion2},
      {"tensor thresholds", criterion3},      {"spiked Wigner threshold", criterion4},
      {"BBP transition", criterion5},         {"Hermite identities", criterion6},
      {"variational consistency", criterion7}, {"bounds suite", criterion8},
      {"determinism", criterion9}};
  int failed = 0;
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int a = 1; a < argc; ++a) {
    const long k = std::strtol(argv[a], nullptr, 10);
    if (k < 1 || k > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
      return 2;
    }
    selected[k - 1] = true;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
