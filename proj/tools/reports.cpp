#include "reports.hpp"

#include "lowdeg/io.hpp"
#include "lowdeg/rng.hpp"

namespace lowdeg::cli {
namespace {

const std::set<std::string> kUnhashed = {"output"};

}  // namespace

std::string config_hash(const Settings& settings) {
  return hex64(fnv1a64(settings.canonical(kUnhashed)));
}

Json provenance(const Settings& settings) {
  Json p;
  p["command"] = settings.command();
  p["version"] = std::string(version());
  p["generator"] = std::string(kGeneratorId);
  p["config_hash"] = config_hash(settings);
  const auto& resolved = settings.resolved();
  if (auto it = resolved.find("seed"); it != resolved.end())
    p["seed"] = it->second;
  else
    p["seed"] = nullptr;
  Json config = Json::object();
  for (const auto& [k, v] : resolved)
    if (!kUnhashed.count(k)) config[k] = v;
  p["config"] = config;
  return p;
}

Json to_json(const ModelSpec& model) {
  Json j;
  j["p"] = model.p();
  j["n"] = model.n();
  j["lambda"] = model.lambda();
  if (model.lambda_hat())
    j["lambda_hat"] = *model.lambda_hat();
  else
    j["lambda_hat"] = nullptr;
  if (model.lambda_sq_exact())
    j["lambda_sq"] = to_string(*model.lambda_sq_exact());
  j["prior"] = model.prior().describe();
  return j;
}

Json to_json(const LdlrResult& r) {
  Json j;
  j["D"] = r.D;
  j["mode"] = std::string(to_string(r.mode));
  j["log_norm_sq"] = r.log_norm_sq();
  j["norm_sq"] = r.norm_sq();
  if (r.exact_total) j["exact_norm_sq"] = to_string(*r.exact_total);
  Json terms = Json::array();
  for (unsigned d = 0; d <= r.D; ++d) {
    Json t;
    t["d"] = d;
    t["sign"] = r.terms[d].sign;
    t["log_abs_term"] = r.terms[d].is_zero() ? Json(nullptr) : Json(r.terms[d].log_mag);
    t["skipped"] = static_cast<bool>(r.skipped[d]);
    t["log_cumulative"] = r.cumulative_log[d];
    if (r.exact_terms) t["exact_term"] = to_string((*r.exact_terms)[d]);
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

Json to_json(const TermRatios& r) {
  Json j;
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.ratios.size(); ++i)
    rows.push_back({{"d", r.degrees[i]}, {"ratio", r.ratios[i]}, {"dominated", static_cast<bool>(r.dominated[i])}});
  j["ratios"] = rows;
  j["all_dominated"] = r.all_dominated;
  if (r.geometric_bound_log)
    j["geometric_bound_log"] = *r.geometric_bound_log;
  return j;
}

Json to_json(const TestReport& r) {
  Json j;
  j["test_id"] = r.test_id;
  j["trials"] = r.trials;
  j["alpha_hat"] = r.alpha_hat;
  j["beta_hat"] = r.beta_hat;
  j["alpha_ci"] = {r.alpha_ci.lo, r.alpha_ci.hi};
  j["beta_ci"] = {r.beta_ci.lo, r.beta_ci.hi};
  j["alpha_half_width"] = r.alpha_half_width;
  j["beta_half_width"] = r.beta_half_width;
  j["seed"] = r.seed;
  j["null_seeds"] = r.null_seeds;
  j["planted_seeds"] = r.planted_seeds;
  return j;
}

Json to_json(const BoundReport& r) {
  Json j;
  j["name"] = r.name;
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = params;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["log_scale"] = r.log_scale;
  j["satisfied"] = r.satisfied;
  j["margin"] = r.margin;
  j["note"] = r.note;
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"label", row.label}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"satisfied", row.satisfied}});
  j["rows"] = rows;
  return j;
}

Json to_json(const OracleCheck& c) {
  Json j;
  j["name"] = c.name;
  j["expected"] = c.expected;
  j["actual"] = c.actual;
  j["exact"] = c.exact;
  if (!c.exact) {
    j["rel_error"] = c.rel_error;
    j["tolerance"] = c.tolerance;
  }
  j["passed"] = c.passed;
  return j;
}

Json to_json(const IdentityResidual& r) {
  return {{"family", r.family}, {"label", r.label}, {"residual", r.residual},
          {"tolerance", r.tolerance}, {"passed", r.passed}};
}

}  // namespace lowdeg::cli
