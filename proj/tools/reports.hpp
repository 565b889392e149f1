#pragma once

// JSON forms of the library's reports.

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "lowdeg/bounds.hpp"
#include "lowdeg/detect.hpp"
#include "lowdeg/hermite.hpp"
#include "lowdeg/ldlr.hpp"
#include "lowdeg/oracles.hpp"

namespace lowdeg::cli {

using Json = nlohmann::ordered_json;

/// command, version, generator, config hash, seed and the resolved settings.
/// Output paths are left out so that identical runs written to different
/// files stay byte-identical.
Json provenance(const Settings& settings);
std::string config_hash(const Settings& settings);

Json to_json(const ModelSpec& model);
Json to_json(const LdlrResult& result);
Json to_json(const TermRatios& ratios);
Json to_json(const TestReport& report);
Json to_json(const BoundReport& report);
Json to_json(const OracleCheck& check);
Json to_json(const IdentityResidual& residual);

}  // namespace lowdeg::cli
