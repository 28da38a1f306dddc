#pragma once

#include <json.hpp>

#include "spdelab/ergodics.hpp"
#include "spdelab/girsanov.hpp"
#include "spdelab/nonlinsim.hpp"
#include "spdelab/regimes.hpp"

namespace spdelab {

void to_json(nlohmann::json& j, const ModelSpec& spec);
void to_json(nlohmann::json& j, const Condition& c);
void to_json(nlohmann::json& j, const SeriesDiagnostics& s);
void to_json(nlohmann::json& j, const RegimeReport& r);
void to_json(nlohmann::json& j, const NormalizationResult& r);
void to_json(nlohmann::json& j, const ImportanceResult& r);
void to_json(nlohmann::json& j, const ModeStatistic& m);
void to_json(nlohmann::json& j, const StationaryReport& r);
void to_json(nlohmann::json& j, const MixingReport& r);

}  // namespace spdelab
