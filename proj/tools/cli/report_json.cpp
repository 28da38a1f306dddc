#include "cli/report_json.hpp"

#include <cmath>

namespace spdelab {

namespace {

// JSON has no infinity; large or undefined values are written as null.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = {{"kind", to_string(s.kind)}, {"nu", s.nu},         {"a", s.a},
       {"gamma", s.gamma},          {"theta", s.theta},   {"alpha", s.alpha},
       {"dim", s.dim},              {"length", s.length}, {"cutoff", s.cutoff},
       {"growth_exponent", s.growth_exponent}, {"drift_enabled", s.drift_enabled},
       {"noise_enabled", s.noise_enabled}, {"canonical", s.canonical()}};
}

void to_json(nlohmann::json& j, const Condition& c) {
  j = {{"name", c.name}, {"inequality", c.inequality}, {"passed", c.passed}, {"margin", number(c.margin)}};
}

void to_json(nlohmann::json& j, const SeriesDiagnostics& s) {
  j = {{"exponent", s.exponent},
       {"cutoffs", s.cutoffs},
       {"partial_sums", s.partial_sums},
       {"tail_exponent", s.tail_exponent},
       {"convergent", s.convergent}};
}

void to_json(nlohmann::json& j, const RegimeReport& r) {
  j = {{"model", r.model}, {"passed", r.passed()}, {"conditions", r.conditions}, {"notes", r.notes}};
  j["series"] = r.series ? nlohmann::json(*r.series) : nlohmann::json(nullptr);
}

void to_json(nlohmann::json& j, const NormalizationResult& r) {
  j = {{"mean", r.mean},
       {"standard_error", r.standard_error},
       {"ess", r.ess},
       {"truncation_frequency", r.truncation_frequency},
       {"exponent_mean", number(r.exponent_mean)},
       {"exponent_variance", number(r.exponent_variance)},
       {"paths", r.paths},
       {"warnings", r.warnings}};
}

void to_json(nlohmann::json& j, const ImportanceResult& r) {
  j = {{"unnormalized", r.unnormalized},
       {"unnormalized_se", r.unnormalized_se},
       {"self_normalized", r.self_normalized},
       {"self_normalized_se", r.self_normalized_se},
       {"mean_weight", r.mean_weight},
       {"ess", r.ess},
       {"truncation_frequency", r.truncation_frequency},
       {"paths", r.paths},
       {"warnings", r.warnings}};
}

void to_json(nlohmann::json& j, const ModeStatistic& m) {
  j = {{"label", m.label},           {"var_theory", m.var_theory},     {"var_empirical", m.var_empirical},
       {"mean_empirical", m.mean_empirical}, {"z_score", m.z_score}, {"ks_statistic", m.ks_statistic},
       {"ks_critical", m.ks_critical}, {"flagged", m.flagged}};
}

void to_json(nlohmann::json& j, const StationaryReport& r) {
  double worst = 0.0;
  for (const auto& m : r.modes) worst = std::max(worst, std::abs(m.z_score));
  j = {{"method", r.method}, {"samples", r.samples}, {"flagged", r.flagged_count()}, {"max_abs_z", worst}};
}

void to_json(nlohmann::json& j, const MixingReport& r) {
  j = {{"time", r.time},
       {"level", r.level},
       {"samples", r.samples},
       {"all_below", r.all_below()},
       {"max_excess", r.max_excess()}};
  auto& modes = j["modes"] = nlohmann::json::array();
  for (const auto& m : r.modes)
    modes.push_back({{"label", m.label}, {"statistic", m.statistic}, {"critical", m.critical}, {"below", m.below}});
}

}  // namespace spdelab
