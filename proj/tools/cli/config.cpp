#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "spdelab/error.hpp"
#include "spdelab/random.hpp"

namespace spdelab::cli {

using nlohmann::json;

namespace {

ModelSpec preset_spec(const std::string& preset) {
  if (preset == "ks") return ModelSpec::kuramoto_sivashinsky();
  if (preset == "ns2") return ModelSpec::fractional_navier_stokes(2);
  if (preset == "ns3") return ModelSpec::fractional_navier_stokes(3);
  throw ConfigError("model.preset: unknown preset '" + preset + "' (expected ks, ns2 or ns3)");
}

json model_json(const std::string& preset, const ModelSpec& m) {
  return {{"preset", preset},
          {"kind", to_string(m.kind)},
          {"nu", m.nu},
          {"a", m.a},
          {"gamma", m.gamma},
          {"theta", m.theta},
          {"alpha", m.alpha},
          {"dim", m.dim},
          {"length", m.length},
          {"cutoff", m.cutoff},
          {"growth_exponent", m.growth_exponent},
          {"drift_enabled", m.drift_enabled},
          {"noise_enabled", m.noise_enabled}};
}

// Free-form objects whose keys are not checked against the defaults.
bool free_form(const std::string& path) { return path == "simulation.initial.modes"; }

// Values that accept more than one JSON type.
bool loosely_typed(const std::string& path) { return path == "girsanov.truncation"; }

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

std::string type_name(const json& j) {
  if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
  if (j.is_number()) return "number";
  return j.type_name();
}

void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + ": expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(path + ": unknown key");
    json& slot = base[it.key()];
    if (free_form(path)) {
      if (!it->is_object()) throw ConfigError(path + ": expected an object");
      slot = *it;
    } else if (slot.is_object()) {
      merge(slot, *it, path);
    } else if (loosely_typed(path) || same_kind(slot, *it)) {
      slot = *it;
    } else {
      throw ConfigError(path + ": expected " + type_name(slot) + ", got " + type_name(*it));
    }
  }
}

template <class T>
T get(const json& root, const std::string& section, const std::string& key) {
  const json& v = root.at(section).at(key);
  const std::string path = section + "." + key;
  if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d != std::floor(d)) throw ConfigError(path + ": expected an integer");
      if (d < 0 && !std::is_same_v<T, int>) throw ConfigError(path + ": must be non-negative");
      return static_cast<T>(d);
    }
    if (!std::is_same_v<T, int> && v.is_number_integer() && v.get<long long>() < 0)
      throw ConfigError(path + ": must be non-negative");
  }
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + ": invalid value " + v.dump());
  }
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

}  // namespace

json default_config(const std::string& preset) {
  const Config c;
  json j;
  j["seed"] = c.seed;
  j["model"] = model_json(preset, preset_spec(preset));
  j["simulation"] = {{"T", c.T},
                     {"dt", c.dt},
                     {"paths", c.paths},
                     {"initial", {{"kind", c.initial.kind}, {"scale", c.initial.scale}, {"modes", json::object()}}},
                     {"blowup_factor", c.blowup_factor},
                     {"path_format", c.path_format}};
  j["girsanov"] = {{"truncation", "pilot"},
                   {"pilot_paths", c.pilot_paths},
                   {"pilot_quantile", c.pilot_quantile},
                   {"observable", c.observable},
                   {"direct_check", c.direct_check}};
  j["twin"] = {{"perturbation", c.perturbation}, {"dof", c.perturbed_dof}};
  j["ergodics"] = {{"samples", c.samples},        {"method", c.method},
                   {"spacing", c.spacing},        {"substeps", c.substeps},
                   {"mixing_times", c.mixing_times}, {"mixing_samples", c.mixing_samples},
                   {"level", c.level}};
  j["growth"] = {{"samples", c.growth_samples}};
  return j;
}

Config parse_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config: expected a JSON object at the top level");
  std::string preset = "ks";
  if (user.contains("model") && user["model"].is_object() && user["model"].contains("preset")) {
    const auto& p = user["model"]["preset"];
    if (!p.is_string()) throw ConfigError("model.preset: expected string, got " + type_name(p));
    preset = p.get<std::string>();
  }
  json j = default_config(preset);
  merge(j, user, "");

  Config c;
  c.preset = preset;
  c.seed = j.at("seed").is_number_unsigned() || j.at("seed").is_number_integer()
               ? j.at("seed").get<std::uint64_t>()
               : throw ConfigError("seed: expected a non-negative integer");

  const json& m = j.at("model");
  try {
    c.model.kind = model_kind_from_string(m.at("kind").get<std::string>());
  } catch (const SpecError& e) {
    throw ConfigError(std::string("model.kind: ") + e.what());
  }
  c.model.nu = get<double>(j, "model", "nu");
  c.model.a = get<double>(j, "model", "a");
  c.model.gamma = get<double>(j, "model", "gamma");
  c.model.theta = get<double>(j, "model", "theta");
  c.model.alpha = get<double>(j, "model", "alpha");
  c.model.dim = get<int>(j, "model", "dim");
  c.model.length = get<double>(j, "model", "length");
  c.model.cutoff = get<int>(j, "model", "cutoff");
  c.model.growth_exponent = get<int>(j, "model", "growth_exponent");
  c.model.drift_enabled = get<bool>(j, "model", "drift_enabled");
  c.model.noise_enabled = get<bool>(j, "model", "noise_enabled");
  try {
    c.model.validate();
  } catch (const SpecError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  c.T = get<double>(j, "simulation", "T");
  c.dt = get<double>(j, "simulation", "dt");
  c.paths = get<std::size_t>(j, "simulation", "paths");
  require(c.T > 0.0, "simulation.T", "must be positive");
  require(c.dt > 0.0 && c.dt <= c.T, "simulation.dt", "must be positive and at most T");
  const double ratio = c.T / c.dt;
  require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio, "simulation.dt", "must divide T");
  require(c.paths > 0, "simulation.paths", "must be positive");
  const json& init = j.at("simulation").at("initial");
  c.initial.kind = init.at("kind").get<std::string>();
  require(c.initial.kind == "zero" || c.initial.kind == "invariant" || c.initial.kind == "modes",
          "simulation.initial.kind", "expected zero, invariant or modes");
  c.initial.scale = init.at("scale").is_number() ? init.at("scale").get<double>() : 1.0;
  for (auto it = init.at("modes").begin(); it != init.at("modes").end(); ++it) {
    require(it->is_number(), "simulation.initial.modes." + it.key(), "expected number");
    c.initial.modes[it.key()] = it->get<double>();
  }
  c.blowup_factor = get<double>(j, "simulation", "blowup_factor");
  require(c.blowup_factor > 1.0, "simulation.blowup_factor", "must exceed 1");
  c.path_format = get<std::string>(j, "simulation", "path_format");
  require(c.path_format == "csv" || c.path_format == "binary" || c.path_format == "both" || c.path_format == "none",
          "simulation.path_format", "expected csv, binary, both or none");

  const json& tr = j.at("girsanov").at("truncation");
  if (tr.is_number()) {
    c.truncation = tr.get<double>();
    require(*c.truncation >= 0.0, "girsanov.truncation", "must be non-negative");
  } else if (tr.is_string() && tr.get<std::string>() == "inf") {
    c.truncation = std::numeric_limits<double>::infinity();
  } else {
    require(tr.is_string() && tr.get<std::string>() == "pilot", "girsanov.truncation",
            "expected a number, \"inf\" or \"pilot\"");
  }
  c.pilot_paths = get<std::size_t>(j, "girsanov", "pilot_paths");
  c.pilot_quantile = get<double>(j, "girsanov", "pilot_quantile");
  require(c.pilot_paths > 0, "girsanov.pilot_paths", "must be positive");
  require(c.pilot_quantile > 0.0 && c.pilot_quantile <= 1.0, "girsanov.pilot_quantile", "must lie in (0, 1]");
  c.observable = get<std::string>(j, "girsanov", "observable");
  c.direct_check = get<bool>(j, "girsanov", "direct_check");

  c.perturbation = get<double>(j, "twin", "perturbation");
  c.perturbed_dof = get<std::string>(j, "twin", "dof");

  c.samples = get<std::size_t>(j, "ergodics", "samples");
  require(c.samples >= 1000, "ergodics.samples", "at least 1000 samples are required");
  c.method = get<std::string>(j, "ergodics", "method");
  require(c.method == "exact" || c.method == "path" || c.method == "both", "ergodics.method",
          "expected exact, path or both");
  c.spacing = get<double>(j, "ergodics", "spacing");
  c.substeps = get<std::size_t>(j, "ergodics", "substeps");
  require(c.spacing > 0.0, "ergodics.spacing", "must be positive");
  require(c.substeps > 0, "ergodics.substeps", "must be positive");
  c.mixing_times = get<std::vector<double>>(j, "ergodics", "mixing_times");
  for (double t : c.mixing_times) require(t > 0.0, "ergodics.mixing_times", "entries must be positive");
  c.mixing_samples = get<std::size_t>(j, "ergodics", "mixing_samples");
  require(c.mixing_samples >= 2, "ergodics.mixing_samples", "must be at least 2");
  c.level = get<double>(j, "ergodics", "level");
  require(c.level > 0.0 && c.level < 1.0, "ergodics.level", "must lie in (0, 1)");

  c.growth_samples = get<std::vector<std::size_t>>(j, "growth", "samples");
  require(!c.growth_samples.empty(), "growth.samples", "must not be empty");
  for (std::size_t i = 0; i < c.growth_samples.size(); ++i) {
    require(c.growth_samples[i] > 0, "growth.samples", "entries must be positive");
    if (i > 0) require(c.growth_samples[i] > c.growth_samples[i - 1], "growth.samples", "must be increasing");
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const Config& c) {
  json j = default_config(c.preset);
  j["seed"] = c.seed;
  j["model"] = model_json(c.preset, c.model);
  auto& s = j["simulation"];
  s["T"] = c.T;
  s["dt"] = c.dt;
  s["paths"] = c.paths;
  s["initial"] = {{"kind", c.initial.kind}, {"scale", c.initial.scale}, {"modes", c.initial.modes}};
  s["blowup_factor"] = c.blowup_factor;
  s["path_format"] = c.path_format;
  auto& g = j["girsanov"];
  if (!c.truncation) {
    g["truncation"] = "pilot";
  } else if (std::isinf(*c.truncation)) {
    g["truncation"] = "inf";
  } else {
    g["truncation"] = *c.truncation;
  }
  g["pilot_paths"] = c.pilot_paths;
  g["pilot_quantile"] = c.pilot_quantile;
  g["observable"] = c.observable;
  g["direct_check"] = c.direct_check;
  j["twin"] = {{"perturbation", c.perturbation}, {"dof", c.perturbed_dof}};
  j["ergodics"] = {{"samples", c.samples},        {"method", c.method},
                   {"spacing", c.spacing},        {"substeps", c.substeps},
                   {"mixing_times", c.mixing_times}, {"mixing_samples", c.mixing_samples},
                   {"level", c.level}};
  j["growth"] = {{"samples", c.growth_samples}};
  return j;
}

std::size_t resolve_dof(const OperatorSpectrum& spectrum, const std::string& text) {
  const auto dofs = spectrum.dofs();
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i].label == text) return i;
  }
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec != std::errc() || ptr != text.data() + text.size() || index >= dofs.size())
    throw ConfigError("unknown degree of freedom '" + text + "'");
  return index;
}

InitialCondition make_initial(const Config& c, const SpectrumPtr& spectrum) {
  if (c.initial.kind == "zero") return InitialCondition::zero();
  if (c.initial.kind == "invariant") return InitialCondition::invariant(c.initial.scale);
  SpectralField x(spectrum);
  for (const auto& [label, value] : c.initial.modes) {
    try {
      x.set_dof(resolve_dof(*spectrum, label), c.initial.scale * value);
    } catch (const ConfigError& e) {
      throw ConfigError("simulation.initial.modes: " + std::string(e.what()));
    }
  }
  return InitialCondition::fixed(std::move(x));
}

}  // namespace spdelab::cli
