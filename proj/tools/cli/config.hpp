#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdelab/linsim.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab::cli {

/// Invalid configuration; the message starts with the dotted field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialSpec {
  std::string kind = "invariant";  ///< zero | invariant | modes
  double scale = 1.0;
  std::map<std::string, double> modes;  ///< dof label (or index) -> value, for kind = modes
};

struct Config {
  std::string preset = "ks";
  ModelSpec model = ModelSpec::kuramoto_sivashinsky();

  double T = 0.25;
  double dt = 1.0 / 512;
  std::size_t paths = 10000;
  InitialSpec initial;
  double blowup_factor = 1e6;
  std::string path_format = "csv";  ///< csv | binary | both | none

  std::optional<double> truncation;  ///< unset: pilot quantile
  std::size_t pilot_paths = 1000;
  double pilot_quantile = 0.99;
  std::string observable = "mode2:1";
  bool direct_check = true;

  double perturbation = 1e-4;
  std::string perturbed_dof = "0";

  std::size_t samples = 10000;
  std::string method = "both";  ///< exact | path | both
  double spacing = 10.0;
  std::size_t substeps = 8;
  std::vector<double> mixing_times{0.1, 10.0};  ///< in units of 1 / mu_1
  std::size_t mixing_samples = 2000;
  double level = 0.01;

  std::vector<std::size_t> growth_samples{100, 1000};

  std::uint64_t seed = 1;
};

/// Full default configuration for a preset (ks, ns2, ns3) as JSON.
nlohmann::json default_config(const std::string& preset = "ks");

/// Merges `user` over the defaults of its model.preset, rejecting unknown keys
/// and mistyped values with field-level messages.
Config parse_config(const nlohmann::json& user);
Config load_config(const std::string& path);

/// Effective configuration, written to the manifest.
nlohmann::json to_json(const Config& config);

/// Resolves a dof given by label ("j=1:sin") or index.
std::size_t resolve_dof(const OperatorSpectrum& spectrum, const std::string& text);

InitialCondition make_initial(const Config& config, const SpectrumPtr& spectrum);

}  // namespace spdelab::cli
