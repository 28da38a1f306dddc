#include "cli/app.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/report_json.hpp"
#include "spdelab/error.hpp"
#include "spdelab/parallel.hpp"
#include "spdelab/pathio.hpp"
#include "spdelab/random.hpp"

#ifndef SPDELAB_VERSION
#define SPDELAB_VERSION "unknown"
#endif

namespace spdelab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = "runs";
  bool strict = false;
  unsigned threads = 0;
  bool print_defaults = false;
  bool regime_json = false;
};

struct Context {
  const Globals& globals;
  const Config& config;
  SpectrumPtr spectrum;
  RegimeReport regime;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;
  json summary = json::object();
  int status = 0;
};

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_stamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

fs::path make_run_dir(const std::string& root, const std::string& config_hash) {
  const fs::path base = fs::path(root) / (utc_stamp("%Y%m%dT%H%M%SZ") + "-" + config_hash.substr(0, 12));
  fs::create_directories(root);
  fs::path dir = base;
  for (int i = 2; !fs::create_directory(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  return dir;
}

std::ofstream open(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(p, mode);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j) { open(p) << j.dump(2) << '\n'; }

GirsanovRun girsanov_run(const Context& ctx) {
  GirsanovRun run;
  run.initial = make_initial(ctx.config, ctx.spectrum);
  run.T = ctx.config.T;
  run.dt = ctx.config.dt;
  run.paths = ctx.config.paths;
  run.seed = ctx.config.seed;
  run.threads = ctx.globals.threads;
  return run;
}

// Initial state of single-path commands; consumes the path stream the same
// way the ensemble drivers do.
SpectralField initial_state(const Context& ctx, RandomStream& stream) {
  return make_initial(ctx.config, ctx.spectrum).draw(ctx.spectrum, stream);
}

NonlinearOptions nonlinear_options(const Config& c) { return {c.blowup_factor}; }

void dump_path(const Context& ctx, const PathRecord& path) {
  const auto& fmt = ctx.config.path_format;
  if (fmt == "csv" || fmt == "both") {
    auto f = open(ctx.dir / "path.csv");
    write_path_csv(f, path);
  }
  if (fmt == "binary" || fmt == "both") {
    auto f = open(ctx.dir / "path.bin", std::ios::out | std::ios::binary);
    write_path_binary(f, path);
  }
}

json path_summary(const PathRecord& path) {
  double max_theta = 0.0;
  const double theta = path.spectrum->spec().theta;
  for (const auto& s : path.states) max_theta = std::max(max_theta, sobolev_norm(s, theta));
  return {{"steps", path.steps()},
          {"T", path.times.back()},
          {"dt", path.dt},
          {"final_l2_norm", sobolev_norm(path.states.back(), 0.0)},
          {"final_theta_norm", sobolev_norm(path.states.back(), theta)},
          {"max_theta_norm", max_theta},
          {"increment_hash", hex(path.increment_hash())}};
}

// -- subcommands -------------------------------------------------------------

void cmd_check_regime(Context& ctx) {
  ctx.summary = ctx.regime;
  if (ctx.globals.regime_json) {
    ctx.out << ctx.summary.dump(2) << '\n';
  } else {
    print_regime_table(ctx.out, ctx.regime);
  }
}

void cmd_simulate(Context& ctx, bool nonlinear) {
  RandomStream stream(ctx.config.seed);
  const auto x = initial_state(ctx, stream);
  PathRecord path;
  if (nonlinear) {
    try {
      path = simulate_nonlinear(ctx.spectrum, x, ctx.config.T, ctx.config.dt, stream, nonlinear_options(ctx.config));
    } catch (const BlowUpError& e) {
      ctx.summary["blowup"] = {{"time", e.time()}, {"theta_norm", e.norm()}, {"message", e.what()}};
      ctx.err << "error: " << e.what() << '\n';
      ctx.status = kBlowUp;
      return;
    }
  } else {
    path = simulate_linear(ctx.spectrum, x, ctx.config.T, ctx.config.dt, stream);
  }
  path.seed = ctx.config.seed;
  dump_path(ctx, path);
  ctx.summary = path_summary(path);
  ctx.out << (nonlinear ? "nonlinear" : "linear") << " path: " << path.steps() << " steps, |u(T)|_H = "
          << ctx.summary["final_l2_norm"].get<double>() << '\n';
}

double resolve_truncation(Context& ctx, GirsanovRun& run) {
  if (ctx.config.truncation) return *ctx.config.truncation;
  const double n = pilot_truncation_level(ctx.spectrum, run, ctx.config.pilot_paths, ctx.config.pilot_quantile);
  ctx.summary["pilot"] = {{"paths", ctx.config.pilot_paths}, {"quantile", ctx.config.pilot_quantile}, {"level", n}};
  return n;
}

json truncation_json(double n) { return std::isinf(n) ? json("inf") : json(n); }

void report_warnings(Context& ctx, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) ctx.err << "warning: " << w << '\n';
}

void cmd_girsanov_normalization(Context& ctx) {
  auto run = girsanov_run(ctx);
  run.truncation = resolve_truncation(ctx, run);
  const auto weights = forward_weights(ctx.spectrum, run);
  const auto r = summarize_normalization(weights);
  auto f = open(ctx.dir / "girsanov.csv");
  write_girsanov_csv(f, weights);
  ctx.summary["truncation"] = truncation_json(run.truncation);
  ctx.summary["normalization"] = r;
  ctx.summary["mean"] = r.mean;
  ctx.summary["standard_error"] = r.standard_error;
  ctx.summary["ess"] = r.ess;
  report_warnings(ctx, r.warnings);
  ctx.out << "E[exp V] = " << r.mean << " +- " << r.standard_error << "  (ESS " << r.ess << " of " << r.paths
          << ", truncated " << r.truncation_frequency << ")\n";
}

void cmd_girsanov_importance(Context& ctx) {
  auto run = girsanov_run(ctx);
  run.truncation = resolve_truncation(ctx, run);
  Observable phi;
  try {
    phi = observable_from_string(ctx.config.observable, *ctx.spectrum);
  } catch (const SpecError& e) {
    throw ConfigError(std::string("girsanov.observable: ") + e.what());
  }
  const auto weights = forward_weights(ctx.spectrum, run, phi);
  const auto r = summarize_importance(weights);
  auto f = open(ctx.dir / "girsanov.csv");
  write_girsanov_csv(f, weights);
  ctx.summary["truncation"] = truncation_json(run.truncation);
  ctx.summary["observable"] = phi.describe(*ctx.spectrum);
  ctx.summary["importance"] = r;
  report_warnings(ctx, r.warnings);
  ctx.out << "weighted E[" << phi.describe(*ctx.spectrum) << "] = " << r.unnormalized << " +- " << r.unnormalized_se
          << " (self-normalized " << r.self_normalized << ", ESS " << r.ess << ")\n";
  if (!ctx.config.direct_check) return;
  auto direct_run = run;
  direct_run.seed = mix64(run.seed ^ 0x5A5A5A5A5A5A5A5AULL);
  const auto d = direct_nonlinear_estimate(ctx.spectrum, phi, direct_run);
  const double diff = std::abs(r.unnormalized - d.mean);
  const double allowance =
      4.0 * (r.unnormalized_se + d.standard_error()) + run.dt * std::max(std::abs(r.unnormalized), std::abs(d.mean));
  ctx.summary["direct"] = {{"mean", d.mean}, {"standard_error", d.standard_error()}, {"seed", direct_run.seed}};
  ctx.summary["agreement"] = {{"difference", diff}, {"allowance", allowance}, {"agree", diff <= allowance}};
  ctx.out << "direct nonlinear estimate = " << d.mean << " +- " << d.standard_error() << " -> "
          << (diff <= allowance ? "agree" : "DISAGREE") << '\n';
}

void cmd_twin_path(Context& ctx) {
  RandomStream stream(ctx.config.seed);
  const auto x1 = initial_state(ctx, stream);
  auto x2 = x1;
  std::size_t dof = 0;
  try {
    dof = resolve_dof(*ctx.spectrum, ctx.config.perturbed_dof);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("twin.dof: ") + e.what());
  }
  x2.set_dof(dof, x1.dof(dof) + ctx.config.perturbation);
  TwinPathResult r;
  try {
    r = twin_path_divergence(ctx.spectrum, x1, x2, ctx.config.T, ctx.config.dt, mix64(ctx.config.seed),
                             nonlinear_options(ctx.config));
  } catch (const BlowUpError& e) {
    ctx.summary["blowup"] = {{"time", e.time()}, {"theta_norm", e.norm()}, {"message", e.what()}};
    ctx.err << "error: " << e.what() << '\n';
    ctx.status = kBlowUp;
    return;
  }
  auto f = open(ctx.dir / "twin.csv");
  f << "time,divergence,budget,norm_a1,norm_a2\n";
  for (std::size_t n = 0; n < r.times.size(); ++n) {
    f << format_number(r.times[n]) << ',' << format_number(r.divergence[n]) << ',' << format_number(r.budget[n])
      << ',' << format_number(r.norm_a1[n]) << ',' << format_number(r.norm_a2[n]) << '\n';
  }
  ctx.summary = {{"perturbed_dof", ctx.spectrum->dofs()[dof].label},
                 {"perturbation", ctx.config.perturbation},
                 {"initial_divergence", r.divergence.front()},
                 {"final_divergence", r.divergence.back()},
                 {"final_budget", r.budget.back()},
                 {"max_growth_ratio", r.max_growth_ratio()}};
  ctx.out << "|A(u1-u2)|: " << r.divergence.front() << " -> " << r.divergence.back() << ", Gronwall ratio "
          << r.max_growth_ratio() << '\n';
}

void cmd_ergodics(Context& ctx) {
  const auto& c = ctx.config;
  json stationary = json::array();
  auto record = [&](const StationaryReport& r, const std::string& file) {
    auto f = open(ctx.dir / file);
    write_ergodics_csv(f, r);
    json j = r;
    j["file"] = file;
    stationary.push_back(j);
    ctx.out << r.method << ": " << r.flagged_count() << " of " << r.modes.size() << " modes flagged\n";
  };
  if (c.method == "exact" || c.method == "both")
    record(stationary_stats_exact(ctx.spectrum, c.samples, c.seed, ctx.globals.threads), "ergodics.csv");
  if (c.method == "path" || c.method == "both")
    record(stationary_stats_path(ctx.spectrum, c.samples, mix64(c.seed), c.spacing, c.substeps),
           c.method == "path" ? "ergodics.csv" : "ergodics_path.csv");
  ctx.summary["stationary"] = stationary;

  RandomStream stream(mix64(c.seed ^ 0x1234));
  const auto x = initial_state(ctx, stream);
  json mixing = json::array();
  const double mu1 = ctx.spectrum->min_mu();
  for (std::size_t i = 0; i < c.mixing_times.size(); ++i) {
    const auto r =
        mixing_test(ctx.spectrum, x, c.mixing_times[i] / mu1, c.mixing_samples, stream_seed(c.seed, i), ctx.globals.threads, c.level);
    json j = r;
    j["time_in_relaxation_units"] = c.mixing_times[i];
    mixing.push_back(j);
    ctx.out << "mixing at t = " << c.mixing_times[i] << "/mu1: max KS/critical " << r.max_excess() << '\n';
  }
  ctx.summary["mixing"] = mixing;
}

void cmd_growth_audit(Context& ctx) {
  const auto& c = ctx.config;
  const std::size_t total = c.growth_samples.back();
  std::vector<double> ratios(total);
  const unsigned threads = resolve_threads(ctx.globals.threads);
  const std::size_t chunk = 64;
  parallel_for((total + chunk - 1) / chunk, threads, [&](std::size_t b) {
    PseudospectralContext pc(ctx.spectrum);
    for (std::size_t i = b * chunk; i < std::min(total, (b + 1) * chunk); ++i)
      ratios[i] = pc.growth_ratio(sample_gaussian_field(ctx.spectrum, Covariance::invariant(), stream_seed(c.seed, i)));
  });
  json levels = json::array();
  double running = 0.0, previous = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < total; ++i) {
    running = std::max(running, ratios[i]);
    if (i + 1 == c.growth_samples[next]) {
      json j = {{"samples", i + 1}, {"max_ratio", running}};
      if (next > 0) j["relative_growth"] = running / previous - 1.0;
      levels.push_back(j);
      ctx.out << "max growth ratio over " << i + 1 << " samples: " << running << '\n';
      previous = running;
      ++next;
    }
  }
  ctx.summary["levels"] = levels;
  const bool stable = levels.size() < 2 || levels.back()["relative_growth"].get<double>() <= 0.2;
  ctx.summary["stable"] = stable;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spdelab: stochastic Kuramoto-Sivashinsky and fractional Navier-Stokes laboratory", "spdelab"};
  app.set_version_flag("--version", SPDELAB_VERSION);
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--preset", g.preset, "model preset when the config has none (ks, ns2, ns3)");
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out_dir, "root directory for run directories")->capture_default_str();
  app.add_flag("--strict", g.strict, "treat parameters outside the admissible regime as an error");
  app.add_option("--threads", g.threads, "ensemble worker threads (0: hardware concurrency)")->capture_default_str();
  app.add_flag("--print-defaults", g.print_defaults, "print the default configuration and exit");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"check-regime", "evaluate admissibility conditions and series diagnostics"},
      {"simulate-linear", "one linear (Ornstein-Uhlenbeck) path"},
      {"simulate-nonlinear", "one nonlinear path driven by the same increments"},
      {"girsanov-normalization", "Monte Carlo check of E[exp V] = 1"},
      {"girsanov-importance", "importance-sampled nonlinear expectation"},
      {"twin-path", "divergence of two nonlinear paths under shared noise"},
      {"ergodics", "invariant-measure statistics and mixing tests"},
      {"growth-audit", "growth ratio of the drift over invariant samples"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) subs[name] = app.add_subcommand(name, help);
  subs["check-regime"]->add_flag("--json", g.regime_json, "print the report as JSON instead of a table");
  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  g.seed_given = app.get_option("--seed")->count() > 0;

  try {
    json user = json::object();
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      try {
        user = json::parse(in, nullptr, true, true);
      } catch (const json::parse_error& e) {
        throw ConfigError("config: " + g.config_path + ": " + e.what());
      }
      if (!user.is_object()) throw ConfigError("config: expected a JSON object at the top level");
    }
    if (!g.preset.empty()) {
      if (!user.contains("model")) user["model"] = json::object();
      if (!user["model"].is_object()) throw ConfigError("model: expected an object");
      if (!user["model"].contains("preset")) user["model"]["preset"] = g.preset;
    }
    if (g.print_defaults) {
      const std::string preset = user.contains("model") && user["model"].contains("preset") &&
                                         user["model"]["preset"].is_string()
                                     ? user["model"]["preset"].get<std::string>()
                                     : "ks";
      out << default_config(preset).dump(2) << '\n';
      return 0;
    }
    if (g.seed_given) user["seed"] = g.seed;

    std::string command;
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) command = name;
    if (command.empty()) {
      out << app.help();
      return kConfigError;
    }

    const Config config = parse_config(user);
    SpectrumPtr spectrum;
    try {
      spectrum = build_spectrum(config.model);
    } catch (const SpecError& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    for (const auto& w : spectrum->warnings()) err << "warning: " << w << '\n';

    Context ctx{g, config, spectrum, check_regime(config.model), {}, out, err};
    if (!ctx.regime.passed()) {
      std::string failed;
      for (const auto& c : ctx.regime.conditions)
        if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
      err << (g.strict ? "error" : "warning") << ": parameters outside the admissible regime (" << failed << ")\n";
      if (g.strict && command != "check-regime") return kRegimeViolation;
    }

    const json effective = to_json(config);
    const std::string config_hash = hex(fnv1a(effective.dump()));
    ctx.dir = make_run_dir(g.out_dir, config_hash);
    json manifest = {{"tool", "spdelab"},
                     {"version", SPDELAB_VERSION},
                     {"subcommand", command},
                     {"arguments", args},
                     {"created_utc", utc_stamp("%Y-%m-%dT%H:%M:%SZ")},
                     {"config_hash", config_hash},
                     {"master_seed", config.seed},
                     {"threads", g.threads},
                     {"strict", g.strict},
                     {"config", effective},
                     {"model", config.model},
                     {"spectrum",
                      {{"dofs", spectrum->dof_count()},
                       {"grid_size", spectrum->grid_size()},
                       {"min_mu", spectrum->min_mu()},
                       {"max_mu", spectrum->max_mu()},
                       {"spec_hash", hex(config.model.hash())}}},
                     {"regime_passed", ctx.regime.passed()}};
    write_json(ctx.dir / "manifest.json", manifest);
    {
      auto f = open(ctx.dir / "modes.csv");
      write_spectrum_csv(f, *spectrum);
    }

    if (command == "check-regime") cmd_check_regime(ctx);
    else if (command == "simulate-linear") cmd_simulate(ctx, false);
    else if (command == "simulate-nonlinear") cmd_simulate(ctx, true);
    else if (command == "girsanov-normalization") cmd_girsanov_normalization(ctx);
    else if (command == "girsanov-importance") cmd_girsanov_importance(ctx);
    else if (command == "twin-path") cmd_twin_path(ctx);
    else if (command == "ergodics") cmd_ergodics(ctx);
    else if (command == "growth-audit") cmd_growth_audit(ctx);

    write_json(ctx.dir / "summary.json", ctx.summary);
    out << "run directory: " << ctx.dir.string() << '\n';
    if (g.strict && !ctx.regime.passed()) return kRegimeViolation;
    return ctx.status;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace spdelab::cli
