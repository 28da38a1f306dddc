#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/app.hpp"
#include "cli/config.hpp"
#include "spdelab/pathio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  fs::path dir;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("spdelab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const json& j) {
    const auto p = root_ / name;
    std::ofstream(p) << j.dump();
    return p;
  }

  Result run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--out", (root_ / "runs").string()});
    std::ostringstream out, err;
    Result r;
    r.code = spdelab::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    const std::string key = "run directory: ";
    const auto pos = r.out.rfind(key);
    if (pos != std::string::npos) {
      auto line = r.out.substr(pos + key.size());
      r.dir = line.substr(0, line.find('\n'));
    }
    return r;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  static json read_json(const fs::path& p) { return json::parse(slurp(p)); }

  fs::path root_;
};

const json kSmall = {{"simulation", {{"T", 0.25}, {"dt", 1.0 / 128}, {"paths", 300}}},
                     {"girsanov", {{"pilot_paths", 100}}}};

}  // namespace

TEST_F(Cli, CheckRegimeReportsJson) {
  const auto cfg = write_config("ns.json", {{"model", {{"preset", "ns2"}, {"alpha", 3}, {"gamma", -0.5}, {"theta", 1}}}});
  const auto r = run({"--config", cfg.string(), "check-regime", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto stdout_json = json::parse(r.out.substr(0, r.out.rfind("run directory")));
  EXPECT_TRUE(stdout_json["passed"].get<bool>());
  const auto summary = read_json(r.dir / "summary.json");
  EXPECT_EQ(summary, stdout_json);
  EXPECT_EQ(summary["model"], "ns");
  EXPECT_EQ(summary["conditions"][0]["name"], "conv-z");
  EXPECT_DOUBLE_EQ(summary["conditions"][0]["margin"].get<double>(), 1.0);
  EXPECT_TRUE(summary["series"]["convergent"].get<bool>());

  const auto manifest = read_json(r.dir / "manifest.json");
  EXPECT_EQ(manifest["subcommand"], "check-regime");
  EXPECT_EQ(manifest["config"]["model"]["dim"], 2);
  EXPECT_TRUE(fs::exists(r.dir / "modes.csv"));
  EXPECT_NE(r.dir.filename().string().find(manifest["config_hash"].get<std::string>().substr(0, 12)),
            std::string::npos);
}

TEST_F(Cli, SimulateLinearIsByteReproducible) {
  const auto cfg = write_config("c.json", {{"simulation", {{"T", 0.5}, {"dt", 1.0 / 64}, {"path_format", "both"}}}});
  const auto a = run({"--config", cfg.string(), "--seed", "42", "simulate-linear"});
  const auto b = run({"--config", cfg.string(), "--seed", "42", "simulate-linear"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  ASSERT_NE(a.dir, b.dir);
  for (const char* f : {"path.csv", "path.bin", "modes.csv", "summary.json"})
    EXPECT_EQ(slurp(a.dir / f), slurp(b.dir / f)) << f;
  const auto c = run({"--config", cfg.string(), "--seed", "43", "simulate-linear"});
  EXPECT_NE(slurp(a.dir / "path.csv"), slurp(c.dir / "path.csv"));

  // binary dump round-trips to the same CSV
  const auto spectrum = spdelab::build_spectrum(spdelab::ModelSpec::kuramoto_sivashinsky());
  std::ifstream in(a.dir / "path.bin", std::ios::binary);
  const auto path = spdelab::read_path_binary(in, spectrum);
  EXPECT_EQ(path.seed, 42u);
  std::ostringstream csv;
  spdelab::write_path_csv(csv, path);
  EXPECT_EQ(csv.str(), slurp(a.dir / "path.csv"));
  const auto head = slurp(a.dir / "path.csv").substr(0, 22);
  EXPECT_EQ(head, "time,mode_label,re,im\n");
}

TEST_F(Cli, GirsanovNormalizationDeskPreset) {
  const auto r = run({"--seed", "7", "girsanov-normalization"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = read_json(r.dir / "summary.json");
  ASSERT_TRUE(s.contains("mean"));
  ASSERT_TRUE(s.contains("standard_error"));
  ASSERT_TRUE(s.contains("ess"));
  EXPECT_NEAR(s["mean"].get<double>(), 1.0, 4.0 * s["standard_error"].get<double>());
  EXPECT_GE(s["ess"].get<double>(), 500.0);
  EXPECT_EQ(s["normalization"]["paths"], 10000);
  EXPECT_GT(s["pilot"]["level"].get<double>(), 0.0);
  const auto csv = slurp(r.dir / "girsanov.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "path_id,V,density,Q_T,truncated_flag");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10001);
}

TEST_F(Cli, EnsembleOutputsIndependentOfThreadCount) {
  const auto cfg = write_config("c.json", kSmall);
  const auto a = run({"--config", cfg.string(), "--threads", "1", "girsanov-normalization"});
  const auto b = run({"--config", cfg.string(), "--threads", "3", "girsanov-normalization"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(slurp(a.dir / "girsanov.csv"), slurp(b.dir / "girsanov.csv"));
  EXPECT_EQ(slurp(a.dir / "summary.json"), slurp(b.dir / "summary.json"));
}

TEST_F(Cli, OtherSubcommandsWriteTheirArtifacts) {
  json small = kSmall;
  small["ergodics"] = {{"samples", 1000}, {"mixing_samples", 300}};
  small["girsanov"]["truncation"] = "inf";
  const auto cfg = write_config("c.json", small);
  const std::vector<std::pair<std::string, std::string>> cases = {{"simulate-nonlinear", "path.csv"},
                                                                  {"girsanov-importance", "girsanov.csv"},
                                                                  {"twin-path", "twin.csv"},
                                                                  {"ergodics", "ergodics.csv"},
                                                                  {"growth-audit", "summary.json"}};
  for (const auto& [cmd, file] : cases) {
    const auto r = run({"--config", cfg.string(), cmd});
    ASSERT_EQ(r.code, 0) << cmd << ": " << r.err;
    EXPECT_TRUE(fs::exists(r.dir / file)) << cmd;
    EXPECT_TRUE(fs::exists(r.dir / "manifest.json")) << cmd;
  }
  const auto imp = run({"--config", cfg.string(), "girsanov-importance"});
  const auto s = read_json(imp.dir / "summary.json");
  EXPECT_EQ(s["truncation"], "inf");
  EXPECT_TRUE(s["agreement"]["agree"].get<bool>());
  const auto erg = read_json(run({"--config", cfg.string(), "ergodics"}).dir / "summary.json");
  EXPECT_EQ(erg["mixing"].size(), 2u);
  EXPECT_FALSE(erg["mixing"][0]["all_below"].get<bool>());
}

TEST_F(Cli, StrictTurnsRegimeWarningIntoFailure) {
  const auto cfg = write_config("c.json", {{"model", {{"theta", 0.2}}}, {"simulation", {{"T", 0.125}, {"dt", 0.125}}}});
  const auto lax = run({"--config", cfg.string(), "simulate-linear"});
  EXPECT_EQ(lax.code, 0);
  EXPECT_NE(lax.err.find("warning: parameters outside the admissible regime (theta-lower)"), std::string::npos);
  const auto strict = run({"--config", cfg.string(), "--strict", "simulate-linear"});
  EXPECT_EQ(strict.code, spdelab::cli::kRegimeViolation);
  EXPECT_TRUE(strict.dir.empty());
  const auto report = run({"--config", cfg.string(), "--strict", "check-regime"});
  EXPECT_EQ(report.code, spdelab::cli::kRegimeViolation);
  EXPECT_FALSE(read_json(report.dir / "summary.json")["passed"].get<bool>());
}

TEST_F(Cli, PrintDefaultsRoundTrips) {
  const auto r = run({"--print-defaults"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j, spdelab::cli::default_config("ks"));
  const auto c = spdelab::cli::parse_config(j);
  EXPECT_EQ(c.model, spdelab::ModelSpec::kuramoto_sivashinsky());
  EXPECT_EQ(spdelab::cli::to_json(c), j);

  const auto ns = json::parse(run({"--preset", "ns3", "--print-defaults"}).out);
  EXPECT_EQ(ns["model"]["dim"], 3);
  EXPECT_EQ(ns["model"]["cutoff"], 4);
}

TEST_F(Cli, ConfigErrorsNameTheField) {
  const std::vector<std::pair<json, std::string>> cases = {
      {{{"model", {{"nu", "fast"}}}}, "model.nu: expected number, got string"},
      {{{"simulation", {{"Tend", 1.0}}}}, "simulation.Tend: unknown key"},
      {{{"simulation", {{"dt", 0.3}}}}, "simulation.dt: must be positive and at most T"},
      {{{"simulation", {{"dt", 0.1}}}}, "simulation.dt: must divide T"},
      {{{"simulation", {{"paths", -5}}}}, "simulation.paths: must be non-negative"},
      {{{"simulation", {{"initial", {{"kind", "gaussian"}}}}}}, "simulation.initial.kind"},
      {{{"girsanov", {{"truncation", "sometimes"}}}}, "girsanov.truncation"},
      {{{"ergodics", {{"samples", 10}}}}, "ergodics.samples: at least 1000"},
      {{{"model", {{"preset", "heat"}}}}, "model.preset: unknown preset"},
      {{{"model", {{"nu", -1.0}}}}, "model: nu must be positive"},
      {{{"model", {{"a", 0.0}, {"nu", 0.5}}}}, "model: drift rate mu"},
  };
  for (const auto& [cfg, message] : cases) {
    const auto p = write_config("bad.json", cfg);
    const auto r = run({"--config", p.string(), "simulate-linear"});
    EXPECT_EQ(r.code, spdelab::cli::kConfigError) << cfg.dump();
    EXPECT_NE(r.err.find(message), std::string::npos) << r.err;
  }
  const auto p = root_ / "broken.json";
  std::ofstream(p) << "{ \"model\": ";
  EXPECT_EQ(run({"--config", p.string(), "check-regime"}).code, spdelab::cli::kConfigError);
  EXPECT_NE(run({"bogus-command"}).code, 0);
  EXPECT_EQ(run({}).code, spdelab::cli::kConfigError);
}

TEST_F(Cli, InitialModesAndObservableLabels) {
  const auto cfg = write_config(
      "c.json", {{"simulation", {{"T", 0.125}, {"dt", 0.125}, {"initial", {{"kind", "modes"}, {"modes", {{"j=1:sin", 2.0}}}}}}},
                 {"model", {{"noise_enabled", false}, {"drift_enabled", false}}}});
  const auto r = run({"--config", cfg.string(), "simulate-linear"});
  ASSERT_EQ(r.code, 0) << r.err;
  // noise and drift off: the j=1 sine mode decays at mu = 2
  const double expected = 2.0 * std::exp(-2.0 * 0.125);
  EXPECT_NEAR(read_json(r.dir / "summary.json")["final_l2_norm"].get<double>(), expected, 1e-14);

  const auto bad = write_config("d.json", {{"simulation", {{"initial", {{"kind", "modes"}, {"modes", {{"j=99:sin", 1.0}}}}}}}});
  const auto e = run({"--config", bad.string(), "simulate-linear"});
  EXPECT_EQ(e.code, spdelab::cli::kConfigError);
  EXPECT_NE(e.err.find("simulation.initial.modes"), std::string::npos);
}

TEST_F(Cli, BlowUpIsReported) {
  const auto cfg = write_config(
      "c.json", {{"simulation", {{"T", 1.0}, {"dt", 1.0 / 64}, {"blowup_factor", 1.01}, {"initial", {{"kind", "zero"}}}}}});
  const auto r = run({"--config", cfg.string(), "simulate-nonlinear"});
  EXPECT_EQ(r.code, spdelab::cli::kBlowUp) << r.err;
  EXPECT_TRUE(read_json(r.dir / "summary.json").contains("blowup"));
}
