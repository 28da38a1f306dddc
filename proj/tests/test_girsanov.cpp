#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "spdelab/error.hpp"
#include "spdelab/girsanov.hpp"
#include "spdelab/stats.hpp"

using namespace spdelab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SpectrumPtr ks(bool drift = true) {
  auto spec = ModelSpec::kuramoto_sivashinsky();
  spec.drift_enabled = drift;
  return build_spectrum(spec);
}

GirsanovRun short_run(std::size_t paths, std::uint64_t seed) {
  GirsanovRun run;
  run.initial = InitialCondition::invariant();
  run.T = 0.25;
  run.dt = 1.0 / 512;
  run.paths = paths;
  run.seed = seed;
  run.threads = 1;
  return run;
}

// DriftEvaluation whose scaled field is the constant f on one dof.
DriftEvaluation constant_integrand(const SpectrumPtr& s, std::size_t dof, double f) {
  DriftEvaluation d(s);
  d.scaled.set_dof(dof, f);
  d.scaled_norm = std::abs(f);
  return d;
}

}  // namespace

TEST(Ledger, ZeroDriftGivesUnitDensity) {
  const auto s = ks(false);
  const auto path = simulate_linear(s, oracle::random_field(s, 1), 0.25, 1.0 / 64, 4);
  const auto fwd = forward_density(path);
  EXPECT_EQ(fwd.exponent(), 0.0);
  EXPECT_EQ(fwd.density(), 1.0);
  const auto non = simulate_nonlinear(s, oracle::random_field(s, 1), 0.25, 1.0 / 64, 4);
  EXPECT_EQ(reverse_density(non).density(), 1.0);
}

TEST(Ledger, ZeroTruncationGivesZeroExponent) {
  const auto s = ks();
  const auto path = simulate_linear(s, sample_gaussian_field(s, Covariance::invariant(), 2), 0.25, 1.0 / 64, 4);
  const auto led = forward_density(path, 0.0);
  EXPECT_GT(led.Q(), 0.0);
  EXPECT_FALSE(led.active());
  EXPECT_EQ(led.exponent(), 0.0);
  EXPECT_EQ(led.S(), 0.0);
  EXPECT_EQ(led.D(), 0.0);
}

TEST(Ledger, ConstantIntegrandHasExactGaussianLaw) {
  const auto s = ks();
  const double f = 1.7, dt = 1.0 / 64, T = 1.0;
  const auto d = constant_integrand(s, 5, f);
  const std::size_t M = 100000;
  const std::size_t nd = s->dof_count();
  std::vector<double> S(M);
  std::vector<double> db(nd);
  for (std::size_t m = 0; m < M; ++m) {
    RandomStream rs(stream_seed(12, m));
    GirsanovLedger led(GirsanovDirection::Reverse);
    for (int n = 0; n < 64; ++n) {
      for (auto& x : db) x = std::sqrt(dt) * rs.normal();
      led.accumulate(d, db, dt);
    }
    ASSERT_NEAR(led.D(), f * f * T, 1e-12);
    ASSERT_EQ(led.Q(), led.D());
    S[m] = led.S();
  }
  const auto mom = stats::moments(S);
  const double var = f * f * T;
  EXPECT_NEAR(mom.mean, 0.0, 4.0 * std::sqrt(var / M));
  EXPECT_NEAR(mom.variance, var, 4.0 * var * std::sqrt(2.0 / (M - 1)));
  EXPECT_LT(stats::ks_statistic_normal(S, 0.0, var), stats::ks_critical_value(M, 0.01));
}

TEST(Ledger, SignConventionAndIdentity) {
  const auto s = ks();
  const auto d = constant_integrand(s, 0, 2.0);
  std::vector<double> db(s->dof_count(), 0.0);
  db[0] = 0.3;
  GirsanovLedger fwd(GirsanovDirection::Forward), rev(GirsanovDirection::Reverse);
  fwd.accumulate(d, db, 0.5);
  rev.accumulate(d, db, 0.5);
  EXPECT_DOUBLE_EQ(fwd.S(), 0.6);
  EXPECT_DOUBLE_EQ(fwd.D(), 2.0);
  EXPECT_DOUBLE_EQ(fwd.exponent(), -0.6 - 1.0);
  EXPECT_DOUBLE_EQ(rev.exponent(), 0.6 - 1.0);
  EXPECT_EQ(fwd.sign(), -1.0);
  EXPECT_EQ(rev.sign(), 1.0);
  EXPECT_DOUBLE_EQ(fwd.density(), std::exp(-1.6));
}

TEST(Ledger, TruncationIsMonotoneAndCapsDriftIntegral) {
  const auto s = ks();
  const auto d = constant_integrand(s, 0, 1.0);
  std::vector<double> db(s->dof_count(), 0.1);
  GirsanovLedger led(GirsanovDirection::Forward, 0.35);
  bool was_active = true;
  double q_prev = 0.0;
  int transitions = 0;
  for (int n = 0; n < 10; ++n) {
    led.accumulate(d, db, 0.1);
    EXPECT_GE(led.Q(), q_prev);
    if (was_active && !led.active()) ++transitions;
    EXPECT_FALSE(!was_active && led.active());
    was_active = led.active();
    q_prev = led.Q();
    EXPECT_LE(led.D(), led.N());
  }
  EXPECT_EQ(transitions, 1);
  EXPECT_NEAR(led.D(), 0.3, 1e-15);
  EXPECT_NEAR(led.Q(), 1.0, 1e-15);
}

TEST(Ledger, RejectsNonFiniteIntegrand) {
  const auto s = ks();
  auto d = constant_integrand(s, 0, std::numeric_limits<double>::infinity());
  std::vector<double> db(s->dof_count(), 0.1);
  GirsanovLedger led;
  EXPECT_THROW(led.accumulate(d, db, 0.1), NumericalError);
  EXPECT_THROW(GirsanovLedger(GirsanovDirection::Forward, -1.0), SpecError);
}

TEST(Normalization, ZeroDriftIsExact) {
  const auto r = normalization_check(ks(false), short_run(1000, 3));
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.standard_error, 0.0);
  EXPECT_EQ(r.ess, 1000.0);
  EXPECT_EQ(r.truncation_frequency, 0.0);
}

TEST(Normalization, UnbiasedAtDeskScaleWithFewerPaths) {
  const auto s = ks();
  auto run = short_run(2000, 5);
  run.truncation = 10.0;
  const auto r = normalization_check(s, run);
  EXPECT_NEAR(r.mean, 1.0, 4.0 * r.standard_error);
  EXPECT_GT(r.ess, 0.05 * 2000);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Normalization, TruncationFrequencyNonIncreasingInN) {
  const auto s = ks();
  auto run = short_run(1000, 6);
  // pilot scale: Q_T is O(1) for this preset, so start the ladder below it
  double prev = 1.0;
  for (double N : {0.5, 1.0, 5.0, 10.0, 50.0}) {
    run.truncation = N;
    const auto r = normalization_check(s, run);
    EXPECT_LE(r.truncation_frequency, prev) << "N = " << N;
    prev = r.truncation_frequency;
  }
  run.truncation = 0.5;
  EXPECT_GT(normalization_check(s, run).truncation_frequency, 0.0);
}

TEST(Normalization, PilotLevelIsQuantileOfQ) {
  const auto s = ks();
  auto run = short_run(500, 7);
  const auto w = forward_weights(s, run);
  std::vector<double> q;
  for (const auto& p : w) q.push_back(p.Q);
  EXPECT_DOUBLE_EQ(pilot_truncation_level(s, run, 500, 0.99), stats::quantile(q, 0.99));
}

TEST(Importance, ConstantObservableReproducesNormalization) {
  const auto s = ks();
  auto run = short_run(500, 8);
  run.truncation = 3.0;
  const auto n = normalization_check(s, run);
  const auto i = importance_estimate(s, Observable::constant(), run);
  EXPECT_EQ(i.unnormalized, n.mean);
  EXPECT_NEAR(i.self_normalized, 1.0, 1e-14);
}

TEST(Importance, ZeroDriftEqualsPlainLinearMonteCarlo) {
  const auto s = ks(false);
  auto run = short_run(400, 9);
  const auto phi = Observable::mode_second(1);
  const auto i = importance_estimate(s, phi, run);
  const auto samples = linear_terminal_samples(s, run.initial, run.T, run.dt, run.paths, run.seed, 1);
  std::vector<double> v(run.paths);
  for (std::size_t p = 0; p < run.paths; ++p) v[p] = samples[p * s->dof_count() + 1] * samples[p * s->dof_count() + 1];
  const auto m = stats::moments(v);
  EXPECT_DOUBLE_EQ(i.unnormalized, m.mean);
  EXPECT_DOUBLE_EQ(i.unnormalized_se, m.standard_error());
}

TEST(Importance, WeightsMatchRecordedPathLedger) {
  const auto s = ks();
  auto run = short_run(3, 10);
  run.initial = InitialCondition::fixed(oracle::random_field(s, 3, 0.2));
  const auto w = forward_weights(s, run);
  const auto path = simulate_linear(s, *run.initial.field, run.T, run.dt, stream_seed(run.seed, 0));
  const auto led = forward_density(path);
  EXPECT_DOUBLE_EQ(w[0].V, led.exponent());
  EXPECT_DOUBLE_EQ(w[0].Q, led.Q());

  const auto rw = reverse_weights(s, run);
  const auto non = simulate_nonlinear(s, *run.initial.field, run.T, run.dt, stream_seed(run.seed, 0));
  EXPECT_DOUBLE_EQ(rw[0].V, reverse_density(non).exponent());
}

TEST(Reverse, CoupledPathsReportFiniteExponents) {
  const auto s = ks();
  const auto x = sample_gaussian_field(s, Covariance::invariant(), 11);
  const auto z = simulate_linear(s, x, 0.25, 1.0 / 512, 12);
  const auto u = simulate_nonlinear(s, x, 0.25, 1.0 / 512, 12);
  const auto vp = forward_density(z);
  const auto vm = reverse_density(u);
  EXPECT_TRUE(std::isfinite(vp.exponent()));
  EXPECT_TRUE(std::isfinite(vm.exponent()));
  EXPECT_GT(vp.density(), 0.0);
  EXPECT_GT(vm.density(), 0.0);
  EXPECT_THROW(reverse_density(z), SpecError);
  EXPECT_THROW(forward_density(u), SpecError);
}

TEST(Reverse, NormalizationOverNonlinearPaths) {
  const auto s = ks();
  const auto r = reverse_normalization_check(s, short_run(2000, 13));
  EXPECT_NEAR(r.mean, 1.0, 4.0 * r.standard_error);
  for (const auto& w : reverse_weights(s, short_run(50, 13))) {
    EXPECT_GT(w.density, 0.0);
    EXPECT_TRUE(std::isfinite(w.density));
  }
}

TEST(Girsanov, NoiseMustBeEnabled) {
  auto spec = ModelSpec::kuramoto_sivashinsky();
  spec.noise_enabled = false;
  EXPECT_THROW(forward_weights(build_spectrum(spec), short_run(2, 1)), SpecError);
}

TEST(Girsanov, CollapseWarning) {
  std::vector<PathWeight> w(200);
  w[0].density = 1e6;
  for (std::size_t i = 1; i < w.size(); ++i) w[i].density = 1e-3;
  EXPECT_FALSE(summarize_normalization(w).warnings.empty());
  EXPECT_FALSE(summarize_importance(w).warnings.empty());
}

TEST(Observables, ValuesAndInvariantMeans) {
  const auto s = ks();
  const auto u = ks_trig_field(s, 1, 0.0, 2.0);
  EXPECT_NEAR(Observable::mode_first(1)(u), -2.0 * std::sqrt(std::numbers::pi) * -1.0, 1e-14);
  EXPECT_NEAR(Observable::mode_second(1)(u), 4.0 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(Observable::sobolev_energy(0.7)(u), std::pow(sobolev_norm(u, 0.7), 2), 1e-13);
  EXPECT_EQ(Observable::constant()(u), 1.0);
  EXPECT_EQ(Observable::mode_second(0).invariant_mean(*s), 0.25);
  double energy = 0.0;
  for (const auto& d : s->dofs()) {
    if (d.lambda <= 4.0) energy += d.lambda * d.stationary_variance();
  }
  EXPECT_NEAR(Observable::sobolev_energy(0.5, 2).invariant_mean(*s), energy, 1e-15);
  const auto cut = Observable::sobolev_energy(0.0, 1)(u + ks_trig_field(s, 3, 1.0, 0.0));
  EXPECT_NEAR(cut, 4.0 * std::numbers::pi, 1e-13);
}

TEST(Observables, Parsing) {
  const auto s = ks();
  EXPECT_EQ(observable_from_string("constant", *s).kind, Observable::Kind::Constant);
  const auto m = observable_from_string("mode2:j=1:sin", *s);
  EXPECT_EQ(m.kind, Observable::Kind::ModeSecondMoment);
  EXPECT_EQ(m.dof, 1u);
  EXPECT_EQ(observable_from_string("mode1:5", *s).dof, 5u);
  const auto e = observable_from_string("energy:0.7:8", *s);
  EXPECT_EQ(e.cutoff, 8);
  EXPECT_DOUBLE_EQ(e.theta, 0.7);
  EXPECT_EQ(e.describe(*s), "energy:0.69999999999999996:8");
  EXPECT_THROW(observable_from_string("mode2:nope", *s), SpecError);
  EXPECT_THROW(observable_from_string("cubic", *s), SpecError);
  EXPECT_THROW(observable_from_string("mode1:64", *s), SpecError);
}

TEST(Girsanov, CsvLayout) {
  std::vector<PathWeight> w(2);
  w[1] = {1, -0.5, std::exp(-0.5), 2.0, true, 0.0};
  std::ostringstream os;
  write_girsanov_csv(os, w);
  EXPECT_EQ(os.str(), "path_id,V,density,Q_T,truncated_flag\n0,0,1,0,0\n1,-0.5,0.60653065971263342,2,1\n");
}

TEST(Girsanov, DeterministicAcrossThreadCounts) {
  const auto s = ks();
  auto run = short_run(130, 14);
  run.threads = 1;
  const auto a = forward_weights(s, run);
  run.threads = 3;
  const auto b = forward_weights(s, run);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].V, b[i].V);
    ASSERT_EQ(a[i].phi, b[i].phi);
  }
}
