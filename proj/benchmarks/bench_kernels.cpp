#include <benchmark/benchmark.h>

#include "spdelab/linsim.hpp"
#include "spdelab/nonlinsim.hpp"
#include "spdelab/operators.hpp"
#include "spdelab/random.hpp"

using namespace spdelab;

namespace {

SpectrumPtr preset(int which) {
  switch (which) {
    case 0: return build_spectrum(ModelSpec::kuramoto_sivashinsky());
    case 1: return build_spectrum(ModelSpec::fractional_navier_stokes(2));
    default: return build_spectrum(ModelSpec::fractional_navier_stokes(3));
  }
}

const char* preset_name(int which) { return which == 0 ? "ks" : which == 1 ? "ns2" : "ns3"; }

void BM_Drift(benchmark::State& state) {
  const auto s = preset(static_cast<int>(state.range(0)));
  state.SetLabel(preset_name(static_cast<int>(state.range(0))));
  PseudospectralContext ctx(s);
  const auto u = sample_gaussian_field(s, Covariance::invariant(), 1);
  DriftEvaluation d(s);
  for (auto _ : state) {
    ctx.drift(u, d);
    benchmark::DoNotOptimize(d.scaled_norm);
  }
  state.counters["dofs"] = static_cast<double>(s->dof_count());
  state.counters["grid"] = s->grid_size();
}
BENCHMARK(BM_Drift)->DenseRange(0, 2);

// KS cutoff ladder: cost of one drift evaluation against J.
void BM_DriftKsCutoff(benchmark::State& state) {
  auto spec = ModelSpec::kuramoto_sivashinsky();
  spec.cutoff = static_cast<int>(state.range(0));
  const auto s = build_spectrum(spec);
  PseudospectralContext ctx(s);
  const auto u = sample_gaussian_field(s, Covariance::invariant(), 2);
  DriftEvaluation d(s);
  for (auto _ : state) {
    ctx.drift(u, d);
    benchmark::DoNotOptimize(d.scaled_norm);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DriftKsCutoff)->RangeMultiplier(2)->Range(16, 512)->Complexity(benchmark::oNLogN);

void BM_OuStep(benchmark::State& state) {
  const auto s = preset(static_cast<int>(state.range(0)));
  state.SetLabel(preset_name(static_cast<int>(state.range(0))));
  const OuPropagator prop(s, 1.0 / 512);
  RandomStream rs(3);
  std::vector<double> db(s->dof_count()), cv(s->dof_count());
  SpectralField z(s);
  for (auto _ : state) {
    prop.draw(rs, db, cv);
    prop.advance(z, cv);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_OuStep)->DenseRange(0, 2);

void BM_NonlinearStep(benchmark::State& state) {
  const auto s = preset(static_cast<int>(state.range(0)));
  state.SetLabel(preset_name(static_cast<int>(state.range(0))));
  const OuPropagator prop(s, 1.0 / 512);
  PseudospectralContext ctx(s);
  RandomStream rs(4);
  std::vector<double> db(s->dof_count()), cv(s->dof_count());
  auto u = sample_gaussian_field(s, Covariance::invariant(), rs);
  for (auto _ : state) {
    prop.draw(rs, db, cv);
    u = step_nonlinear(u, prop, cv, ctx);
  }
}
BENCHMARK(BM_NonlinearStep)->DenseRange(0, 2);

}  // namespace
