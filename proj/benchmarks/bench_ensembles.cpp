#include <benchmark/benchmark.h>

#include "spdelab/girsanov.hpp"

using namespace spdelab;

namespace {

GirsanovRun desk_run(std::size_t paths) {
  GirsanovRun run;
  run.initial = InitialCondition::invariant();
  run.paths = paths;
  run.threads = 1;
  return run;
}

// One forward Girsanov path at T = 0.25, dt = 1/512 (128 steps), per iteration.
void BM_GirsanovPath(benchmark::State& state) {
  const auto s = state.range(0) == 0 ? build_spectrum(ModelSpec::kuramoto_sivashinsky())
                                     : build_spectrum(ModelSpec::fractional_navier_stokes(2));
  state.SetLabel(state.range(0) == 0 ? "ks" : "ns2");
  auto run = desk_run(64);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    run.seed = ++seed;
    benchmark::DoNotOptimize(forward_weights(s, run));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(run.paths));
}
BENCHMARK(BM_GirsanovPath)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ReversePath(benchmark::State& state) {
  const auto s = build_spectrum(ModelSpec::kuramoto_sivashinsky());
  auto run = desk_run(64);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    run.seed = ++seed;
    benchmark::DoNotOptimize(reverse_weights(s, run));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(run.paths));
}
BENCHMARK(BM_ReversePath)->Unit(benchmark::kMillisecond);

void BM_LinearTerminalSamples(benchmark::State& state) {
  const auto s = build_spectrum(ModelSpec::kuramoto_sivashinsky());
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(linear_terminal_samples(s, InitialCondition::zero(), 0.5, 0.125, 1024, ++seed, 1));
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_LinearTerminalSamples)->Unit(benchmark::kMillisecond);

}  // namespace
