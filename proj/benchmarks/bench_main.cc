#include <benchmark/benchmark.h>

#include <vector>

#include "recurtune/bandit.h"
#include "recurtune/cost.h"
#include "recurtune/generator.h"
#include "recurtune/sim.h"

namespace recurtune {
namespace {

const TraceBundle& Balanced() {
  static const TraceBundle bundle = GenerateSynthetic(Preset("balanced-6x5"), 1);
  return bundle;
}

const TraceBundle& Deepspeech() {
  static const TraceBundle bundle = GenerateSynthetic(Preset("deepspeech2-like"), 1);
  return bundle;
}

void BM_BruteForceOptimum(benchmark::State& state) {
  const auto& bundle = Deepspeech();
  const auto expected = MeanConvergedEpochs(bundle.training());
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BruteForceOptimum(expected, bundle.power(), 0.5, bundle.metadata().max_power));
  }
}
BENCHMARK(BM_BruteForceOptimum);

void BM_ParetoFront(benchmark::State& state) {
  const auto& bundle = Deepspeech();
  const auto points = GridPoints(MeanConvergedEpochs(bundle.training()), bundle.power());
  for (auto _ : state) benchmark::DoNotOptimize(ParetoFront(points));
}
BENCHMARK(BM_ParetoFront);

void BM_ThompsonPredict(benchmark::State& state) {
  Rng rng(1);
  std::vector<ArmState> arms;
  for (int i = 0; i < state.range(0); ++i) {
    arms.push_back(SeedArm(MakeArm(i, 10), std::vector<double>{100.0 + i, 110.0 + i, 95.0}));
  }
  for (auto _ : state) benchmark::DoNotOptimize(Predict(arms, rng));
}
BENCHMARK(BM_ThompsonPredict)->Arg(4)->Arg(16)->Arg(64);

void BM_Observe(benchmark::State& state) {
  auto arm = SeedArm(MakeArm(1, static_cast<std::size_t>(state.range(0))),
                     std::vector<double>{100.0, 110.0});
  double x = 100.0;
  for (auto _ : state) {
    arm = Observe(std::move(arm), x);
    x = x < 120.0 ? x + 1.0 : 100.0;
  }
}
BENCHMARK(BM_Observe)->Arg(10)->Arg(100);

void BM_Experiment(benchmark::State& state) {
  const auto& bundle = state.range(0) == 0 ? Balanced() : Deepspeech();
  const auto kind = static_cast<PolicyKind>(state.range(1));
  const int t = static_cast<int>(2 * bundle.batch_sizes().size() * bundle.power_limits().size());
  const auto job = JobFromBundle(bundle, 0.5, 2.0, t, std::nullopt, 1);
  for (auto _ : state) benchmark::DoNotOptimize(RunExperiment(job, bundle, kind));
  state.SetItemsProcessed(state.iterations() * t);
}
BENCHMARK(BM_Experiment)
    ->ArgNames({"deepspeech", "policy"})
    ->ArgsProduct({{0, 1}, {0, 1, 2}});

void BM_GenerateSynthetic(benchmark::State& state) {
  const auto params = Preset("deepspeech2-like");
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(GenerateSynthetic(params, ++seed));
}
BENCHMARK(BM_GenerateSynthetic);

}  // namespace
}  // namespace recurtune

// The packaged benchmark_main archive is LTO bytecode tied to one compiler
// version, so the shared library plus our own main is used instead.
BENCHMARK_MAIN();
