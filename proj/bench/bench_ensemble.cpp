// OpenMP ensemble runner against the serial reference.

#include <benchmark/benchmark.h>

#include "collapse/ensemble.hpp"
#include "collapse/interaction.hpp"
#include "collapse/two_level.hpp"

using namespace collapse;

namespace {

const DenseScenario& qubit() {
  static const DenseScenario s = two_level_scenario(TwoLevelSpec::from_beta2(0.3), HermitianOperator::zero(2));
  return s;
}

const Schedule kQubitSchedule{1e-3, 2000, 100, false};

void BM_QubitSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble_serial(qubit(), state.range(0), 1, kQubitSchedule));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QubitParallel(benchmark::State& state) {
  EnsembleOptions opts;
  opts.workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ensemble(qubit(), state.range(0), 1, kQubitSchedule, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

InteractionModel grid_model() {
  InteractionScenario s;
  s.grid = {16, 1.0, Boundary::periodic};
  s.potential = GaussianWell{1.0, 1.5};
  s.initial = ProductPackets{{4.0, 1.0, 1.0}, {12.0, 1.0, -0.5}};
  s.c2 = 0.1;
  return InteractionModel(s);
}

void BM_GridMeasurement(benchmark::State& state) {
  static const InteractionModel model = grid_model();
  EnsembleOptions opts;
  opts.workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_measurement(model, state.range(0), 1, {0.01, 300, 30, false}, {}, opts));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_QubitSerial)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_QubitParallel)->Args({256, 1})->Args({256, 2})->Args({256, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridMeasurement)->Args({32, 1})->Args({32, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
