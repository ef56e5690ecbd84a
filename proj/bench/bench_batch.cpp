#include <benchmark/benchmark.h>

#include "nova/batch.hpp"
#include "nova/scenario.hpp"

using namespace nova;

namespace {

Scenario bench_scenario() {
  Json j = Json::parse(R"({"algorithms": ["nova", "pf-qnova", "pf-rm"], "clients": [8],
                           "seeds": {"first": 1, "count": 4}, "segments": 300})");
  return scenario_from_json(j);
}

void BM_single_run(benchmark::State& state) {
  Scenario s = bench_scenario();
  s.clients = {static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_one(s, {"nova", s.clients[0], 1}));
  state.SetItemsProcessed(state.iterations() * s.segments * state.range(0));
}
BENCHMARK(BM_single_run)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_batch_serial(benchmark::State& state) {
  Scenario s = bench_scenario();
  auto keys = expand_runs(s);
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_serial(s, keys));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(keys.size()));
}
BENCHMARK(BM_batch_serial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_batch_parallel(benchmark::State& state) {
  Scenario s = bench_scenario();
  auto keys = expand_runs(s);
  for (auto _ : state) benchmark::DoNotOptimize(run_batch_parallel(s, keys, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(keys.size()));
}
BENCHMARK(BM_batch_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
