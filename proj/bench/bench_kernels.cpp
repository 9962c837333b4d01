#include <benchmark/benchmark.h>

#include "xlhpe/baselines.hpp"
#include "xlhpe/experiment.hpp"
#include "xlhpe/parallel.hpp"
#include "xlhpe/scenario.hpp"

namespace {

xlhpe::ScenarioConfig scenario(int S, int M) {
  xlhpe::ScenarioConfig cfg;
  cfg.geometry.S = S;
  cfg.generator.M = M;
  cfg.generator.V = 1;
  xlhpe::refresh_geometry(cfg);
  return cfg;
}

void BM_ChannelSetSerial(benchmark::State& state) {
  const auto cfg = scenario(static_cast<int>(state.range(0)), 8);
  const auto users = xlhpe::resolve_users(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::reference::build_channel_set(cfg.geometry, users));
}

void BM_ChannelSetParallel(benchmark::State& state) {
  const auto cfg = scenario(static_cast<int>(state.range(0)), 8);
  const auto users = xlhpe::resolve_users(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::build_channel_set(cfg.geometry, users));
}

struct MapFixture {
  xlhpe::ScenarioConfig cfg = scenario(6, 3);
  std::vector<xlhpe::UserPosition> users = xlhpe::resolve_users(cfg);
  xlhpe::ChannelSet ch = xlhpe::build_channel_set(cfg.geometry, users);
  xlhpe::AllocationState alloc = xlhpe::AllocationState::equal_split(6, 3, 12.8);
  std::vector<xlhpe::Vec3> probes;

  explicit MapFixture(int res) {
    xlhpe::PlaneSpec plane;
    plane.resolution = res;
    probes = plane.probes();
  }
};

void BM_PowerMapSerial(benchmark::State& state) {
  const MapFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::reference::power_map(f.cfg.geometry, f.alloc, f.ch, f.probes));
}

void BM_PowerMapParallel(benchmark::State& state) {
  const MapFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::power_map(f.cfg.geometry, f.alloc, f.ch, f.probes));
}

void BM_ExhaustiveSerial(benchmark::State& state) {
  const auto cfg = scenario(static_cast<int>(state.range(0)), 3);
  const auto ch = xlhpe::build_channel_set(cfg.geometry, xlhpe::resolve_users(cfg));
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::reference::pa_es(ch, cfg.pa, cfg.power));
}

void BM_ExhaustiveParallel(benchmark::State& state) {
  const auto cfg = scenario(static_cast<int>(state.range(0)), 3);
  const auto ch = xlhpe::build_channel_set(cfg.geometry, xlhpe::resolve_users(cfg));
  for (auto _ : state) benchmark::DoNotOptimize(xlhpe::pa_es(ch, cfg.pa, cfg.power));
}

}  // namespace

BENCHMARK(BM_ChannelSetSerial)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChannelSetParallel)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerMapSerial)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerMapParallel)->Arg(41)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExhaustiveSerial)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExhaustiveParallel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  xlhpe::configure_workers_from_env();
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
