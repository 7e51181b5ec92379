// Serial vs parallel kernels: envelope bands over cluster members and
// hypothesis enumeration. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include "ops/common/rng.hpp"
#include "ops/predict/cluster.hpp"
#include "support/infer_fixtures.hpp"

using namespace ops;

namespace {

std::vector<simcore::Channel> random_channels(std::size_t members, std::size_t samples) {
  Rng rng(17, "bench.envelope");
  std::vector<simcore::Channel> out(members);
  for (auto& c : out) {
    double v = 100.0;
    for (std::size_t i = 0; i < samples; ++i) {
      v += rng.normal(0.0, 0.5);
      c.push_back({static_cast<double>(i), v});
    }
  }
  return out;
}

template <auto Kernel>
void envelope(benchmark::State& state) {
  const auto channels = random_channels(static_cast<std::size_t>(state.range(0)), 3600);
  std::vector<const simcore::Channel*> members;
  for (const auto& c : channels) members.push_back(&c);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(members, 10.0));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 3600);
}

void enumerate(benchmark::State& state, bool parallel) {
  const auto c = testing::detach_case(static_cast<int>(state.range(0)), 5, 3);
  for (auto _ : state) benchmark::DoNotOptimize(infer::enumerate_hypotheses(c.graph, 32, parallel));
}

}  // namespace

BENCHMARK(envelope<predict::envelope_serial>)->Name("envelope_serial")->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(envelope<predict::envelope_parallel>)->Name("envelope_parallel")->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(enumerate, serial, false)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(enumerate, parallel, true)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
