#include <benchmark/benchmark.h>

#include "lorcone/cone.hpp"
#include "lorcone/numeric.hpp"

using namespace lorcone;

namespace {

// Arguments: time steps, fiber distance steps.
template <TableKernel Kernel>
void BM_tables(benchmark::State& state) {
  const auto steps = std::size_t(state.range(0));
  const auto R = std::size_t(state.range(1));
  auto f = presets::cos(-kPi / 2, kPi / 2, steps);
  ConeOptions opt;
  opt.distSteps = R;
  for (auto _ : state) {
    auto tab = build_tau_tables(f, 1.0 / double(R), R, opt, Kernel);
    benchmark::DoNotOptimize(tab.lo_data().data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(steps * steps / 2 * (R + 1)));
}

}  // namespace

BENCHMARK(BM_tables<TableKernel::Serial>)->Args({100, 50})->Args({200, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tables<TableKernel::Parallel>)->Args({100, 50})->Args({200, 100})->Unit(benchmark::kMillisecond)->UseRealTime();
// The pull-style kernel only serves as a cross-check; keep it small.
BENCHMARK(BM_tables<TableKernel::Reference>)->Args({40, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tables<TableKernel::Serial>)->Args({40, 20})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
