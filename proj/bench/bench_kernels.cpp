#include <benchmark/benchmark.h>

#include <cmath>

#include "axisym/biot_savart.hpp"
#include "axisym/semigroup.hpp"

using namespace axisym;

namespace {

ScalarField ring(const Grid& g) {
  return ScalarField::from_function(
      g, [](double r, double z) { return r * std::exp(-((r - 2) * (r - 2) + z * z)); }, Quantity::omega_theta);
}

// Plan construction is excluded: each run applies S(t) with a warm plan cache.
void semigroup_apply(benchmark::State& state, ConvPath path, Exec exec) {
  const int n = static_cast<int>(state.range(0));
  const Grid g(n, 2 * n, 12.0, 12.0);
  const Semigroup sg(g, path, exec);
  const ScalarField f = ring(g);
  benchmark::DoNotOptimize(sg.apply(0.5, f));
  for (auto _ : state) benchmark::DoNotOptimize(sg.apply(0.5, f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}

void biot_savart(benchmark::State& state, BSPath path, Exec exec) {
  const int n = static_cast<int>(state.range(0));
  const Grid g(n, 2 * n, 6.0, 6.0);
  const BiotSavart bs(g, path, SelfCell::analytic, exec);
  const ScalarField w = ring(g);
  benchmark::DoNotOptimize(bs.velocity(w));
  for (auto _ : state) benchmark::DoNotOptimize(bs.velocity(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}

}  // namespace

BENCHMARK_CAPTURE(semigroup_apply, fft_serial, ConvPath::fft, Exec::serial)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(semigroup_apply, fft_parallel, ConvPath::fft, Exec::parallel)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(semigroup_apply, direct_serial, ConvPath::direct, Exec::serial)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(semigroup_apply, direct_parallel, ConvPath::direct, Exec::parallel)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(biot_savart, naive_parallel, BSPath::naive, Exec::parallel)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(biot_savart, fft_serial, BSPath::fft, Exec::serial)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(biot_savart, fft_parallel, BSPath::fft, Exec::parallel)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(biot_savart, streaming_parallel, BSPath::streaming, Exec::parallel)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
