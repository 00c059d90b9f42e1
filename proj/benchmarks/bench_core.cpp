#include "msvarfi/estimation.hpp"
#include "msvarfi/filter.hpp"
#include "msvarfi/infodecomp.hpp"
#include "msvarfi/simulate.hpp"
#include "msvarfi/state_space.hpp"

#include <benchmark/benchmark.h>

using namespace msvarfi;

namespace {

VarfiModel reference_model() {
  BenchmarkParams p;
  p.d_r = 0.1, p.d_s = 0.25, p.d_h = 0.45;
  return benchmark_var(p);
}

void BM_Periodogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = simulate_realization(reference_model(), n, 7, 50, 1000);
  const Vector row = x.data.row(0).transpose();
  for (auto _ : state) {
    benchmark::DoNotOptimize(periodogram({row.data(), n}));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Periodogram)->RangeMultiplier(4)->Range(1 << 10, 1 << 18)->Complexity();

void BM_VarmaToIss(benchmark::State& state) {
  const auto var = truncate_to_var(reference_model(), 50);
  const auto filt = fir_lowpass(48, scale_cutoff(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(varma_to_iss(var, filt));
}
BENCHMARK(BM_VarmaToIss)->Arg(1)->Arg(5);

void BM_DownsampleDare(benchmark::State& state) {
  const auto tau = static_cast<std::size_t>(state.range(0));
  const auto iss = varma_to_iss(truncate_to_var(reference_model(), 50), fir_lowpass(48, scale_cutoff(tau)));
  for (auto _ : state) benchmark::DoNotOptimize(downsample_iss(iss, tau));
}
BENCHMARK(BM_DownsampleDare)->Arg(2)->Arg(5)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_DecomposeScale(benchmark::State& state) {
  const auto model = reference_model();
  DecomposeConfig config;
  config.scales = {static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompose_multiscale(model, kChannelH, kChannelS, kChannelR, config));
  }
}
BENCHMARK(BM_DecomposeScale)->Arg(1)->Arg(2)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_FitVarfi(benchmark::State& state) {
  const auto x = simulate_realization(reference_model(), static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(fit_varfi(x.data, x.labels));
}
BENCHMARK(BM_FitVarfi)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
