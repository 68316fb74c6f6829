#include <benchmark/benchmark.h>

#include "immsim/convolution.hpp"
#include "immsim/kinetic.hpp"
#include "immsim/microsim.hpp"

namespace {

using namespace immsim;

ScalarField ramp(const TorusDomain& dom) {
  ScalarField rho(dom);
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 0.5 + 0.001 * static_cast<double>(i % 97);
  return rho;
}

void convolution_bench(benchmark::State& state, ConvolutionBackend backend, int dim) {
  const TorusDomain dom(dim, 10.0, static_cast<int>(state.range(0)));
  const Convolver conv(discretize(Potential::gaussian(1.0, 0.5, 2.0), dom));
  const ScalarField rho = ramp(dom);
  for (auto _ : state) benchmark::DoNotOptimize(conv.apply(rho, backend));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(dom.cell_count()));
}

void BM_convolution_fft_1d(benchmark::State& s) { convolution_bench(s, ConvolutionBackend::fft, 1); }
void BM_convolution_direct_1d(benchmark::State& s) { convolution_bench(s, ConvolutionBackend::direct, 1); }
void BM_convolution_fft_2d(benchmark::State& s) { convolution_bench(s, ConvolutionBackend::fft, 2); }
void BM_convolution_direct_2d(benchmark::State& s) { convolution_bench(s, ConvolutionBackend::direct, 2); }

void BM_rk4_step(benchmark::State& state) {
  KineticConfig cfg;
  cfg.domain = TorusDomain(1, 10.0, static_cast<int>(state.range(0)));
  cfg.potential = Potential::tophat(1.0, 0.5);
  cfg.rate = RateField::sinusoid(1.0, 0.5, {1, 0}, 10.0);
  cfg.dt = 0.01;
  cfg.t_end = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(solve(cfg));
}

void BM_simulate(benchmark::State& state) {
  const MicroModel model{TorusDomain(1, 10.0, 100), RateField::constant(1.0), Potential::tophat(1.0, 1.0)};
  const double t_end = static_cast<double>(state.range(0));
  std::uint64_t replica = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(model, t_end, 7, replica++));
}

}  // namespace

BENCHMARK(BM_convolution_fft_1d)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_convolution_direct_1d)->RangeMultiplier(4)->Range(64, 1024)->Complexity();
BENCHMARK(BM_convolution_fft_2d)->RangeMultiplier(2)->Range(16, 128);
BENCHMARK(BM_convolution_direct_2d)->RangeMultiplier(2)->Range(16, 32);
BENCHMARK(BM_rk4_step)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_simulate)->Arg(10)->Arg(100);
BENCHMARK_MAIN();
