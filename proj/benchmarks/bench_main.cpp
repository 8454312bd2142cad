#include <benchmark/benchmark.h>

#include "hsdma/discretize.hpp"
#include "hsdma/hybrid_sim.hpp"
#include "hsdma/loewner.hpp"
#include "hsdma/margin.hpp"
#include "hsdma/pipeline.hpp"

using namespace hsdma;

namespace {

ContinuousStateSpace plant() {
  Matrix a(2, 2), b(2, 1), c(1, 2);
  a << -10, -5, 4, 0;
  b << 0.5, 0;
  c << 0, 0.5;
  return {a, b, c, Matrix::Zero(1, 1)};
}

ContinuousStateSpace controller() {
  Matrix a(2, 2), b(2, 1), c(1, 2);
  a << -0.001, 7.854, 0, -62.83;
  b << 0, 8;
  c << 70, 235.6;
  return {a, b, c, Matrix::Zero(1, 1)};
}

void BM_EvalDiscrete(benchmark::State& state) {
  const auto cd = discretize::bilinear(controller(), 0.02);
  const Complex z = std::exp(Complex(0, 0.3));
  for (auto _ : state) benchmark::DoNotOptimize(eval_discrete(cd, z));
}
BENCHMARK(BM_EvalDiscrete);

void BM_Fit(benchmark::State& state) {
  const auto cd = discretize::bilinear(controller(), 0.02);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto data = pipeline::sample(cd, pipeline::make_grid(n, pipeline::Grid::log, 1e-3, 0.02));
  for (auto _ : state) benchmark::DoNotOptimize(loewner::fit_rational(data));
}
BENCHMARK(BM_Fit)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ContinuousMargin(benchmark::State& state) {
  const auto loop = margin::loop_transfer(plant(), controller());
  for (auto _ : state) benchmark::DoNotOptimize(margin::delay_margin(loop));
}
BENCHMARK(BM_ContinuousMargin)->Unit(benchmark::kMillisecond);

void BM_Hsdma(benchmark::State& state) {
  const auto cd = discretize::bilinear(controller(), 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(pipeline::hsdma(plant(), cd));
}
BENCHMARK(BM_Hsdma)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto cd = discretize::bilinear(controller(), 0.02);
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_hybrid(plant(), cd, 0.3));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
