#include "varan/bundles.hpp"
#include "varan/moreau.hpp"
#include "varan/secondorder.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace varan;

void BM_Prox1D(benchmark::State& state) {
  const FunctionHandle f = corpus_get("jump_square");
  const Vec z = Vec::Constant(1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(prox(f, 0.1, z));
}
BENCHMARK(BM_Prox1D);

void BM_Prox2D(benchmark::State& state) {
  const FunctionHandle f = corpus_get("pmax2");
  const Vec z = Vec::Constant(2, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(prox(f, 0.1, z));
}
BENCHMARK(BM_Prox2D);

void BM_D2(benchmark::State& state) {
  const FunctionHandle f = corpus_get("jump_square");
  const Vec x = Vec::Zero(1), v = Vec::Zero(1), w = Vec::Ones(1);
  for (auto _ : state) benchmark::DoNotOptimize(d2(f, x, v, w));
}
BENCHMARK(BM_D2);

void BM_QuadBundle(benchmark::State& state) {
  const FunctionHandle f = corpus_get("jump_square");
  const SubgradientPair a = make_pair(f, Vec::Zero(1), Vec::Zero(1));
  for (auto _ : state) benchmark::DoNotOptimize(quad_bundle(f, a));
}
BENCHMARK(BM_QuadBundle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
