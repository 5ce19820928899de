#include <benchmark/benchmark.h>

#include "pwcc/bilateral.hpp"
#include "pwcc/color.hpp"
#include "pwcc/estimator.hpp"
#include "pwcc/losses.hpp"
#include "pwcc/rng.hpp"

using namespace pwcc;

namespace {

template <class Buf>
Buf random_buffer(int side, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Buf b(side, side);
  for (double& v : b.data()) v = rng.uniform(lo, hi);
  return b;
}

void BM_Forward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const EstimatorParams p = init_params(1);
  const auto in = random_buffer<ChromaImage>(side, 2, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(forward(p, in).pred);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64)->Arg(128);

// One training step: forward, combined loss and backward.
void BM_TrainStep(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const EstimatorParams p = init_params(1);
  const auto in = random_buffer<ChromaImage>(side, 2, -1.0, 1.0);
  const auto target = random_buffer<ChromaImage>(side, 3, -1.0, 1.0);
  for (auto _ : state) {
    auto fwd = forward(p, in);
    const CombinedLoss loss = combined_loss(fwd.pred, target, 2e-3);
    benchmark::DoNotOptimize(backward(p, fwd.cache, loss.grad));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainStep)->Arg(16)->Arg(64);

void BM_Bilateral(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto map = random_buffer<IlluminationMap>(side, 4, 0.3, 3.0);
  const BilateralConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(apply_postfilter(map, cfg));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Bilateral)->Arg(64)->Arg(256);

void BM_TotalVariation(benchmark::State& state) {
  const auto p = random_buffer<ChromaImage>(64, 5, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(tv_loss(p));
}
BENCHMARK(BM_TotalVariation);

}  // namespace
BENCHMARK_MAIN();
