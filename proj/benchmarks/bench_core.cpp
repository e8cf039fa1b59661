#include <benchmark/benchmark.h>

#include "hedge/corpus.hpp"
#include "hedge/gan.hpp"
#include "hedge/generator.hpp"
#include "hedge/neural.hpp"
#include "hedge/prep.hpp"
#include "hedge/transitions.hpp"

using namespace hedge;

namespace {

std::vector<std::vector<double>> unit_profiles(int n, int steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(steps)));
  for (auto& p : out) {
    double s = 0.0;
    for (double& v : p) s += (v = rng.uniform(0.1, 1.0));
    for (double& v : p) v /= s;
  }
  return out;
}

void BM_DenseForwardBackward(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  neural::DenseNet net({32, 64, 64, 24}, neural::Activation::relu, neural::Activation::sigmoid, 0.15);
  Rng rng(1);
  net.initialise(rng);
  neural::Matrix x = neural::Matrix::Random(32, batch);
  neural::Matrix upstream = neural::Matrix::Ones(24, batch);
  for (auto _ : state) {
    neural::ForwardCache cache;
    net.forward(x, cache, &rng);
    benchmark::DoNotOptimize(net.backward(cache, upstream));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_DenseForwardBackward)->Arg(50)->Arg(100);

void BM_PercentilePenaltyGrad(benchmark::State& state) {
  const auto pop = unit_profiles(50, 24, 2);
  gan::Matrix x(24, 50);
  for (int j = 0; j < 50; ++j)
    for (int t = 0; t < 24; ++t) x(t, j) = pop[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
  const auto targets = stats::population_bands(unit_profiles(500, 24, 3));
  for (auto _ : state) benchmark::DoNotOptimize(gan::percentile_penalty_grad(x, targets, 100.0));
}
BENCHMARK(BM_PercentilePenaltyGrad);

void BM_GanEpoch(benchmark::State& state) {
  const auto real = unit_profiles(500, 24, 4);
  gan::TrainConfig cfg;
  cfg.n_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(gan::train_gan(real, cfg));
}
BENCHMARK(BM_GanEpoch)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto points = unit_profiles(static_cast<int>(state.range(0)), 8, 5);
  for (auto _ : state) benchmark::DoNotOptimize(prep::kmeans_fit(points, {4, 1, 100, 10}));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PercentileBins(benchmark::State& state) {
  Rng rng(6);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (double& x : xs) x = rng.uniform(0.0, 30.0);
  for (auto _ : state) benchmark::DoNotOptimize(transitions::percentile_bins(xs, 50));
}
BENCHMARK(BM_PercentileBins)->Arg(12000);

void BM_SynthCorpus(benchmark::State& state) {
  const auto spec = corpus::reference_spec(20, 30, 30, 7);
  for (auto _ : state) benchmark::DoNotOptimize(corpus::synth_corpus(spec));
}
BENCHMARK(BM_SynthCorpus)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
