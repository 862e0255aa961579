#include <benchmark/benchmark.h>

#include <random>

#include "martlab/martingale.hpp"
#include "martlab/models.hpp"
#include "martlab/simulate.hpp"
#include "martlab/stats.hpp"

using namespace martlab;

namespace {

CausalLinearModel slow_geometric(std::size_t lag) {
  return {CoefficientSequence::geometric(0.995), InnovationSpace::rademacher(), lag};
}

CausalLinearModel log_divergent() {
  return {CoefficientSequence::log_power_law(1.0, 1.0), InnovationSpace::rademacher(), std::size_t{1} << 20};
}

}  // namespace

// Path engine: forced naive convolution against the automatic choice (block FFT for long lags).
static void BM_SamplePath(benchmark::State& state) {
  const ProcessModel model = slow_geometric(static_cast<std::size_t>(state.range(0)));
  PathOptions opt;
  opt.naive = state.range(1) == 0;
  const std::size_t n = 1 << 14;
  std::uint64_t r = 0;
  for (auto _ : state) {
    auto path = sample_path(model, n, Stream{7, r++}, opt);
    benchmark::DoNotOptimize(path.sums.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
  state.SetLabel(opt.naive ? "naive" : "auto");
}
BENCHMARK(BM_SamplePath)->ArgsProduct({{16, 128, 600, 4096}, {0, 1}})->Unit(benchmark::kMillisecond);

static void BM_ReplicateBatch(benchmark::State& state) {
  const ProcessModel model = CausalLinearModel(CoefficientSequence::geometric(0.5), InnovationSpace::normal());
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto b = replicate_batch(model, n, 1000, 3);
    benchmark::DoNotOptimize(b.records.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 1000 * n));
}
BENCHMARK(BM_ReplicateBatch)->Arg(256)->Arg(4096)->Unit(benchmark::kMillisecond);

// Coordinate oracle on the divergent example; O(n + L) per horizon.
static void BM_ExactVariance(benchmark::State& state) {
  const ProcessModel model = log_divergent();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(exact_variance(model, n));
}
BENCHMARK(BM_ExactVariance)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond);

static void BM_MaErrorExact(benchmark::State& state) {
  const ProcessModel model = CausalLinearModel(CoefficientSequence::geometric(0.5), InnovationSpace::rademacher(), 60);
  const auto d = gordin_increment(model, full_truncation(model));
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ma_error_exact(model, d, n));
}
BENCHMARK(BM_MaErrorExact)->RangeMultiplier(16)->Range(64, 16384);

static void BM_Criterion3(benchmark::State& state) {
  const ProcessModel model = CausalLinearModel(CoefficientSequence::geometric(0.5), InnovationSpace::rademacher(), 60);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(criterion3_statistic(model, 4, n));
}
BENCHMARK(BM_Criterion3)->RangeMultiplier(16)->Range(16, 4096);

static void BM_KsTest(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  const auto ref = normal_reference(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ks_test(x, ref));
}
BENCHMARK(BM_KsTest)->Arg(1000)->Arg(20000);

BENCHMARK_MAIN();
