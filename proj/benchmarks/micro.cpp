#include <map>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <nmfem/nmfem.hpp>

namespace {

using namespace nmfem;

// Rows drawn from the default simulation regime, truncated to n rows.
const SimulatedData& dataset(int n) {
  static std::map<int, SimulatedData> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    SimulationSpec spec;
    spec.n = n;
    spec.seed = 1;
    it = cache.emplace(n, generate(spec)).first;
  }
  return it->second;
}

void BM_EStep(benchmark::State& state) {
  const auto& sim = dataset(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(e_step(sim.data, sim.true_model));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EStep)->Arg(500)->Arg(1500)->Arg(5000);

void BM_MStep(benchmark::State& state) {
  const auto& sim = dataset(1500);
  const auto resp = e_step(sim.data, sim.true_model);
  const auto mc = weighted_counts(sim.data, resp);
  Rng rng(2);
  const auto start = random_initial_model(rng, sim.data.M(), state.range(0), sim.true_model.K());
  FitConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(multiplicative_m_step(mc, start.dictionary(), start.loadings(), cfg));
  }
}
BENCHMARK(BM_MStep)->Arg(2)->Arg(4)->Arg(8);

void BM_FitNmfEm(benchmark::State& state) {
  const auto& sim = dataset(1500);
  FitConfig cfg;
  cfg.n_restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit(sim.data, 10, 4, cfg));
}
BENCHMARK(BM_FitNmfEm)->Unit(benchmark::kMillisecond);

void BM_FitPlainEm(benchmark::State& state) {
  const auto& sim = dataset(1500);
  FitConfig cfg;
  cfg.n_restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_plain_em(sim.data, 10, cfg));
}
BENCHMARK(BM_FitPlainEm)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto& sim = dataset(1500);
  for (auto _ : state) benchmark::DoNotOptimize(fit_kmeans(sim.data, 10, 3, 1));
}
BENCHMARK(BM_KMeans)->Unit(benchmark::kMillisecond);

void BM_Pairwise(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> label(0, 9);
  std::vector<int> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (auto& v : a) v = label(rng);
  for (auto& v : b) v = label(rng);
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_misclassification(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Pairwise)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
