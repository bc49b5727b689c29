#include <benchmark/benchmark.h>

#include "landscape_lab/census.hpp"
#include "landscape_lab/dynamics.hpp"
#include "landscape_lab/gridsim.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/oddsmodel.hpp"

namespace ll = landscape_lab;

namespace {

ll::EnergyLandscape make_landscape(int dim, std::size_t n, double beta) {
  ll::BlobSpec spec;
  spec.class_counts = {n - n / 10, n / 10};
  spec.separation = 2.5;
  return ll::EnergyLandscape(ll::generate_blobs(dim, spec, 42), beta);
}

void BM_EnergyGradient(benchmark::State& state) {
  const auto land = make_landscape(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)), 10.0);
  ll::Vector x = ll::Vector::Constant(land.dim(), 0.3);
  ll::Vector g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(land.value_and_gradient(x, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_EnergyGradient)->Args({2, 10})->Args({2, 1000})->Args({8, 1000});

void BM_Flow(benchmark::State& state) {
  const auto land = make_landscape(2, static_cast<std::size_t>(state.range(0)), 10.0);
  const ll::Vector start = ll::Vector::Constant(2, 0.7);
  const ll::FlowConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ll::flow(land, start, cfg).terminal);
  }
}
BENCHMARK(BM_Flow)->Arg(10)->Arg(100);

void BM_Census(benchmark::State& state) {
  const auto land = make_landscape(2, 10, 10.0);
  const auto h = ll::AbstractionHierarchy::geometric(ll::DecoderFamily::kDiagonal, 4, 0.9, 2);
  ll::CensusConfig cfg;
  cfg.n_queries = 1000;
  cfg.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ll::run_census(land, h, cfg).size());
  }
}
BENCHMARK(BM_Census)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Coarsen(benchmark::State& state) {
  const auto grid = ll::init_grid(static_cast<int>(state.range(0)), 0.7, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ll::coarsen(grid, 2).red_share());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Coarsen)->Arg(512)->Arg(2048);

void BM_SimulateMerge(benchmark::State& state) {
  const ll::MergeScenario s{3, 1, 3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ll::simulate_merge(s, 100000, 5, static_cast<int>(state.range(0))).pure_a);
  }
}
BENCHMARK(BM_SimulateMerge)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
