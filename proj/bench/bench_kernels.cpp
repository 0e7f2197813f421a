// Serial reference vs OpenMP kernels, and serial vs parallel per-day batch
// gradients. Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fingat/ad/kernels.hpp"
#include "fingat/data/synth.hpp"
#include "fingat/train/sweep.hpp"
#include "fingat/train/trainer.hpp"

namespace {

using namespace fingat;

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <auto Kernel>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_buffer(n * n, 1), b = random_buffer(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}
BENCHMARK(BM_matmul<ad::kernels::matmul_serial>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_matmul<ad::kernels::matmul_parallel>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256);

template <auto Kernel>
void BM_matmul_grad_rhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_buffer(n * n, 3), g = random_buffer(n * n, 4);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, g, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
}
BENCHMARK(BM_matmul_grad_rhs<ad::kernels::matmul_grad_rhs_serial>)->Name("matmul_grad_rhs/serial")->Arg(128);
BENCHMARK(BM_matmul_grad_rhs<ad::kernels::matmul_grad_rhs_parallel>)->Name("matmul_grad_rhs/parallel")->Arg(128);

struct BatchFixture {
  data::InstanceCache cache;
  data::DatasetSplit split;
  BatchFixture() {
    auto market = data::generate_synthetic_market({});
    cache.catalog = market.catalog;
    cache.prices = std::move(market.prices);
    cache.instances = data::build_instances(cache.prices, cache.catalog, cache.options);
    split = train::make_split(cache, 3);
  }
};

void BM_batch_gradient(benchmark::State& state) {
  static const BatchFixture fx;
  const bool parallel = state.range(0) != 0;
  auto s = model::ModelState::init({});
  const auto params = s.parameters();
  std::vector<const data::InstanceWindow*> days;
  for (const auto& d : fx.split.train) days.push_back(&d);
  for (auto _ : state) {
    auto loss = train::batch_gradient(s, params, days, fx.cache.catalog, 0.01, parallel);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * days.size()));
  state.SetLabel(parallel ? "parallel days" : "serial days");
}
BENCHMARK(BM_batch_gradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
