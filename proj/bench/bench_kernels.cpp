#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>
#include <vector>

#include "egoscore/kernels.hpp"

namespace {

using namespace egoscore;

std::vector<double> random_vector(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(size);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <bool Parallel>
void BM_WalkContract(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto s = random_vector(n * n * d, 1);
  const auto f = random_vector(n * n * d * d, 2);
  std::vector<double> out(n * n * d);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::walk_contract(s, f, out, n, d, 1.0);
    } else {
      kernels::walk_contract_serial(s, f, out, n, d, 1.0);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["flops"] = benchmark::Counter(2.0 * static_cast<double>(n * n * n * d * d),
                                               benchmark::Counter::kIsIterationInvariantRate);
  state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
}

template <bool Parallel>
void BM_WalkContractGradState(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto dy = random_vector(n * n * d, 3);
  const auto f = random_vector(n * n * d * d, 4);
  std::vector<double> ds(n * n * d, 0.0);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::walk_contract_grad_state(dy, f, ds, n, d, 1.0);
    } else {
      kernels::walk_contract_grad_state_serial(dy, f, ds, n, d, 1.0);
    }
    benchmark::DoNotOptimize(ds.data());
  }
}

template <bool Parallel>
void BM_Linear(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t in = 32, out = 32;
  const auto x = random_vector(m * in, 5);
  const auto w = random_vector(in * out, 6);
  const auto b = random_vector(out, 7);
  std::vector<double> y(m * out);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::linear_forward(x, w, b, y, m, in, out);
    } else {
      kernels::linear_forward_serial(x, w, b, y, m, in, out);
    }
    benchmark::DoNotOptimize(y.data());
  }
}

void walk_sizes(benchmark::internal::Benchmark* b) {
  for (int n : {25, 50, 100, 200}) b->Args({n, 8});
}

BENCHMARK(BM_WalkContract<false>)->Apply(walk_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalkContract<true>)->Apply(walk_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalkContractGradState<false>)->Apply(walk_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalkContractGradState<true>)->Apply(walk_sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Linear<false>)->Arg(400)->Arg(10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Linear<true>)->Arg(400)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
