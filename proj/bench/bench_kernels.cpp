// Serial reference kernels against the OpenMP versions on DC-SBM graphs.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rlap/graph.hpp"
#include "rlap/kernels.hpp"

namespace k = rlap::kernels;

namespace {

const rlap::SparseGraph& graph_of_size(rlap::NodeId n) {
  static std::vector<std::pair<rlap::NodeId, rlap::GeneratedGraph>> cache;
  for (const auto& [size, gen] : cache)
    if (size == n) return gen.graph;
  cache.emplace_back(
      n, rlap::generate_dcsbm(rlap::DcsbmConfig::planted(n, 2, 17, 3, rlap::ThetaSpec::uniform_power(3, 15, 5)), 1));
  return cache.back().second.graph;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

template <bool Parallel>
void BM_BetheHessianMultiply(benchmark::State& state) {
  const auto& g = graph_of_size(static_cast<rlap::NodeId>(state.range(0)));
  const auto n = static_cast<std::size_t>(g.num_nodes());
  const auto x = random_vector(n, 2);
  std::vector<double> y(n);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::bethe_hessian_multiply(g, 1.4, x, y);
    else
      k::serial::bethe_hessian_multiply(g, 1.4, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * (g.num_edges() * 2 + g.num_nodes()));
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n, 3);
  const auto y = random_vector(n, 4);
  for (auto _ : state) {
    double d = Parallel ? k::dot(x, y) : k::serial::dot(x, y);
    benchmark::DoNotOptimize(d);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_Project(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 40;
  const auto basis = random_vector(n * m, 5);
  const auto w = random_vector(n, 6);
  std::vector<double> c(m);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::project(basis, n, m, w, c);
    else
      k::serial::project(basis, n, m, w, c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * m));
}

}  // namespace

BENCHMARK(BM_BetheHessianMultiply<false>)->Name("bethe_hessian_multiply/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_BetheHessianMultiply<true>)->Name("bethe_hessian_multiply/omp")->Arg(10000)->Arg(100000);
BENCHMARK(BM_Dot<false>)->Name("dot/serial")->Arg(100000)->Arg(1000000);
BENCHMARK(BM_Dot<true>)->Name("dot/omp")->Arg(100000)->Arg(1000000);
BENCHMARK(BM_Project<false>)->Name("project40/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_Project<true>)->Name("project40/omp")->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
