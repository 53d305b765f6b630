#include <benchmark/benchmark.h>

#include <random>

#include "actloc/community.hpp"

using namespace actloc;

namespace {

// Planted two-community graph shaped like a per-user spatiotemporal graph:
// dense in-community cosine weights, a few weak cross edges.
WeightedGraph planted_graph(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto u = [&]() { return (gen() >> 11) * 0x1.0p-53; };
  WeightedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      bool same = (i < n / 2) == (j < n / 2);
      if (same && u() < 0.6) g.add_edge(i, j, 0.5 + 0.5 * u());
      else if (!same && u() < 0.03) g.add_edge(i, j, 0.05 * u());
    }
  }
  return g;
}

}  // namespace

static void BM_louvain(benchmark::State& state) {
  WeightedGraph g = planted_graph(static_cast<int>(state.range(0)), 12345);
  for (auto _ : state) {
    LouvainResult res = louvain(g);
    benchmark::DoNotOptimize(res.modularity);
  }
}
BENCHMARK(BM_louvain)->Arg(50)->Arg(150)->Arg(400);

static void BM_modularity(benchmark::State& state) {
  WeightedGraph g = planted_graph(static_cast<int>(state.range(0)), 999);
  Partition p = Partition::singletons(g.size());
  for (std::int32_t i = 0; i < g.size(); ++i) p.assignment[i] = i % 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(modularity(g, p));
  }
}
BENCHMARK(BM_modularity)->Arg(150)->Arg(400);

static void BM_cosine_cooccurrence(benchmark::State& state) {
  std::mt19937_64 gen(7);
  Occupancy144 a, b;
  for (int s = 0; s < 144; ++s) {
    if (gen() & 1) a.set(s);
    if (gen() & 1) b.set(s);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine_cooccurrence(a, b));
  }
}
BENCHMARK(BM_cosine_cooccurrence);
