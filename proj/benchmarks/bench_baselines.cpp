#include <benchmark/benchmark.h>

#include <random>

#include "actloc/baselines.hpp"

using namespace actloc;

namespace {

// Trace points shaped like two weeks of dwells around a few anchors.
std::vector<TracePoint> anchored_points(int n, std::uint64_t seed) {
  GridConfig cfg;
  std::mt19937_64 gen(seed);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  double ax[3] = {2000, 2600, 9000};
  double ay[3] = {2000, 2400, 9500};
  std::vector<TracePoint> pts;
  std::int64_t lin = 0;
  while (static_cast<int>(pts.size()) < n) {
    int a = static_cast<int>(gen() % 3);
    int run = 3 + static_cast<int>(gen() % 40);
    for (int i = 0; i < run && static_cast<int>(pts.size()) < n; ++i) {
      TracePoint tp;
      tp.when = delinearize(lin++);
      tp.pos = LocalXY{ax[a] + u(-400, 400), ay[a] + u(-400, 400)};
      tp.grid = cell_of(tp.pos, cfg);
      pts.push_back(tp);
    }
    lin += gen() % 4;
  }
  return pts;
}

}  // namespace

static void BM_dbscan_identify(benchmark::State& state) {
  GridConfig grid;
  BaselineConfig cfg;
  auto pts = anchored_points(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) {
    auto res = dbscan_identify(pts, cfg, grid);
    benchmark::DoNotOptimize(res.locations.size());
  }
  state.SetItemsProcessed(state.iterations() * pts.size());
}
BENCHMARK(BM_dbscan_identify)->Arg(500)->Arg(2000);

static void BM_spatial_constraint_identify(benchmark::State& state) {
  GridConfig grid;
  BaselineConfig cfg;
  auto pts = anchored_points(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) {
    auto res = spatial_constraint_identify(pts, cfg, grid);
    benchmark::DoNotOptimize(res.locations.size());
  }
  state.SetItemsProcessed(state.iterations() * pts.size());
}
BENCHMARK(BM_spatial_constraint_identify)->Arg(500)->Arg(2000);
