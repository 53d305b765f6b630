#include <benchmark/benchmark.h>

#include <random>

#include "actloc/preprocess.hpp"
#include "actloc/stays.hpp"

using namespace actloc;

namespace {

std::vector<RawRecord> noisy_day(int n, std::uint64_t seed) {
  GridConfig cfg;
  std::mt19937_64 gen(seed);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  std::vector<RawRecord> recs;
  std::int64_t t = 0;
  double x = 5000, y = 5000;
  for (int i = 0; i < n; ++i) {
    t += static_cast<std::int64_t>(u(30, 600));
    if (u(0, 1) < 0.05) {
      // ping-pong bounce
      RawRecord r;
      local_to_lonlat(x + u(800, 2000), y, cfg, r.lon, r.lat);
      r.timestamp = t;
      recs.push_back(r);
      t += static_cast<std::int64_t>(u(10, 60));
    }
    x += u(-60, 60);
    y += u(-60, 60);
    RawRecord r;
    local_to_lonlat(x, y, cfg, r.lon, r.lat);
    r.timestamp = t;
    recs.push_back(r);
  }
  return recs;
}

}  // namespace

static void BM_filter_oscillations(benchmark::State& state) {
  GridConfig cfg;
  OscillationParams params;
  auto recs = noisy_day(static_cast<int>(state.range(0)), 42);
  for (auto _ : state) {
    auto out = filter_oscillations(recs, params, cfg);
    benchmark::DoNotOptimize(out.size());
  }
  state.SetItemsProcessed(state.iterations() * recs.size());
}
BENCHMARK(BM_filter_oscillations)->Arg(300)->Arg(3000);

static void BM_smooth_to_trace_points(benchmark::State& state) {
  GridConfig cfg;
  auto recs = noisy_day(static_cast<int>(state.range(0)), 43);
  for (auto _ : state) {
    auto out = smooth_to_trace_points(recs, cfg);
    benchmark::DoNotOptimize(out.size());
  }
  state.SetItemsProcessed(state.iterations() * recs.size());
}
BENCHMARK(BM_smooth_to_trace_points)->Arg(300)->Arg(3000);

static void BM_extract_stays(benchmark::State& state) {
  GridConfig cfg;
  auto recs = noisy_day(3000, 44);
  auto tps = smooth_to_trace_points(recs, cfg);
  for (auto _ : state) {
    auto stays = extract_stays(tps, MidnightPolicy::kWrap, kUnlimitedGap, nullptr, cfg);
    benchmark::DoNotOptimize(stays.size());
  }
  state.SetItemsProcessed(state.iterations() * tps.size());
}
BENCHMARK(BM_extract_stays);
