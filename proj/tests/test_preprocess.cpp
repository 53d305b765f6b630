#include "doctest.h"

#include <cmath>
#include <random>

#include "actloc/preprocess.hpp"

using namespace actloc;

namespace {

GridConfig kCfg;

RawRecord rec_at(std::int64_t t, double x, double y) {
  RawRecord r;
  r.timestamp = t;
  local_to_lonlat(x, y, kCfg, r.lon, r.lat);
  return r;
}

}  // namespace

TEST_CASE("A-B-A bounce removes the middle record") {
  OscillationParams params;
  std::vector<RawRecord> recs = {rec_at(0, 0, 0), rec_at(30, 2000, 0), rec_at(60, 0, 0)};
  std::uint64_t removed = 0;
  auto out = filter_oscillations(recs, params, kCfg, &removed);
  REQUIRE(out.size() == 2);
  CHECK(removed == 1);
  CHECK(out[0].timestamp == 0);
  CHECK(out[1].timestamp == 60);
}

TEST_CASE("constant tower sequence passes unchanged") {
  OscillationParams params;
  std::vector<RawRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(rec_at(i * 60, 100, 100));
  auto out = filter_oscillations(recs, params, kCfg);
  CHECK(out.size() == recs.size());
}

TEST_CASE("a walk under max speed with no returns passes unchanged") {
  OscillationParams params;
  // 1.5 m/s across three towers, never returning.
  std::vector<RawRecord> recs = {rec_at(0, 0, 0), rec_at(400, 600, 0), rec_at(800, 1200, 0)};
  auto out = filter_oscillations(recs, params, kCfg);
  CHECK(out.size() == 3);
}

TEST_CASE("short sequences pass through") {
  OscillationParams params;
  std::vector<RawRecord> recs = {rec_at(0, 0, 0), rec_at(30, 5000, 0)};
  CHECK(filter_oscillations(recs, params, kCfg).size() == 2);
  CHECK(filter_oscillations({}, params, kCfg).empty());
}

TEST_CASE("slow round trip is kept (window exceeded)") {
  OscillationParams params;
  // Leaves and returns, but over 30 minutes: genuine movement.
  std::vector<RawRecord> recs = {rec_at(0, 0, 0), rec_at(900, 2000, 0), rec_at(1800, 0, 0)};
  CHECK(filter_oscillations(recs, params, kCfg).size() == 3);
}

TEST_CASE("filter is idempotent on random noisy sequences") {
  OscillationParams params;
  std::mt19937_64 gen(7);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RawRecord> recs;
    std::int64_t t = 0;
    double x = 0, y = 0;
    for (int i = 0; i < 120; ++i) {
      t += static_cast<std::int64_t>(u(5, 400));
      if (u(0, 1) < 0.3) {
        // Bounce far away and (usually) back.
        recs.push_back(rec_at(t, x + u(500, 2500), y + u(-500, 500)));
      } else {
        x += u(-120, 120);
        y += u(-120, 120);
        recs.push_back(rec_at(t, x, y));
      }
    }
    auto once = filter_oscillations(recs, params, kCfg);
    auto twice = filter_oscillations(once, params, kCfg);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i)
      CHECK(once[i].timestamp == twice[i].timestamp);
  }
}

TEST_CASE("two records in one slot average by duration") {
  // 300 s at (0,0) then 300 s at (1000,0), both inside slot 35.
  std::vector<RawRecord> recs = {rec_at(35 * 600, 0, 0), rec_at(35 * 600 + 300, 1000, 0)};
  auto tps = smooth_to_trace_points(recs, kCfg);
  REQUIRE(tps.size() == 1);
  CHECK(tps[0].when == SlotIndex{0, 35});
  CHECK(tps[0].pos.x == doctest::Approx(500.0));
  CHECK(tps[0].pos.y == doctest::Approx(0.0));
}

TEST_CASE("a record spanning slots fills every slot it overlaps") {
  // One record at the start of slot 10; the next 3 slots later at another
  // tower. The first tower owns slots 10, 11, 12.
  std::vector<RawRecord> recs = {rec_at(10 * 600, 700, 700), rec_at(13 * 600, 5000, 5000)};
  auto tps = smooth_to_trace_points(recs, kCfg);
  REQUIRE(tps.size() == 4);
  for (int i = 0; i < 3; ++i) {
    CHECK(tps[i].when == SlotIndex{0, 10 + i});
    CHECK(tps[i].pos.x == doctest::Approx(700.0));
  }
  CHECK(tps[3].when == SlotIndex{0, 13});
}

TEST_CASE("single mid-slot record yields one trace point at the tower") {
  std::vector<RawRecord> recs = {rec_at(35 * 600 + 123, 800, -300)};
  auto tps = smooth_to_trace_points(recs, kCfg);
  REQUIRE(tps.size() == 1);
  CHECK(tps[0].when == SlotIndex{0, 35});
  CHECK(tps[0].pos.x == doctest::Approx(800.0));
  CHECK(tps[0].pos.y == doctest::Approx(-300.0));
  CHECK(tps[0].grid == GridIndex{-1, 1});
}

TEST_CASE("smoothing conserves attributed duration and slot uniqueness") {
  std::mt19937_64 gen(11);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RawRecord> recs;
    std::int64_t t = static_cast<std::int64_t>(u(0, 3000));
    for (int i = 0; i < 200; ++i) {
      recs.push_back(rec_at(t, u(-3000, 3000), u(-3000, 3000)));
      t += static_cast<std::int64_t>(u(1, 2500));
    }
    auto tps = smooth_to_trace_points(recs, kCfg);

    // Uniqueness and ordering of (day, slot).
    for (std::size_t i = 1; i < tps.size(); ++i)
      CHECK(linearize(tps[i - 1].when) < linearize(tps[i].when));

    // Conservation: span from first record to the last record's slot end.
    std::int64_t span_end = (recs.back().timestamp / 600 + 1) * 600;
    double expected = static_cast<double>(span_end - recs.front().timestamp);
    // Recompute total attributed weight by summing slot overlaps.
    double total = 0;
    for (std::size_t i = 0; i < tps.size(); ++i) {
      // Each occupied slot contributes exactly its covered seconds; covered
      // seconds equal slot length except possibly at the two ends.
      (void)i;
    }
    // The trace points do not expose weights; conservation is checked via
    // coverage: every slot between the first and the last must be present.
    std::int64_t first_slot = recs.front().timestamp / 600;
    std::int64_t last_slot = recs.back().timestamp / 600;
    CHECK(linearize(tps.front().when) == first_slot);
    CHECK(linearize(tps.back().when) == last_slot);
    CHECK(static_cast<std::int64_t>(tps.size()) == last_slot - first_slot + 1);
    CHECK(expected > 0);
    (void)total;
  }
}

TEST_CASE("weighted mean stays inside the convex hull of contributors") {
  std::mt19937_64 gen(13);
  auto u = [&](double lo, double hi) {
    return lo + (hi - lo) * ((gen() >> 11) * 0x1.0p-53);
  };
  std::vector<RawRecord> recs;
  std::int64_t t = 100;
  double lo_x = 1e18, hi_x = -1e18, lo_y = 1e18, hi_y = -1e18;
  for (int i = 0; i < 50; ++i) {
    double x = u(-2000, 2000), y = u(-2000, 2000);
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, y);
    hi_y = std::max(hi_y, y);
    recs.push_back(rec_at(t, x, y));
    t += static_cast<std::int64_t>(u(10, 900));
  }
  for (const TracePoint& tp : smooth_to_trace_points(recs, kCfg)) {
    CHECK(tp.pos.x >= lo_x - 1e-9);
    CHECK(tp.pos.x <= hi_x + 1e-9);
    CHECK(tp.pos.y >= lo_y - 1e-9);
    CHECK(tp.pos.y <= hi_y + 1e-9);
    CHECK(cell_of(tp.pos, kCfg) == tp.grid);
  }
}
