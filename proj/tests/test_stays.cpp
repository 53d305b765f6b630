#include "doctest.h"

#include <random>

#include "actloc/stays.hpp"

using namespace actloc;

namespace {

TracePoint tp(int day, int slot, int r, int c) {
  TracePoint p;
  p.when = SlotIndex{day, slot};
  p.grid = GridIndex{r, c};
  p.pos = LocalXY{(c + 0.5) * 500.0, (r + 0.5) * 500.0};
  return p;
}

}  // namespace

TEST_CASE("consecutive same-grid points merge; duration runs to the next grid") {
  std::vector<TracePoint> pts = {tp(0, 50, 10, 10), tp(0, 51, 10, 10), tp(0, 52, 10, 10),
                                 tp(0, 53, 10, 11)};
  StayStats stats;
  auto stays = extract_stays(pts, MidnightPolicy::kWrap, kUnlimitedGap, &stats);
  REQUIRE(stays.size() == 1);  // the trailing 1-slot segment is a pass-by
  CHECK(stays[0].grid == GridIndex{10, 10});
  CHECK(stays[0].start == SlotIndex{0, 50});
  CHECK(stays[0].end == SlotIndex{0, 53});
  CHECK(stays[0].duration_slots == 3);
  CHECK(stats.pass_bys == 1);
}

TEST_CASE("a 1-slot segment is exactly 10 minutes and becomes a pass-by") {
  std::vector<TracePoint> pts = {tp(0, 50, 5, 5), tp(0, 51, 6, 6), tp(0, 52, 6, 6),
                                 tp(0, 53, 6, 6)};
  StayStats stats;
  auto stays = extract_stays(pts, MidnightPolicy::kWrap, kUnlimitedGap, &stats);
  REQUIRE(stays.size() == 1);
  CHECK(stays[0].grid == GridIndex{6, 6});
  CHECK(stats.pass_bys == 1);
  CHECK(stats.pass_by_duration_slots == 1);
}

TEST_CASE("unlimited gap attribution extends a stay to the next sighting") {
  std::vector<TracePoint> pts = {tp(0, 50, 5, 5), tp(0, 80, 9, 9), tp(0, 81, 9, 9)};
  auto stays = extract_stays(pts, MidnightPolicy::kWrap, kUnlimitedGap);
  REQUIRE(stays.size() == 2);
  CHECK(stays[0].grid == GridIndex{5, 5});
  CHECK(stays[0].duration_slots == 30);
  CHECK(stays[0].end == SlotIndex{0, 80});
}

TEST_CASE("a gap cap limits the attributed duration") {
  std::vector<TracePoint> pts = {tp(0, 50, 5, 5), tp(0, 80, 9, 9), tp(0, 81, 9, 9)};
  auto stays = extract_stays(pts, MidnightPolicy::kWrap, 6);
  REQUIRE(stays.size() == 2);
  CHECK(stays[0].duration_slots == 6);

  // Same-grid points split when the hole exceeds the cap.
  std::vector<TracePoint> pts2 = {tp(0, 50, 5, 5), tp(0, 51, 5, 5), tp(0, 99, 5, 5),
                                  tp(0, 100, 5, 5)};
  auto stays2 = extract_stays(pts2, MidnightPolicy::kWrap, 6);
  REQUIRE(stays2.size() == 2);
  CHECK(stays2[0].start.slot == 50);
  CHECK(stays2[0].duration_slots == 1 + 6);
  CHECK(stays2[1].start.slot == 99);
}

TEST_CASE("empty input gives empty output") {
  CHECK(extract_stays({}, MidnightPolicy::kWrap).empty());
}

TEST_CASE("final segment ends after its last observed slot") {
  std::vector<TracePoint> pts = {tp(0, 10, 2, 2), tp(0, 11, 2, 2), tp(0, 12, 2, 2)};
  auto stays = extract_stays(pts, MidnightPolicy::kWrap);
  REQUIRE(stays.size() == 1);
  CHECK(stays[0].duration_slots == 3);
  CHECK(stays[0].end == SlotIndex{0, 13});
}

TEST_CASE("wrap keeps an overnight stay as one node with wrapped occupancy") {
  // 22:00 day 0 (slot 132) through 06:00 day 1 (exclusive slot 36).
  std::vector<TracePoint> pts;
  for (int s = 132; s < 144; ++s) pts.push_back(tp(0, s, 3, 3));
  for (int s = 0; s < 36; ++s) pts.push_back(tp(1, s, 3, 3));
  pts.push_back(tp(1, 36, 8, 8));
  auto stays = extract_stays(pts, MidnightPolicy::kWrap);
  REQUIRE(stays.size() >= 1);
  const Stay& st = stays[0];
  CHECK(st.start == SlotIndex{0, 132});
  CHECK(st.end == SlotIndex{1, 36});
  CHECK(st.duration_slots == 48);
  for (int s = 132; s < 144; ++s) CHECK(st.occupancy.test(s));
  for (int s = 0; s < 36; ++s) CHECK(st.occupancy.test(s));
  for (int s = 36; s < 132; ++s) CHECK_FALSE(st.occupancy.test(s));
}

TEST_CASE("split cuts at midnight before the duration test") {
  std::vector<TracePoint> pts;
  pts.push_back(tp(0, 143, 3, 3));
  pts.push_back(tp(1, 0, 3, 3));
  pts.push_back(tp(1, 1, 3, 3));
  pts.push_back(tp(1, 2, 9, 9));
  auto stays = extract_stays(pts, MidnightPolicy::kSplit);
  // Day-0 piece is 1 slot (pass-by); day-1 piece is 2 slots (stay).
  REQUIRE(stays.size() == 1);
  CHECK(stays[0].start == SlotIndex{1, 0});
  CHECK(stays[0].duration_slots == 2);
}

TEST_CASE("stays of 24h or more saturate the occupancy vector") {
  std::vector<TracePoint> pts;
  pts.push_back(tp(0, 10, 4, 4));
  pts.push_back(tp(2, 10, 4, 4));  // long same-grid hole, bridged
  pts.push_back(tp(2, 11, 4, 4));
  auto stays = extract_stays(pts, MidnightPolicy::kWrap);
  REQUIRE(stays.size() == 1);
  CHECK(stays[0].occupancy.count() == 144);
}

TEST_CASE("stays never overlap and conservation holds") {
  std::mt19937_64 gen(5);
  auto pick = [&](int n) { return static_cast<int>(gen() % n); };
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<TracePoint> pts;
    std::int64_t lin = pick(100);
    while (pts.size() < 300) {
      int r = pick(4), c = pick(4);
      int run = 1 + pick(6);
      for (int k = 0; k < run; ++k) {
        pts.push_back(tp(static_cast<int>(lin / 144), static_cast<int>(lin % 144), r, c));
        lin += 1 + (pick(10) == 0 ? pick(20) : 0);
      }
    }
    StayStats stats;
    auto stays = extract_stays(pts, MidnightPolicy::kWrap, kUnlimitedGap, &stats);
    for (std::size_t i = 0; i < stays.size(); ++i) {
      CHECK(stays[i].duration_slots >= 2);
      CHECK(stays[i].occupancy.count() >= 1);
      if (i) CHECK(stays[i - 1].end_lin() <= stays[i].start_lin());
    }
    // Total attributed slots = stays + pass-bys = full observed span.
    std::int64_t span = linearize(pts.back().when) + 1 - linearize(pts.front().when);
    CHECK(stats.stay_duration_slots + stats.pass_by_duration_slots == span);
  }
}

TEST_CASE("occupancy hex round trip and slot-0 significance") {
  Occupancy144 o;
  o.set(0);
  CHECK(Occupancy144().to_hex() == std::string(36, '0'));
  CHECK(o.to_hex()[0] == '8');
  o.set(1);
  CHECK(o.to_hex()[0] == 'c');
  o.set(143);
  CHECK(o.to_hex()[35] == '1');

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    Occupancy144 v;
    for (int s = 0; s < 144; ++s)
      if (gen() & 1) v.set(s);
    Occupancy144 back;
    REQUIRE(Occupancy144::from_hex(v.to_hex(), back));
    CHECK(back == v);
  }
}
