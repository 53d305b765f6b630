#include "actloc/stays.hpp"

#include <algorithm>

namespace actloc {

namespace {

const char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string Occupancy144::to_hex() const {
  std::string s(36, '0');
  for (int nib = 0; nib < 36; ++nib) {
    int v = 0;
    for (int b = 0; b < 4; ++b) {
      if (test(nib * 4 + b)) v |= 8 >> b;
    }
    s[nib] = kHexDigits[v];
  }
  return s;
}

bool Occupancy144::from_hex(const std::string& hex, Occupancy144& out) {
  if (hex.size() != 36) return false;
  Occupancy144 o;
  for (int nib = 0; nib < 36; ++nib) {
    int v = hex_value(hex[nib]);
    if (v < 0) return false;
    for (int b = 0; b < 4; ++b) {
      if (v & (8 >> b)) o.set(nib * 4 + b);
    }
  }
  out = o;
  return true;
}

namespace {

struct Segment {
  GridIndex grid;
  std::int64_t first = 0;
  std::int64_t end = 0;  // exclusive, linearized
};

void emit(const Segment& seg, MidnightPolicy policy, int slots_per_day,
          std::vector<Stay>& stays, StayStats& stats) {
  auto emit_piece = [&](std::int64_t first, std::int64_t end) {
    std::int64_t dur = end - first;
    if (dur >= 2) {
      Stay st;
      st.grid = seg.grid;
      st.start = delinearize(first, slots_per_day);
      st.end = delinearize(end, slots_per_day);
      st.duration_slots = dur;
      if (dur >= slots_per_day) {
        st.occupancy.set_all();
      } else {
        for (std::int64_t off = first; off < end; ++off)
          st.occupancy.set(static_cast<int>(off % slots_per_day));
      }
      stats.stay_duration_slots += dur;
      stays.push_back(st);
    } else {
      ++stats.pass_bys;
      stats.pass_by_duration_slots += dur;
    }
  };

  if (policy == MidnightPolicy::kSplit) {
    std::int64_t first = seg.first;
    while (first < seg.end) {
      std::int64_t day_end = (first / slots_per_day + 1) * slots_per_day;
      emit_piece(first, std::min(seg.end, day_end));
      first = day_end;
    }
  } else {
    emit_piece(seg.first, seg.end);
  }
}

}  // namespace

std::vector<Stay> extract_stays(const std::vector<TracePoint>& points, MidnightPolicy policy,
                                std::int64_t max_gap_slots, StayStats* stats,
                                const GridConfig& cfg) {
  std::vector<Stay> stays;
  StayStats local;
  if (points.empty()) {
    if (stats) *stats = local;
    return stays;
  }
  const int spd = cfg.slots_per_day;

  Segment cur{points[0].grid, linearize(points[0].when, spd), 0};
  std::int64_t last = cur.first;

  for (std::size_t i = 1; i < points.size(); ++i) {
    std::int64_t lin = linearize(points[i].when, spd);
    std::int64_t gap = lin - last;
    if (points[i].grid == cur.grid && gap <= max_gap_slots) {
      last = lin;
      continue;
    }
    std::int64_t attributed = max_gap_slots == kUnlimitedGap ? gap : std::min(gap, max_gap_slots);
    cur.end = last + attributed;
    if (points[i].grid != cur.grid) cur.end = std::min(cur.end, lin);
    emit(cur, policy, spd, stays, local);
    cur = Segment{points[i].grid, lin, 0};
    last = lin;
  }
  cur.end = last + 1;
  emit(cur, policy, spd, stays, local);

  for (std::size_t i = 0; i < stays.size(); ++i)
    stays[i].id = static_cast<std::int32_t>(i);
  if (stats) *stats = local;
  return stays;
}

}  // namespace actloc
