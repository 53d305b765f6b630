#include "actloc/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace actloc {

namespace {

double dist(const LocalXY& a, const LocalXY& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

std::vector<RawRecord> filter_oscillations(const std::vector<RawRecord>& records,
                                           const OscillationParams& params,
                                           const GridConfig& cfg,
                                           std::uint64_t* removed_count) {
  std::vector<RawRecord> cur = records;
  std::vector<LocalXY> pos(cur.size());
  for (std::size_t i = 0; i < cur.size(); ++i)
    pos[i] = project_to_local(cur[i].lon, cur[i].lat, cfg);

  std::uint64_t removed = 0;
  bool changed = true;
  while (changed && cur.size() >= 3) {
    changed = false;
    std::vector<RawRecord> next;
    std::vector<LocalXY> next_pos;
    next.reserve(cur.size());
    next_pos.reserve(cur.size());
    next.push_back(cur[0]);
    next_pos.push_back(pos[0]);
    std::size_t i = 1;
    while (i + 1 < cur.size()) {
      const LocalXY& prev = next_pos.back();               // surviving predecessor
      const std::int64_t t_prev = next.back().timestamp;
      const LocalXY& here = pos[i];
      const LocalXY& nxt = pos[i + 1];

      const double d_return = dist(prev, nxt);
      const double elapsed = static_cast<double>(cur[i + 1].timestamp - t_prev);
      bool returns = d_return <= params.return_radius && elapsed <= params.pingpong_window;

      bool flagged = false;
      if (returns) {
        const double d1 = dist(prev, here);
        const double d2 = dist(here, nxt);
        const double dt1 = static_cast<double>(cur[i].timestamp - t_prev);
        const double dt2 = static_cast<double>(cur[i + 1].timestamp - cur[i].timestamp);
        const double v1 = dt1 > 0 ? d1 / dt1 : (d1 > 0 ? 1e18 : 0.0);
        const double v2 = dt2 > 0 ? d2 / dt2 : (d2 > 0 ? 1e18 : 0.0);
        bool ratio_in_band =
            d2 > 0 && (d1 / d2) >= params.ratio_lo && (d1 / d2) <= params.ratio_hi;
        flagged = ratio_in_band || v1 > params.max_speed || v2 > params.max_speed;
      }

      if (flagged) {
        ++removed;
        changed = true;
        ++i;  // drop record i; i+1 is reconsidered against the same predecessor
      } else {
        next.push_back(cur[i]);
        next_pos.push_back(pos[i]);
        ++i;
      }
    }
    for (; i < cur.size(); ++i) {
      next.push_back(cur[i]);
      next_pos.push_back(pos[i]);
    }
    cur.swap(next);
    pos.swap(next_pos);
  }
  if (removed_count) *removed_count = removed;
  return cur;
}

std::vector<TracePoint> smooth_to_trace_points(const std::vector<RawRecord>& records,
                                               const GridConfig& cfg) {
  std::vector<TracePoint> out;
  if (records.empty()) return out;

  const int slot_sec = cfg.slot_seconds();

  // Accumulate per-slot weighted sums. Records arrive time-sorted, so slots
  // are produced in order and a small tail map is unnecessary: we emit a slot
  // once every record overlapping it has been folded in.
  struct Acc {
    std::int64_t lin_slot;
    double wx = 0, wy = 0, w = 0;
  };
  std::vector<Acc> open;  // ordered by lin_slot

  auto flush_until = [&](std::int64_t lin) {
    std::size_t k = 0;
    while (k < open.size() && open[k].lin_slot < lin) {
      const Acc& a = open[k];
      if (a.w > 0) {
        TracePoint tp;
        tp.when = delinearize(a.lin_slot, cfg.slots_per_day);
        tp.pos = LocalXY{a.wx / a.w, a.wy / a.w};
        tp.grid = cell_of(tp.pos, cfg);
        out.push_back(tp);
      }
      ++k;
    }
    open.erase(open.begin(), open.begin() + k);
  };

  auto add_span = [&](std::int64_t t0, std::int64_t t1, const LocalXY& p) {
    if (t1 <= t0) return;
    std::int64_t s0 = t0 / slot_sec;
    std::int64_t s1 = (t1 - 1) / slot_sec;
    for (std::int64_t s = s0; s <= s1; ++s) {
      std::int64_t slot_begin = s * slot_sec;
      std::int64_t slot_end = slot_begin + slot_sec;
      double overlap =
          static_cast<double>(std::min(t1, slot_end) - std::max(t0, slot_begin));
      if (overlap <= 0) continue;
      if (open.empty() || open.back().lin_slot < s) {
        open.push_back(Acc{s});
      }
      // The span's slots are contiguous; find the accumulator (usually last).
      Acc* acc = nullptr;
      for (auto it = open.rbegin(); it != open.rend(); ++it) {
        if (it->lin_slot == s) {
          acc = &*it;
          break;
        }
        if (it->lin_slot < s) break;
      }
      if (!acc) continue;
      acc->wx += overlap * p.x;
      acc->wy += overlap * p.y;
      acc->w += overlap;
    }
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const LocalXY p = project_to_local(records[i].lon, records[i].lat, cfg);
    std::int64_t t0 = records[i].timestamp;
    std::int64_t t1;
    if (i + 1 < records.size()) {
      t1 = records[i + 1].timestamp;
    } else {
      t1 = (t0 / slot_sec + 1) * slot_sec;  // truncate at the slot end
    }
    flush_until(t0 / slot_sec);
    add_span(t0, t1, p);
  }
  flush_until(std::numeric_limits<std::int64_t>::max());
  return out;
}

}  // namespace actloc
