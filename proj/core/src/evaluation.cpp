#include "actloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace actloc {

namespace {

constexpr int kDaytimeFirst = 36;   // 06:00
constexpr int kDaytimeEnd = 108;    // 18:00 exclusive
constexpr int kSlotsPerDay = 144;

}  // namespace

int Activity::daytime_overlap() const {
  return std::max(0, std::min<int>(end_slot, kDaytimeEnd) - std::max<int>(start_slot, kDaytimeFirst));
}

double cluster_radius(const ActivityLocation& loc, const std::vector<EvalStay>& stays) {
  if (loc.stay_ids.empty()) return 0.0;
  double sx = 0, sy = 0;
  for (std::int32_t sid : loc.stay_ids) {
    sx += stays[sid].point.x;
    sy += stays[sid].point.y;
  }
  double cx = sx / loc.stay_ids.size();
  double cy = sy / loc.stay_ids.size();
  double best = 0;
  for (std::int32_t sid : loc.stay_ids) {
    best = std::max(best, std::hypot(stays[sid].point.x - cx, stays[sid].point.y - cy));
  }
  return best;
}

std::vector<Activity> build_activities(const std::vector<EvalStay>& stays,
                                       const std::vector<std::int32_t>& assignment) {
  std::vector<Activity> out;
  std::size_t i = 0;
  while (i < stays.size()) {
    std::int32_t loc = assignment[i];
    std::int64_t run_start = stays[i].start_lin;
    std::int64_t run_end = stays[i].end_lin;
    std::size_t j = i + 1;
    while (j < stays.size() && assignment[j] == loc) {
      run_end = stays[j].end_lin;
      ++j;
    }
    std::int32_t first_day = static_cast<std::int32_t>(run_start / kSlotsPerDay);
    std::int32_t last_day = static_cast<std::int32_t>((run_end - 1) / kSlotsPerDay);
    for (std::int32_t d = first_day; d <= last_day; ++d) {
      std::int64_t day_begin = static_cast<std::int64_t>(d) * kSlotsPerDay;
      Activity a;
      a.location = loc;
      a.day = d;
      a.start_slot = static_cast<std::int32_t>(std::max(run_start, day_begin) - day_begin);
      a.end_slot =
          static_cast<std::int32_t>(std::min(run_end, day_begin + kSlotsPerDay) - day_begin);
      out.push_back(a);
    }
    i = j;
  }
  return out;
}

std::optional<std::int32_t> primary_daytime_location(const std::vector<Activity>& activities,
                                                     const GridConfig& cfg) {
  std::map<std::int32_t, std::int64_t> overlap;
  for (const Activity& a : activities) {
    if (!is_weekday(a.day, cfg)) continue;
    int ov = a.daytime_overlap();
    if (ov > 0) overlap[a.location] += ov;
  }
  std::optional<std::int32_t> best;
  std::int64_t best_ov = 0;
  for (const auto& [loc, ov] : overlap) {  // ascending loc: ties keep smaller id
    if (ov > best_ov) {
      best_ov = ov;
      best = loc;
    }
  }
  return best;
}

TimeVariance time_variance(const std::vector<Activity>& activities, std::int32_t location,
                           const GridConfig& cfg) {
  // Per qualifying weekday: earliest start and latest end, in hours.
  std::map<std::int32_t, std::pair<int, int>> by_day;
  for (const Activity& a : activities) {
    if (a.location != location || !is_weekday(a.day, cfg)) continue;
    auto [it, inserted] = by_day.emplace(a.day, std::make_pair(a.start_slot, a.end_slot));
    if (!inserted) {
      it->second.first = std::min(it->second.first, a.start_slot);
      it->second.second = std::max(it->second.second, a.end_slot);
    }
  }
  TimeVariance tv;
  tv.days = static_cast<int>(by_day.size());
  if (by_day.empty()) return tv;
  double ms = 0, me = 0;
  for (const auto& [day, se] : by_day) {
    ms += se.first / 6.0;
    me += se.second / 6.0;
  }
  ms /= by_day.size();
  me /= by_day.size();
  double vs = 0, ve = 0;
  for (const auto& [day, se] : by_day) {
    vs += (se.first / 6.0 - ms) * (se.first / 6.0 - ms);
    ve += (se.second / 6.0 - me) * (se.second / 6.0 - me);
  }
  tv.var_start_h2 = vs / by_day.size();  // population variance
  tv.var_end_h2 = ve / by_day.size();
  return tv;
}

int observable_days(const std::vector<Activity>& activities, std::int32_t location,
                    const GridConfig& cfg) {
  std::vector<std::int32_t> days;
  for (const Activity& a : activities) {
    if (a.location == location && is_weekday(a.day, cfg)) days.push_back(a.day);
  }
  std::sort(days.begin(), days.end());
  days.erase(std::unique(days.begin(), days.end()), days.end());
  return static_cast<int>(days.size());
}

double adjusted_rand_index(const std::vector<std::int32_t>& a,
                           const std::vector<std::int32_t>& b) {
  const std::size_t n = a.size();
  if (n == 0) return 1.0;
  std::unordered_map<std::int32_t, std::int32_t> amap, bmap;
  std::vector<std::int32_t> ai(n), bi(n);
  for (std::size_t i = 0; i < n; ++i) {
    ai[i] = amap.emplace(a[i], static_cast<std::int32_t>(amap.size())).first->second;
    bi[i] = bmap.emplace(b[i], static_cast<std::int32_t>(bmap.size())).first->second;
  }
  const std::size_t ka = amap.size(), kb = bmap.size();
  std::vector<std::int64_t> cnt(ka * kb, 0), ra(ka, 0), cb(kb, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++cnt[ai[i] * kb + bi[i]];
    ++ra[ai[i]];
    ++cb[bi[i]];
  }
  auto comb2 = [](std::int64_t x) { return static_cast<double>(x) * (x - 1) / 2.0; };
  double sum_ij = 0;
  for (std::int64_t c : cnt) sum_ij += comb2(c);
  double sum_a = 0, sum_b = 0;
  for (std::int64_t c : ra) sum_a += comb2(c);
  for (std::int64_t c : cb) sum_b += comb2(c);
  double total = comb2(static_cast<std::int64_t>(n));
  double expected = total > 0 ? sum_a * sum_b / total : 0.0;
  double max_index = 0.5 * (sum_a + sum_b);
  double denom = max_index - expected;
  if (denom == 0) return 1.0;  // both trivial partitions
  return (sum_ij - expected) / denom;
}

double ari_from_contingency(const std::vector<std::vector<std::int64_t>>& counts) {
  auto comb2 = [](std::int64_t x) { return static_cast<double>(x) * (x - 1) / 2.0; };
  std::int64_t n = 0;
  double sum_ij = 0;
  std::vector<std::int64_t> col_sums;
  double sum_rows = 0;
  for (const auto& row : counts) {
    std::int64_t r = 0;
    if (row.size() > col_sums.size()) col_sums.resize(row.size(), 0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      sum_ij += comb2(row[j]);
      col_sums[j] += row[j];
      r += row[j];
    }
    sum_rows += comb2(r);
    n += r;
  }
  double sum_cols = 0;
  for (std::int64_t c : col_sums) sum_cols += comb2(c);
  double total = comb2(n);
  double expected = total > 0 ? sum_rows * sum_cols / total : 0.0;
  double denom = 0.5 * (sum_rows + sum_cols) - expected;
  if (denom == 0) return 1.0;
  return (sum_ij - expected) / denom;
}

PerUserMetrics evaluate_user(const std::string& uid, const std::string& method,
                             const std::vector<EvalStay>& stays,
                             const std::vector<std::int32_t>& assignment,
                             const std::vector<ActivityLocation>& locations,
                             const GridConfig& cfg,
                             const std::vector<StayTruthCounts>* truth_counts) {
  PerUserMetrics m;
  m.uid = uid;
  m.method = method;
  for (const ActivityLocation& loc : locations) {
    double r = cluster_radius(loc, stays);
    m.radii.push_back(r);
    m.max_radius_m = std::max(m.max_radius_m, r);
  }
  std::vector<Activity> acts = build_activities(stays, assignment);
  auto primary = primary_daytime_location(acts, cfg);
  if (primary) {
    m.primary_location = *primary;
    TimeVariance tv = time_variance(acts, *primary, cfg);
    m.var_start_h2 = tv.var_start_h2;
    m.var_end_h2 = tv.var_end_h2;
    m.observable = observable_days(acts, *primary, cfg);
  }
  if (truth_counts) {
    std::int32_t n_labels = 0;
    for (const StayTruthCounts& sc : *truth_counts)
      for (const auto& [lab, cnt] : sc) n_labels = std::max(n_labels, lab + 1);
    std::vector<std::vector<std::int64_t>> cont(locations.size(),
                                                std::vector<std::int64_t>(n_labels, 0));
    std::int64_t total = 0;
    for (std::size_t i = 0; i < stays.size(); ++i) {
      if (assignment[i] < 0) continue;
      for (const auto& [lab, cnt] : (*truth_counts)[i]) {
        cont[assignment[i]][lab] += cnt;
        total += cnt;
      }
    }
    if (total > 0) m.ari = ari_from_contingency(cont);
  }
  return m;
}

}  // namespace actloc
