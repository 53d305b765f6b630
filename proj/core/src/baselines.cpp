#include "actloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace actloc {

namespace {

double dist2(const LocalXY& a, const LocalXY& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

GridIndex cell_of_size(const LocalXY& p, double size) {
  GridIndex g;
  g.c = static_cast<std::int32_t>(std::floor(p.x / size));
  g.r = static_cast<std::int32_t>(std::floor(p.y / size));
  return g;
}

// Shared location assembly: group stays by cluster label, build locations,
// order by descending total duration (ties: smallest member stay id).
BaselineResult assemble(std::vector<BaselineStay> stays, const std::vector<std::int32_t>& label,
                        std::int32_t n_labels, double cell_size) {
  BaselineResult out;
  out.stays = std::move(stays);
  std::vector<ActivityLocation> locs(n_labels);
  for (std::size_t i = 0; i < out.stays.size(); ++i) {
    ActivityLocation& loc = locs[label[i]];
    loc.stay_ids.push_back(out.stays[i].id);
    loc.total_duration_slots += out.stays[i].duration_slots();
  }
  locs.erase(std::remove_if(locs.begin(), locs.end(),
                            [](const ActivityLocation& l) { return l.stay_ids.empty(); }),
             locs.end());
  for (auto& loc : locs) {
    double sx = 0, sy = 0;
    std::vector<GridIndex> cells;
    for (std::int32_t sid : loc.stay_ids) {
      const BaselineStay& st = out.stays[sid];
      sx += (st.grid.c + 0.5) * cell_size;
      sy += (st.grid.r + 0.5) * cell_size;
      cells.push_back(st.grid);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    loc.cells = std::move(cells);
    loc.centroid = LocalXY{sx / loc.stay_ids.size(), sy / loc.stay_ids.size()};
  }
  std::sort(locs.begin(), locs.end(), [](const ActivityLocation& a, const ActivityLocation& b) {
    if (a.total_duration_slots != b.total_duration_slots)
      return a.total_duration_slots > b.total_duration_slots;
    return a.stay_ids.front() < b.stay_ids.front();
  });
  out.assignment.assign(out.stays.size(), -1);
  for (std::size_t li = 0; li < locs.size(); ++li) {
    locs[li].id = static_cast<std::int32_t>(li);
    for (std::int32_t sid : locs[li].stay_ids)
      out.assignment[sid] = static_cast<std::int32_t>(li);
  }
  out.locations = std::move(locs);
  return out;
}

}  // namespace

BaselineResult spatial_constraint_identify(const std::vector<TracePoint>& points,
                                           const BaselineConfig& cfg,
                                           const GridConfig& grid_cfg) {
  (void)grid_cfg;
  std::vector<BaselineStay> stays;

  // Anchor-based extraction: extend while the next point stays within d of
  // the running centroid of the open segment.
  std::size_t i = 0;
  while (i < points.size()) {
    double sx = points[i].pos.x, sy = points[i].pos.y;
    std::size_t n = 1;
    std::int64_t first = linearize(points[i].when);
    std::int64_t last = first;
    std::size_t j = i + 1;
    for (; j < points.size(); ++j) {
      LocalXY centroid{sx / n, sy / n};
      if (dist2(points[j].pos, centroid) > cfg.d * cfg.d) break;
      sx += points[j].pos.x;
      sy += points[j].pos.y;
      ++n;
      last = linearize(points[j].when);
    }
    std::int64_t end = last + 1;
    if (end - first >= 2) {
      BaselineStay st;
      st.id = static_cast<std::int32_t>(stays.size());
      st.start_lin = first;
      st.end_lin = end;
      st.pos = LocalXY{sx / n, sy / n};
      st.grid = cell_of_size(st.pos, cfg.d);
      stays.push_back(st);
    }
    i = j;
  }

  // Iterative aggregation on the d-sized grid: the unmarked cell with the
  // most stays seeds a cluster with its unmarked stay-holding queen
  // neighbors.
  std::map<GridIndex, std::vector<std::int32_t>> by_cell;
  for (const auto& st : stays) by_cell[st.grid].push_back(st.id);

  std::vector<std::int32_t> label(stays.size(), -1);
  std::map<GridIndex, bool> marked;
  std::int32_t next_label = 0;
  while (true) {
    GridIndex best{};
    std::size_t best_count = 0;
    for (const auto& [cell, ids] : by_cell) {
      if (marked.count(cell)) continue;
      // std::map iterates cells in ascending (r, c): first max wins ties.
      if (ids.size() > best_count) {
        best_count = ids.size();
        best = cell;
      }
    }
    if (best_count == 0) break;
    std::int32_t lab = next_label++;
    auto take = [&](const GridIndex& cell) {
      auto it = by_cell.find(cell);
      if (it == by_cell.end() || marked.count(cell)) return;
      marked[cell] = true;
      for (std::int32_t sid : it->second) label[sid] = lab;
    };
    take(best);
    for (const GridIndex& nb : queen_neighbors(best)) take(nb);
  }

  return assemble(std::move(stays), label, next_label, cfg.d);
}

namespace {

struct BucketKey {
  std::int64_t bx, by;
  bool operator==(const BucketKey&) const = default;
  bool operator<(const BucketKey& o) const {
    return bx != o.bx ? bx < o.bx : by < o.by;
  }
};

struct BucketKeyHash {
  std::size_t operator()(const BucketKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.bx) * 0x9e3779b97f4a7c15ULL ^
                      (static_cast<std::uint64_t>(k.by) << 1);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

struct UF {
  std::vector<std::int32_t> p;
  explicit UF(std::size_t n) : p(n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::int32_t>(i);
  }
  std::int32_t find(std::int32_t x) {
    while (p[x] != x) {
      p[x] = p[p[x]];
      x = p[x];
    }
    return x;
  }
  bool unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// min_pts == 1: clusters equal connected components of the epsilon-graph.
// Buckets of side eps/sqrt(2) make same-bucket points always within eps, so
// whole buckets collapse and cross-bucket scans stop at the first hit.
std::vector<std::int32_t> components_eps_graph(const std::vector<LocalXY>& pts, double eps) {
  const double side = eps / std::sqrt(2.0);
  std::unordered_map<BucketKey, std::vector<std::int32_t>, BucketKeyHash> buckets;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    BucketKey k{static_cast<std::int64_t>(std::floor(pts[i].x / side)),
                static_cast<std::int64_t>(std::floor(pts[i].y / side))};
    buckets[k].push_back(static_cast<std::int32_t>(i));
  }
  UF uf(pts.size());
  for (auto& [k, ids] : buckets) {
    for (std::size_t a = 1; a < ids.size(); ++a) uf.unite(ids[0], ids[a]);
  }
  std::vector<BucketKey> keys;
  keys.reserve(buckets.size());
  for (const auto& [k, ids] : buckets) keys.push_back(k);
  std::sort(keys.begin(), keys.end());

  const double eps2 = eps * eps;
  for (const BucketKey& k : keys) {
    const auto& a_ids = buckets[k];
    for (int di = -2; di <= 2; ++di) {
      for (int dj = -2; dj <= 2; ++dj) {
        if (di < 0 || (di == 0 && dj <= 0)) continue;  // each pair once
        auto it = buckets.find(BucketKey{k.bx + di, k.by + dj});
        if (it == buckets.end()) continue;
        const auto& b_ids = it->second;
        if (uf.find(a_ids[0]) == uf.find(b_ids[0])) continue;
        bool linked = false;
        for (std::int32_t ia : a_ids) {
          for (std::int32_t ib : b_ids) {
            if (dist2(pts[ia], pts[ib]) <= eps2) {
              uf.unite(ia, ib);
              linked = true;
              break;
            }
          }
          if (linked) break;
        }
      }
    }
  }

  std::vector<std::int32_t> label(pts.size(), -1);
  std::unordered_map<std::int32_t, std::int32_t> root_to_label;
  std::int32_t next = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::int32_t root = uf.find(static_cast<std::int32_t>(i));
    auto [it, inserted] = root_to_label.emplace(root, next);
    if (inserted) ++next;
    label[i] = it->second;
  }
  return label;
}

// Generic DBSCAN for min_pts > 1; bucket side eps, 3x3 neighbor scan. The
// point itself counts toward min_pts.
std::vector<std::int32_t> dbscan_generic(const std::vector<LocalXY>& pts, double eps,
                                         int min_pts) {
  std::unordered_map<BucketKey, std::vector<std::int32_t>, BucketKeyHash> buckets;
  auto key_of = [&](const LocalXY& p) {
    return BucketKey{static_cast<std::int64_t>(std::floor(p.x / eps)),
                     static_cast<std::int64_t>(std::floor(p.y / eps))};
  };
  for (std::size_t i = 0; i < pts.size(); ++i)
    buckets[key_of(pts[i])].push_back(static_cast<std::int32_t>(i));

  const double eps2 = eps * eps;
  auto neighbors = [&](std::int32_t i, std::vector<std::int32_t>& out) {
    out.clear();
    BucketKey k = key_of(pts[i]);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        auto it = buckets.find(BucketKey{k.bx + di, k.by + dj});
        if (it == buckets.end()) continue;
        for (std::int32_t j : it->second) {
          if (dist2(pts[i], pts[j]) <= eps2) out.push_back(j);
        }
      }
    }
  };

  std::vector<std::int32_t> label(pts.size(), -2);  // -2 unvisited, -1 noise
  std::int32_t next = 0;
  std::vector<std::int32_t> nb, frontier;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] != -2) continue;
    neighbors(static_cast<std::int32_t>(i), nb);
    if (static_cast<int>(nb.size()) < min_pts) {
      label[i] = -1;
      continue;
    }
    std::int32_t lab = next++;
    label[i] = lab;
    frontier = nb;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      std::int32_t j = frontier[f];
      if (label[j] == -1) label[j] = lab;  // border point
      if (label[j] != -2) continue;
      label[j] = lab;
      neighbors(j, nb);
      if (static_cast<int>(nb.size()) >= min_pts)
        frontier.insert(frontier.end(), nb.begin(), nb.end());
    }
  }
  return label;
}

}  // namespace

std::vector<std::int32_t> dbscan_cluster(const std::vector<LocalXY>& pts, double epsilon,
                                         int min_pts) {
  if (pts.empty()) return {};
  if (min_pts <= 1) return components_eps_graph(pts, epsilon);
  return dbscan_generic(pts, epsilon, min_pts);
}

BaselineResult dbscan_identify(const std::vector<TracePoint>& points, const BaselineConfig& cfg,
                               const GridConfig& grid_cfg) {
  std::vector<LocalXY> pos(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pos[i] = points[i].pos;
  std::vector<std::int32_t> cluster = dbscan_cluster(pos, cfg.epsilon, cfg.min_pts);
  std::int32_t n_clusters = 0;
  for (std::int32_t c : cluster) n_clusters = std::max(n_clusters, c + 1);

  // Within each cluster, temporally-contiguous slot runs become stays when
  // they exceed 10 minutes.
  std::vector<BaselineStay> stays;
  std::vector<std::int32_t> stay_label;
  std::size_t i = 0;
  while (i < points.size()) {
    if (cluster[i] < 0) {  // noise (min_pts > 1 only)
      ++i;
      continue;
    }
    std::int32_t lab = cluster[i];
    std::int64_t first = linearize(points[i].when);
    std::int64_t last = first;
    double sx = points[i].pos.x, sy = points[i].pos.y;
    std::size_t n = 1;
    std::size_t j = i + 1;
    for (; j < points.size(); ++j) {
      std::int64_t lin = linearize(points[j].when);
      if (cluster[j] != lab || lin != last + 1) break;
      last = lin;
      sx += points[j].pos.x;
      sy += points[j].pos.y;
      ++n;
    }
    if (last + 1 - first >= 2) {
      BaselineStay st;
      st.id = static_cast<std::int32_t>(stays.size());
      st.start_lin = first;
      st.end_lin = last + 1;
      st.pos = LocalXY{sx / n, sy / n};
      st.grid = cell_of(st.pos, grid_cfg);
      stays.push_back(st);
      stay_label.push_back(lab);
    }
    i = j;
  }

  return assemble(std::move(stays), stay_label, n_clusters, grid_cfg.cell_size);
}

}  // namespace actloc
