#include "actloc/stkg.hpp"

#include <algorithm>
#include <cmath>

namespace actloc {

const char* predicate_name(Predicate p) {
  switch (p) {
    case Predicate::kBelongsTo: return "belongsTo";
    case Predicate::kLocatedIn: return "locatedIn";
    case Predicate::kOccursOn: return "occursOn";
    case Predicate::kCoversSlot: return "coversSlot";
    case Predicate::kSpatiallyRelated: return "spatiallyRelated";
    case Predicate::kCooccursWith: return "cooccursWith";
  }
  return "?";
}

STKGStore::STKGStore(std::string uid, std::vector<Stay> stays)
    : uid_(std::move(uid)), stays_(std::move(stays)) {
  std::unordered_map<GridIndex, bool, GridIndexHash> grid_seen;
  std::vector<bool> day_seen;
  std::array<bool, 144> slot_seen{};

  for (const Stay& st : stays_) {
    base_.push_back(Triple{Predicate::kBelongsTo, st.id, Triple::ObjKind::kUser, 0, 0});
    base_.push_back(Triple{Predicate::kLocatedIn, st.id, Triple::ObjKind::kGrid, st.grid.r,
                           st.grid.c});
    if (!grid_seen.count(st.grid)) {
      grid_seen[st.grid] = true;
      grids_.push_back(st.grid);
    }
    std::int64_t last_covered = st.end_lin() - 1;
    for (std::int32_t d = st.start.day; d <= static_cast<std::int32_t>(last_covered / 144); ++d) {
      base_.push_back(Triple{Predicate::kOccursOn, st.id, Triple::ObjKind::kDay, d, 0});
      if (static_cast<std::size_t>(d) >= day_seen.size()) day_seen.resize(d + 1, false);
      if (!day_seen[d]) {
        day_seen[d] = true;
        days_.push_back(d);
      }
    }
    for (int s = 0; s < 144; ++s) {
      if (st.occupancy.test(s)) {
        base_.push_back(Triple{Predicate::kCoversSlot, st.id, Triple::ObjKind::kSlot, s, 0});
        slot_seen[s] = true;
      }
    }
  }
  for (int s = 0; s < 144; ++s)
    if (slot_seen[s]) slots_.push_back(s);
  std::sort(grids_.begin(), grids_.end());
  std::sort(days_.begin(), days_.end());
}

void STKGStore::enumerate_triples(const std::function<void(const Triple&)>& fn) const {
  for (const Triple& t : base_) fn(t);
  if (has_spatial_) {
    for (const auto& comp : spatial_.components) {
      for (std::size_t a = 0; a < comp.size(); ++a) {
        for (std::size_t b = a + 1; b < comp.size(); ++b) {
          fn(Triple{Predicate::kSpatiallyRelated, comp[a], Triple::ObjKind::kStay, comp[b], 0});
        }
      }
    }
  }
  if (has_temporal_) {
    for (const auto& e : temporal_.edges) {
      Triple t{Predicate::kCooccursWith, e.i, Triple::ObjKind::kStay, e.j, 0};
      t.weight = e.weight;
      t.has_weight = true;
      fn(t);
    }
  }
}

STKGStore build_stkg(const std::string& uid, const std::vector<Stay>& stays) {
  return STKGStore(uid, stays);
}

std::array<GridIndex, 8> queen_neighbors(const GridIndex& g) {
  std::array<GridIndex, 8> out;
  int k = 0;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      if (a == 0 && b == 0) continue;
      out[k++] = GridIndex{g.r + a, g.c + b};
    }
  }
  return out;
}

std::uint64_t SpatialGraph::edge_count() const {
  std::uint64_t e = 0;
  for (const auto& comp : components) {
    std::uint64_t s = comp.size();
    e += s * (s - 1) / 2;
  }
  return e;
}

namespace {

struct UnionFind {
  std::vector<std::int32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::int32_t>(i);
  }
  std::int32_t find(std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

SpatialGraph infer_spatial_relations(const STKGStore& store) {
  const auto& stays = store.stays();
  SpatialGraph sg;
  sg.n = static_cast<std::int32_t>(stays.size());
  sg.component.assign(stays.size(), 0);
  if (stays.empty()) return sg;

  // Grid-level closure: distinct stay grids connect iff identical or
  // queen-adjacent; stays inherit their grid's component.
  std::unordered_map<GridIndex, std::int32_t, GridIndexHash> grid_id;
  std::vector<GridIndex> grids;
  for (const Stay& st : stays) {
    if (grid_id.emplace(st.grid, static_cast<std::int32_t>(grids.size())).second)
      grids.push_back(st.grid);
  }
  UnionFind uf(grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) {
    for (const GridIndex& nb : queen_neighbors(grids[i])) {
      auto it = grid_id.find(nb);
      if (it != grid_id.end()) uf.unite(static_cast<std::int32_t>(i), it->second);
    }
  }

  // Component ids compacted in order of first appearance over stay order.
  std::unordered_map<std::int32_t, std::int32_t> root_to_comp;
  for (std::size_t s = 0; s < stays.size(); ++s) {
    std::int32_t root = uf.find(grid_id[stays[s].grid]);
    auto [it, inserted] =
        root_to_comp.emplace(root, static_cast<std::int32_t>(sg.components.size()));
    if (inserted) sg.components.emplace_back();
    sg.component[s] = it->second;
    sg.components[it->second].push_back(static_cast<std::int32_t>(s));
  }
  return sg;
}

double cosine_cooccurrence(const Occupancy144& a, const Occupancy144& b) {
  int na = a.count();
  int nb = b.count();
  int inter = a.overlap(b);
  return inter / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

TemporalGraph infer_temporal_relations(const STKGStore& store, const SpatialGraph& sg) {
  TemporalGraph tg;
  tg.n = sg.n;
  const auto& stays = store.stays();
  for (const auto& comp : sg.components) {
    for (std::size_t a = 0; a < comp.size(); ++a) {
      for (std::size_t b = a + 1; b < comp.size(); ++b) {
        std::int32_t i = comp[a];
        std::int32_t j = comp[b];
        double w = cosine_cooccurrence(stays[i].occupancy, stays[j].occupancy);
        tg.edges.push_back(TemporalGraph::Edge{std::min(i, j), std::max(i, j), w});
      }
    }
  }
  return tg;
}

}  // namespace actloc
