#include "actloc/community.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace actloc {

WeightedGraph::WeightedGraph(std::int32_t n)
    : n_(n), adj_(n), strength_(n, 0.0), self_loop_(n, 0.0) {}

void WeightedGraph::add_edge(std::int32_t u, std::int32_t v, double w) {
  if (u == v) {
    add_self_loop(u, w);
    return;
  }
  if (w < 0) throw std::invalid_argument("negative edge weight");
  adj_[u].emplace_back(v, w);
  adj_[v].emplace_back(u, w);
  strength_[u] += w;
  strength_[v] += w;
  m_ += w;
}

void WeightedGraph::add_self_loop(std::int32_t u, double w) {
  if (w < 0) throw std::invalid_argument("negative edge weight");
  self_loop_[u] += w;
  strength_[u] += 2 * w;
  m_ += w;
}

std::int32_t Partition::community_count() const {
  if (assignment.empty()) return 0;
  return *std::max_element(assignment.begin(), assignment.end()) + 1;
}

void Partition::compact() {
  std::int32_t next = 0;
  std::map<std::int32_t, std::int32_t> remap;  // ascending old id -> new id
  for (std::int32_t c : assignment) remap.emplace(c, 0);
  for (auto& [old_id, new_id] : remap) new_id = next++;
  for (auto& c : assignment) c = remap[c];
}

Partition Partition::singletons(std::int32_t n) {
  Partition p;
  p.assignment.resize(n);
  std::iota(p.assignment.begin(), p.assignment.end(), 0);
  return p;
}

CommunityState CommunityState::from(const WeightedGraph& g, const Partition& p) {
  std::int32_t nc = p.community_count();
  CommunityState st;
  st.w_in.assign(nc, 0.0);
  st.w_tot.assign(nc, 0.0);
  for (std::int32_t u = 0; u < g.size(); ++u) {
    std::int32_t cu = p.assignment[u];
    st.w_tot[cu] += g.strength(u);
    st.w_in[cu] += 2 * g.self_loop(u);
    for (const auto& [v, w] : g.neighbors(u)) {
      if (p.assignment[v] == cu) st.w_in[cu] += w;  // each direction once
    }
  }
  return st;
}

double modularity(const WeightedGraph& g, const Partition& p) {
  double m = g.total_weight();
  if (m <= 0) return 0.0;
  CommunityState st = CommunityState::from(g, p);
  double q = 0;
  for (std::size_t c = 0; c < st.w_in.size(); ++c) {
    q += st.w_in[c] / (2 * m) - (st.w_tot[c] / (2 * m)) * (st.w_tot[c] / (2 * m));
  }
  return q;
}

double modularity_gain(const WeightedGraph& g, const CommunityState& state, std::int32_t node,
                       std::int32_t target, double k_in) {
  double m = g.total_weight();
  double ki = g.strength(node);
  double w_in = state.w_in[target];
  double w_tot = state.w_tot[target];
  // Detach-then-evaluate: the "before" bracket counts the node as its own
  // singleton community (its self-loop internal, strength ki).
  double after = (w_in + 2 * k_in + 2 * g.self_loop(node)) / (2 * m) -
                 ((w_tot + ki) / (2 * m)) * ((w_tot + ki) / (2 * m));
  double before = w_in / (2 * m) - (w_tot / (2 * m)) * (w_tot / (2 * m)) +
                  (2 * g.self_loop(node)) / (2 * m) - (ki / (2 * m)) * (ki / (2 * m));
  return after - before;
}

namespace {

// Sweep state over a working graph: community assignment plus the running
// sums the gain formula needs. Community ids may exceed the live count; one
// spare slot backs the "detach into a fresh singleton" candidate move.
struct SweepState {
  const WeightedGraph& g;
  std::vector<std::int32_t> node_comm;
  CommunityState cs;
  // Scratch for neighbor-community weights.
  std::vector<double> neigh_w;
  std::vector<std::int32_t> neigh_comms;

  SweepState(const WeightedGraph& graph, const std::vector<std::int32_t>& init)
      : g(graph), node_comm(init) {
    Partition p;
    p.assignment = init;
    cs = CommunityState::from(g, p);
    cs.w_in.resize(cs.w_in.size() + g.size() + 1, 0.0);
    cs.w_tot.resize(cs.w_in.size(), 0.0);
    neigh_w.assign(cs.w_in.size(), -1.0);
  }

  void gather_neighbor_comms(std::int32_t u) {
    neigh_comms.clear();
    for (const auto& [v, w] : g.neighbors(u)) {
      std::int32_t c = node_comm[v];
      if (c < 0) continue;  // detached during a dissolution
      if (neigh_w[c] < 0) {
        neigh_w[c] = 0;
        neigh_comms.push_back(c);
      }
      neigh_w[c] += w;
    }
  }

  void clear_scratch() {
    for (std::int32_t c : neigh_comms) neigh_w[c] = -1.0;
  }

  void remove(std::int32_t u, std::int32_t c, double k_in) {
    cs.w_tot[c] -= g.strength(u);
    cs.w_in[c] -= 2 * k_in + 2 * g.self_loop(u);
    node_comm[u] = -1;
  }

  void insert(std::int32_t u, std::int32_t c, double k_in) {
    cs.w_tot[c] += g.strength(u);
    cs.w_in[c] += 2 * k_in + 2 * g.self_loop(u);
    node_comm[u] = c;
  }

  // An id currently unused by any node, for detach moves.
  std::int32_t fresh_community() const {
    std::int32_t hi = 0;
    for (std::int32_t c : node_comm) hi = std::max(hi, c);
    return hi + 1;
  }
};

Partition as_partition(const std::vector<std::int32_t>& assignment) {
  Partition p;
  p.assignment = assignment;
  return p;
}

// Repeated ascending-id sweeps moving each node to the community with the
// largest gain (ties: smallest id; a fresh singleton is a candidate too).
// Stops when a full pass makes no move. Returns whether anything moved.
bool sweep_until_stable(SweepState& st, const LouvainOptions& opts, LouvainResult& res) {
  const WeightedGraph& work = st.g;
  bool any_move = false;
  bool moved_this_pass = true;
  while (moved_this_pass) {
    moved_this_pass = false;
    for (std::int32_t u = 0; u < work.size(); ++u) {
      std::int32_t old_comm = st.node_comm[u];
      st.gather_neighbor_comms(u);
      double k_in_old = st.neigh_w[old_comm] < 0 ? 0.0 : st.neigh_w[old_comm];
      st.remove(u, old_comm, k_in_old);

      double gain_stay = modularity_gain(work, st.cs, u, old_comm, k_in_old);
      double best_gain = gain_stay;
      std::int32_t best_comm = old_comm;
      for (std::int32_t c : st.neigh_comms) {
        if (c == old_comm) continue;
        double gain = modularity_gain(work, st.cs, u, c, st.neigh_w[c]);
        if (gain > best_gain || (gain == best_gain && c < best_comm)) {
          best_gain = gain;
          best_comm = c;
        }
      }
      // Detaching into a fresh singleton scores exactly zero gain; it wins
      // only when every occupied candidate is negative.
      if (0.0 > best_gain) {
        best_gain = 0.0;
        best_comm = st.fresh_community();
        if (static_cast<std::size_t>(best_comm) >= st.cs.w_in.size()) {
          st.cs.w_in.resize(best_comm + 1, 0.0);
          st.cs.w_tot.resize(best_comm + 1, 0.0);
          st.neigh_w.resize(best_comm + 1, -1.0);
        }
      }

      double predicted_delta = best_gain - gain_stay;
      if (best_comm != old_comm && predicted_delta > opts.tolerance) {
        double q_before = 0, q_after = 0;
        if (opts.check_gains) {
          st.insert(u, old_comm, k_in_old);
          q_before = modularity(work, as_partition(st.node_comm));
          st.remove(u, old_comm, k_in_old);
        }
        double k_in_new = st.neigh_w[best_comm] < 0 ? 0.0 : st.neigh_w[best_comm];
        st.insert(u, best_comm, k_in_new);
        if (opts.check_gains) {
          q_after = modularity(work, as_partition(st.node_comm));
          double err = std::abs((q_after - q_before) - predicted_delta);
          res.max_gain_error = std::max(res.max_gain_error, err);
          if (err > 1e-9)
            throw InvariantViolation("louvain gain bookkeeping diverged from recomputation");
        }
        ++res.moves;
        moved_this_pass = true;
        any_move = true;
      } else {
        st.insert(u, old_comm, k_in_old);
      }
      st.clear_scratch();
    }
  }
  return any_move;
}

// Compacts ids ascending in place; returns the community count.
std::int32_t compact_ids(std::vector<std::int32_t>& comm) {
  std::int32_t next = 0;
  std::map<std::int32_t, std::int32_t> remap;
  for (std::int32_t c : comm) remap.emplace(c, 0);
  for (auto& [old_id, new_id] : remap) new_id = next++;
  for (auto& c : comm) c = remap[c];
  return next;
}

// Dissolution move: tentatively empty one community and greedily rehome each
// member; kept only when total modularity rises. Escapes the two-step traps
// where every single-node path to a better partition dips downhill first.
bool dissolve_pass(SweepState& st, const LouvainOptions& opts, LouvainResult& res) {
  const WeightedGraph& g = st.g;
  bool improved = false;
  std::map<std::int32_t, std::vector<std::int32_t>> members;
  for (std::int32_t u = 0; u < g.size(); ++u) members[st.node_comm[u]].push_back(u);

  for (const auto& [c, nodes] : members) {
    if (nodes.size() < 2) continue;
    // Skip when the community no longer matches the snapshot (a previous
    // dissolution may have moved nodes in or out).
    bool intact = true;
    for (std::int32_t u : nodes) intact = intact && st.node_comm[u] == c;
    if (!intact) continue;

    std::vector<std::int32_t> saved_comm = st.node_comm;
    CommunityState saved_cs = st.cs;
    double q_before = modularity(g, as_partition(st.node_comm));

    for (std::int32_t u : nodes) {
      st.gather_neighbor_comms(u);
      double k_in_cur = st.neigh_w[st.node_comm[u]] < 0 ? 0.0 : st.neigh_w[st.node_comm[u]];
      st.remove(u, saved_comm[u], k_in_cur);
      st.clear_scratch();
    }
    for (std::int32_t u : nodes) {
      st.gather_neighbor_comms(u);
      double best_gain = 0.0;  // the fresh-singleton floor
      std::int32_t best_comm = st.fresh_community();
      for (std::int32_t cand : st.neigh_comms) {
        double gain = modularity_gain(g, st.cs, u, cand, st.neigh_w[cand]);
        if (gain > best_gain || (gain == best_gain && cand < best_comm)) {
          best_gain = gain;
          best_comm = cand;
        }
      }
      if (static_cast<std::size_t>(best_comm) >= st.cs.w_in.size()) {
        st.cs.w_in.resize(best_comm + 1, 0.0);
        st.cs.w_tot.resize(best_comm + 1, 0.0);
        st.neigh_w.resize(best_comm + 1, -1.0);
      }
      double k_in_new = st.neigh_w[best_comm] < 0 ? 0.0 : st.neigh_w[best_comm];
      st.insert(u, best_comm, k_in_new);
      st.clear_scratch();
    }
    double q_after = modularity(g, as_partition(st.node_comm));
    if (q_after > q_before + opts.tolerance) {
      improved = true;
      res.moves += nodes.size();
    } else {
      st.node_comm = std::move(saved_comm);
      st.cs = std::move(saved_cs);
    }
  }
  return improved;
}

// Aggregates communities into super-nodes; intra-community weight becomes a
// self-loop so that modularity is preserved. Community ids must be compact.
WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::int32_t>& comm,
                        std::int32_t nc) {
  WeightedGraph out(nc);
  std::vector<double> loops(nc, 0.0);
  std::map<std::pair<std::int32_t, std::int32_t>, double> cross;
  for (std::int32_t u = 0; u < g.size(); ++u) {
    std::int32_t cu = comm[u];
    loops[cu] += g.self_loop(u);
    for (const auto& [v, w] : g.neighbors(u)) {
      if (v < u) continue;  // each undirected edge once
      std::int32_t cv = comm[v];
      if (cu == cv) {
        loops[cu] += w;
      } else {
        cross[{std::min(cu, cv), std::max(cu, cv)}] += w;
      }
    }
  }
  for (std::int32_t c = 0; c < nc; ++c)
    if (loops[c] > 0) out.add_self_loop(c, loops[c]);
  for (const auto& [key, w] : cross) out.add_edge(key.first, key.second, w);
  return out;
}

}  // namespace

LouvainResult louvain(const WeightedGraph& g, const LouvainOptions& opts) {
  LouvainResult res;
  if (g.size() == 0) {
    res.partition = Partition::singletons(0);
    return res;
  }
  if (g.total_weight() <= 0) {
    res.partition = Partition::singletons(g.size());
    res.modularity = 0;
    return res;
  }

  // flat[i] = community of original node i; starts as singletons.
  std::vector<std::int32_t> flat(g.size());
  std::iota(flat.begin(), flat.end(), 0);
  double q = modularity(g, as_partition(flat));

  // Alternate the two-phase multilevel loop with a single-node refinement
  // sweep over the original graph. The refinement repairs nodes the coarse
  // levels froze into the wrong community; both parts are deterministic and
  // only ever raise Q.
  while (true) {
    // Multilevel: aggregate the current flat partition, then sweep levels.
    std::int32_t nc = compact_ids(flat);
    WeightedGraph work = aggregate(g, flat, nc);
    std::vector<std::int32_t> meta(nc);  // flat community -> work community
    std::iota(meta.begin(), meta.end(), 0);
    while (true) {
      SweepState st(work, Partition::singletons(work.size()).assignment);
      bool moved = sweep_until_stable(st, opts, res);
      ++res.levels;
      std::vector<std::int32_t> comm = st.node_comm;
      std::int32_t work_nc = compact_ids(comm);
      for (auto& mcomm : meta) mcomm = comm[mcomm];
      if (!moved || work_nc == work.size()) break;
      work = aggregate(work, comm, work_nc);
    }
    for (auto& f : flat) f = meta[f];

    // Refinement at the finest level from the current partition: node sweeps
    // alternated with community dissolutions until neither improves.
    compact_ids(flat);
    SweepState st(g, flat);
    sweep_until_stable(st, opts, res);
    while (dissolve_pass(st, opts, res)) {
      sweep_until_stable(st, opts, res);
    }
    flat = st.node_comm;

    double new_q = modularity(g, as_partition(flat));
    if (new_q - q <= opts.tolerance) {
      q = std::max(q, new_q);
      break;
    }
    q = new_q;
  }

  res.modularity = q;
  res.partition.assignment = std::move(flat);
  res.partition.compact();
  return res;
}

WeightedGraph build_st_graph(const SpatialGraph& sg, const TemporalGraph& tg) {
  WeightedGraph g(sg.n);
  for (const auto& e : tg.edges) {
    if (e.weight > 0) g.add_edge(e.i, e.j, e.weight);
  }
  return g;
}

std::vector<ActivityLocation> to_activity_locations(const Partition& p,
                                                    const std::vector<Stay>& stays,
                                                    const GridConfig& cfg) {
  std::int32_t nc = p.community_count();
  std::vector<ActivityLocation> locs(nc);
  for (std::size_t i = 0; i < stays.size(); ++i) {
    ActivityLocation& loc = locs[p.assignment[i]];
    loc.stay_ids.push_back(stays[i].id);
    loc.total_duration_slots += stays[i].duration_slots;
  }
  for (auto& loc : locs) {
    double sx = 0, sy = 0;
    std::vector<GridIndex> cells;
    for (std::int32_t sid : loc.stay_ids) {
      const Stay& st = stays[sid];
      LocalXY c = cell_center(st.grid, cfg);
      sx += c.x;
      sy += c.y;
      cells.push_back(st.grid);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    loc.cells = std::move(cells);
    if (!loc.stay_ids.empty()) {
      loc.centroid = LocalXY{sx / loc.stay_ids.size(), sy / loc.stay_ids.size()};
    }
  }
  std::sort(locs.begin(), locs.end(), [](const ActivityLocation& a, const ActivityLocation& b) {
    if (a.total_duration_slots != b.total_duration_slots)
      return a.total_duration_slots > b.total_duration_slots;
    return a.stay_ids.front() < b.stay_ids.front();
  });
  for (std::size_t i = 0; i < locs.size(); ++i) locs[i].id = static_cast<std::int32_t>(i);
  return locs;
}

}  // namespace actloc
