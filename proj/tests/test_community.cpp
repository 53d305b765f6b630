#include "doctest.h"

#include <random>

#include "actloc/community.hpp"
#include "oracles.hpp"

using namespace actloc;

TEST_CASE("modularity frozen values") {
  // Two disjoint unit edges, partition = the two edges.
  WeightedGraph g(4);
  g.add_edge(0, 1, 1.0);
  g.add_edge(2, 3, 1.0);
  Partition p;
  p.assignment = {0, 0, 1, 1};
  CHECK(modularity(g, p) == doctest::Approx(0.5).epsilon(1e-12));

  // Single unit edge, both nodes in one community.
  WeightedGraph g2(2);
  g2.add_edge(0, 1, 1.0);
  Partition merged;
  merged.assignment = {0, 0};
  CHECK(modularity(g2, merged) == doctest::Approx(0.0));

  // Single unit edge, singletons.
  Partition sing;
  sing.assignment = {0, 1};
  CHECK(modularity(g2, sing) == doctest::Approx(-0.5));
}

TEST_CASE("modularity of the edgeless graph is zero") {
  WeightedGraph g(3);
  CHECK(modularity(g, Partition::singletons(3)) == 0.0);
}

TEST_CASE("modularity matches the dense oracle on random partitions") {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 3 + static_cast<int>(gen() % 6);
    WeightedGraph g(n);
    oracle::DenseGraph dg(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        if (gen() % 3 == 0) {
          double w = 0.25 + static_cast<double>(gen() % 8) / 4.0;
          g.add_edge(i, j, w);  // includes self-loops when i == j
          dg.edge(i, j, w);
        }
      }
    }
    Partition p;
    std::vector<int> comm(n);
    p.assignment.resize(n);
    for (int i = 0; i < n; ++i) {
      comm[i] = static_cast<int>(gen() % 3);
      p.assignment[i] = comm[i];
    }
    if (g.total_weight() <= 0) continue;
    CHECK(modularity(g, p) == doctest::Approx(oracle::modularity(dg, comm)).epsilon(1e-12));
  }
}

TEST_CASE("modularity_gain equals Q(after) - Q(before) for the documented move") {
  WeightedGraph g(2);
  g.add_edge(0, 1, 1.0);
  Partition sing = Partition::singletons(2);
  CommunityState cs = CommunityState::from(g, sing);
  // Detach node 0: its singleton community 0 becomes empty.
  cs.w_tot[0] = 0;
  cs.w_in[0] = 0;
  double gain = modularity_gain(g, cs, 0, 1, 1.0);
  CHECK(gain == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("moving into an edgeless community is strictly negative") {
  std::mt19937_64 gen(55);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 4 + static_cast<int>(gen() % 4);
    WeightedGraph g(n);
    for (int i = 1; i < n - 1; ++i) g.add_edge(i, i - 1 + static_cast<int>(gen() % 2), 1.0);
    g.add_edge(0, 1, 1.0);
    if (g.total_weight() <= 0) continue;
    // Node n-1 has no edges to community of node 0 alone if disconnected;
    // construct explicitly: singleton state, insert node with k_in = 0.
    Partition sing = Partition::singletons(n);
    CommunityState cs = CommunityState::from(g, sing);
    int node = 0;
    cs.w_tot[node] = 0;
    cs.w_in[node] = 0;
    for (int target = 1; target < n; ++target) {
      if (g.strength(node) <= 0 || g.strength(target) <= 0) continue;
      double gain = modularity_gain(g, cs, node, target, /*k_in=*/0.0);
      CHECK(gain < 0.0);
    }
  }
}

TEST_CASE("gain identity holds on random graphs for random legal moves") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 4 + static_cast<int>(gen() % 5);
    WeightedGraph g(n);
    oracle::DenseGraph dg(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 2) {
          double w = 0.5 + static_cast<double>(gen() % 4) / 2.0;
          g.add_edge(i, j, w);
          dg.edge(i, j, w);
        }
    if (g.total_weight() <= 0) continue;

    std::vector<int> comm(n);
    for (int i = 0; i < n; ++i) comm[i] = static_cast<int>(gen() % n);
    int node = static_cast<int>(gen() % n);
    int target = static_cast<int>(gen() % n);

    // Before: node isolated in a fresh community id n.
    std::vector<int> before = comm;
    before[node] = n;
    std::vector<int> after = comm;
    after[node] = target == static_cast<int>(n) ? 0 : target;
    if (after[node] == n) continue;

    Partition pb;
    pb.assignment.assign(before.begin(), before.end());
    pb.compact();
    // Build state over compacted ids for the gain call.
    Partition pa;
    pa.assignment.assign(comm.begin(), comm.end());
    // State with node detached: compute from scratch using 'before'.
    Partition pbefore;
    pbefore.assignment.assign(before.begin(), before.end());
    CommunityState cs = CommunityState::from(g, pbefore);
    double k_in = 0;
    for (const auto& [v, w] : g.neighbors(node))
      if (before[v] == after[node]) k_in += w;
    double predicted = modularity_gain(g, cs, node, after[node], k_in);
    double q_before = oracle::modularity(dg, before);
    double q_after = oracle::modularity(dg, after);
    CHECK(predicted == doctest::Approx(q_after - q_before).epsilon(1e-9));
  }
}

TEST_CASE("louvain on two disjoint unit edges finds the two pairs") {
  WeightedGraph g(4);
  g.add_edge(0, 1, 1.0);
  g.add_edge(2, 3, 1.0);
  auto res = louvain(g);
  CHECK(res.modularity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.partition.assignment[0] == res.partition.assignment[1]);
  CHECK(res.partition.assignment[2] == res.partition.assignment[3]);
  CHECK(res.partition.assignment[0] != res.partition.assignment[2]);
}

TEST_CASE("louvain on the barbell graph reaches the exhaustive optimum 5/14") {
  WeightedGraph g(6);
  oracle::DenseGraph dg(6);
  auto edge = [&](int u, int v) {
    g.add_edge(u, v, 1.0);
    dg.edge(u, v, 1.0);
  };
  edge(0, 1);
  edge(0, 2);
  edge(1, 2);
  edge(3, 4);
  edge(3, 5);
  edge(4, 5);
  edge(2, 3);  // bridge
  auto res = louvain(g);
  CHECK(res.modularity == doctest::Approx(5.0 / 14.0).epsilon(1e-12));
  CHECK(oracle::best_modularity(dg) == doctest::Approx(5.0 / 14.0).epsilon(1e-12));
  // The two triangles are the communities.
  CHECK(res.partition.assignment[0] == res.partition.assignment[1]);
  CHECK(res.partition.assignment[1] == res.partition.assignment[2]);
  CHECK(res.partition.assignment[3] == res.partition.assignment[4]);
  CHECK(res.partition.assignment[4] == res.partition.assignment[5]);
  CHECK(res.partition.assignment[0] != res.partition.assignment[3]);
}

TEST_CASE("louvain on an edgeless graph returns singletons with Q = 0") {
  WeightedGraph g(5);
  auto res = louvain(g);
  CHECK(res.modularity == 0.0);
  Partition p = Partition::singletons(5);
  CHECK(res.partition.assignment == p.assignment);
}

TEST_CASE("aggregation preserves modularity via the self-loop convention") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 5 + static_cast<int>(gen() % 4);
    WeightedGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 2) g.add_edge(i, j, 0.5 + static_cast<double>(gen() % 4) / 2.0);
    if (g.total_weight() <= 0) continue;
    auto res = louvain(g);
    // Rebuild the aggregated graph by hand and compare Q of its singleton
    // partition with Q of the partition on the original graph.
    Partition p = res.partition;
    double q_orig = modularity(g, p);
    std::int32_t nc = p.community_count();
    WeightedGraph agg(nc);
    std::vector<double> loops(nc, 0.0);
    std::vector<std::vector<double>> cross(nc, std::vector<double>(nc, 0.0));
    for (std::int32_t u = 0; u < g.size(); ++u) {
      for (const auto& [v, w] : g.neighbors(u)) {
        if (v < u) continue;
        std::int32_t cu = p.assignment[u], cv = p.assignment[v];
        if (cu == cv) loops[cu] += w;
        else cross[std::min(cu, cv)][std::max(cu, cv)] += w;
      }
    }
    for (std::int32_t c = 0; c < nc; ++c)
      if (loops[c] > 0) agg.add_self_loop(c, loops[c]);
    for (std::int32_t a = 0; a < nc; ++a)
      for (std::int32_t b = a + 1; b < nc; ++b)
        if (cross[a][b] > 0) agg.add_edge(a, b, cross[a][b]);
    CHECK(modularity(agg, Partition::singletons(nc)) ==
          doctest::Approx(q_orig).epsilon(1e-9));
  }
}

TEST_CASE("louvain is deterministic and Q dominates the singleton partition") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 6 + static_cast<int>(gen() % 6);
    WeightedGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 3 == 0) g.add_edge(i, j, 0.25 + static_cast<double>(gen() % 8) / 4.0);
    auto r1 = louvain(g);
    auto r2 = louvain(g);
    CHECK(r1.partition.assignment == r2.partition.assignment);
    CHECK(r1.modularity == r2.modularity);
    CHECK(r1.modularity >= modularity(g, Partition::singletons(n)) - 1e-12);
  }
}

TEST_CASE("nodes in different components never share a community") {
  WeightedGraph g(7);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 0.5);
  g.add_edge(3, 4, 1.0);
  g.add_edge(4, 5, 1.0);
  // node 6 isolated
  auto res = louvain(g);
  auto c = res.partition.assignment;
  for (int a : {0, 1, 2}) {
    for (int b : {3, 4, 5, 6}) CHECK(c[a] != c[b]);
  }
  CHECK(c[6] != c[3]);
}

TEST_CASE("check_gains verifies every accepted move against recomputation") {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 5 + static_cast<int>(gen() % 5);
    WeightedGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 2) g.add_edge(i, j, 0.5 + static_cast<double>(gen() % 6) / 3.0);
    LouvainOptions opts;
    opts.check_gains = true;
    auto res = louvain(g, opts);  // throws on divergence
    CHECK(res.max_gain_error <= 1e-9);
  }
}

TEST_CASE("build_st_graph keeps positive-weight spatial edges only") {
  SpatialGraph sg;
  sg.n = 3;
  sg.component = {0, 0, 0};
  sg.components = {{0, 1, 2}};
  TemporalGraph tg;
  tg.n = 3;
  tg.edges = {{0, 1, 0.6}, {0, 2, 0.0}, {1, 2, 0.3}};
  WeightedGraph g = build_st_graph(sg, tg);
  CHECK(g.total_weight() == doctest::Approx(0.9));
  CHECK(g.strength(0) == doctest::Approx(0.6));
  CHECK(g.strength(2) == doctest::Approx(0.3));
}

TEST_CASE("to_activity_locations orders by duration and averages cell centers") {
  GridConfig cfg;
  std::vector<Stay> stays;
  auto mk = [&](int id, int r, int c, int dur) {
    Stay st;
    st.id = id;
    st.grid = GridIndex{r, c};
    st.start = SlotIndex{0, 0};
    st.end = delinearize(dur);
    st.duration_slots = dur;
    st.occupancy.set(0);
    stays.push_back(st);
  };
  mk(0, 2, 2, 4);
  mk(1, 2, 3, 4);   // community A: two adjacent cells, total 8
  mk(2, 9, 9, 20);  // community B: one cell, total 20
  Partition p;
  p.assignment = {0, 0, 1};
  auto locs = to_activity_locations(p, stays, cfg);
  REQUIRE(locs.size() == 2);
  CHECK(locs[0].id == 0);
  CHECK(locs[0].total_duration_slots == 20);
  CHECK(locs[0].centroid.x == doctest::Approx((9 + 0.5) * 500.0));
  CHECK(locs[1].total_duration_slots == 8);
  // Midpoint of centers 500 m apart.
  CHECK(locs[1].centroid.x == doctest::Approx((2.5 + 3.5) / 2 * 500.0));
  CHECK(locs[1].centroid.y == doctest::Approx(2.5 * 500.0));

  // Isolated stay: its own singleton location.
  Partition q;
  q.assignment = {0, 1, 2};
  auto locs2 = to_activity_locations(q, stays, cfg);
  CHECK(locs2.size() == 3);
}
