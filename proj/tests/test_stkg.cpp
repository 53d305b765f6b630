#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "actloc/stkg.hpp"
#include "oracles.hpp"

using namespace actloc;

namespace {

Stay make_stay(int id, int r, int c, int day, int first_slot, int n_slots) {
  Stay st;
  st.id = id;
  st.grid = GridIndex{r, c};
  st.start = SlotIndex{day, first_slot};
  st.end = delinearize(linearize(st.start) + n_slots);
  st.duration_slots = n_slots;
  for (int k = 0; k < n_slots; ++k) st.occupancy.set((first_slot + k) % 144);
  return st;
}

}  // namespace

TEST_CASE("queen neighbors of (5,5)") {
  auto nb = queen_neighbors(GridIndex{5, 5});
  std::set<std::pair<int, int>> got;
  for (const auto& g : nb) got.insert({g.r, g.c});
  std::set<std::pair<int, int>> want = {{4, 4}, {4, 5}, {4, 6}, {5, 4},
                                        {5, 6}, {6, 4}, {6, 5}, {6, 6}};
  CHECK(got == want);
}

TEST_CASE("queen neighbors live on an unbounded domain and exclude self") {
  auto nb = queen_neighbors(GridIndex{0, 0});
  bool has_negneg = false;
  for (const auto& g : nb) {
    CHECK_FALSE(g == GridIndex{0, 0});
    if (g == GridIndex{-1, -1}) has_negneg = true;
  }
  CHECK(has_negneg);
  CHECK(nb.size() == 8);
}

TEST_CASE("queen neighbor relation is symmetric") {
  for (int r = -2; r <= 2; ++r) {
    for (int c = -2; c <= 2; ++c) {
      GridIndex g{r, c};
      for (const auto& n : queen_neighbors(g)) {
        bool back = false;
        for (const auto& m : queen_neighbors(n))
          if (m == g) back = true;
        CHECK(back);
      }
    }
  }
}

TEST_CASE("build_stkg emits the documented triple counts") {
  std::vector<Stay> stays = {make_stay(0, 10, 10, 1, 50, 3)};
  STKGStore store = build_stkg("u1", stays);
  int belongs = 0, located = 0, occurs = 0, covers = 0;
  for (const Triple& t : store.base_triples()) {
    switch (t.pred) {
      case Predicate::kBelongsTo: ++belongs; break;
      case Predicate::kLocatedIn: ++located; break;
      case Predicate::kOccursOn: ++occurs; break;
      case Predicate::kCoversSlot: ++covers; break;
      default: break;
    }
  }
  CHECK(belongs == 1);
  CHECK(located == 1);
  CHECK(occurs == 1);
  CHECK(covers == 3);
}

TEST_CASE("empty stay list leaves only the user entity") {
  STKGStore store = build_stkg("u1", {});
  CHECK(store.base_triples().empty());
  CHECK(store.entity_count_stays() == 0);
  CHECK(store.entity_count_grids() == 0);
}

TEST_CASE("two stays produce exactly two locatedIn triples") {
  std::vector<Stay> stays = {make_stay(0, 1, 1, 0, 10, 2), make_stay(1, 2, 2, 0, 20, 2)};
  STKGStore store = build_stkg("u1", stays);
  int located = 0;
  for (const Triple& t : store.base_triples())
    if (t.pred == Predicate::kLocatedIn) ++located;
  CHECK(located == 2);
}

TEST_CASE("same-grid stays are spatially related") {
  std::vector<Stay> stays = {make_stay(0, 4, 4, 0, 10, 3), make_stay(1, 4, 4, 0, 30, 3)};
  auto sg = infer_spatial_relations(build_stkg("u1", stays));
  CHECK(sg.has_edge(0, 1));
}

TEST_CASE("diagonal adjacency gives a spatial edge") {
  std::vector<Stay> stays = {make_stay(0, 0, 0, 0, 10, 3), make_stay(1, 1, 1, 0, 30, 3)};
  auto sg = infer_spatial_relations(build_stkg("u1", stays));
  CHECK(sg.has_edge(0, 1));
}

TEST_CASE("path closure connects cells through an intermediate stay") {
  std::vector<Stay> far = {make_stay(0, 0, 0, 0, 10, 3), make_stay(1, 0, 2, 0, 30, 3)};
  auto sg_far = infer_spatial_relations(build_stkg("u1", far));
  CHECK_FALSE(sg_far.has_edge(0, 1));

  std::vector<Stay> bridged = {make_stay(0, 0, 0, 0, 10, 3), make_stay(1, 0, 2, 0, 30, 3),
                               make_stay(2, 0, 1, 0, 50, 3)};
  auto sg = infer_spatial_relations(build_stkg("u1", bridged));
  CHECK(sg.has_edge(0, 1));
  CHECK(sg.has_edge(0, 2));
  CHECK(sg.has_edge(1, 2));
  CHECK(sg.edge_count() == 3);
}

TEST_CASE("spatial components form complete stay graphs") {
  std::vector<Stay> stays;
  for (int i = 0; i < 4; ++i) stays.push_back(make_stay(i, 0, i % 2, 0, 10 * i, 2));
  for (int i = 4; i < 7; ++i) stays.push_back(make_stay(i, 50, 50 + i % 2, 0, 10 * i, 2));
  auto sg = infer_spatial_relations(build_stkg("u1", stays));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(sg.has_edge(i, j));
  for (int i = 4; i < 7; ++i)
    for (int j = 0; j < 4; ++j) CHECK_FALSE(sg.has_edge(i, j));
  CHECK(sg.edge_count() == 6 + 3);
}

TEST_CASE("cosine co-occurrence frozen values") {
  Occupancy144 a, b;
  for (int s = 50; s < 56; ++s) a.set(s);
  CHECK(cosine_cooccurrence(a, a) == doctest::Approx(1.0));

  for (int s = 100; s < 104; ++s) b.set(s);
  CHECK(cosine_cooccurrence(a, b) == doctest::Approx(0.0));

  // |A| = 6, |B| = 4, overlap 4 (the 9:20-9:50 slots): 4 / sqrt(24).
  Occupancy144 a2, b2;
  for (int s = 54; s < 60; ++s) a2.set(s);  // 9:00..10:00
  for (int s = 56; s < 60; ++s) b2.set(s);  // 9:20..10:00
  double expected = 4.0 / std::sqrt(24.0);
  CHECK(cosine_cooccurrence(a2, b2) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(cosine_cooccurrence(a2, b2) == doctest::Approx(0.816497).epsilon(1e-6));
}

TEST_CASE("cosine matches the brute-force oracle and is monotone in overlap") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 50; ++trial) {
    Occupancy144 a, b;
    std::vector<int> va(144, 0), vb(144, 0);
    for (int s = 0; s < 144; ++s) {
      if (gen() % 3 == 0) {
        a.set(s);
        va[s] = 1;
      }
      if (gen() % 3 == 0) {
        b.set(s);
        vb[s] = 1;
      }
    }
    if (a.count() == 0 || b.count() == 0) continue;
    CHECK(cosine_cooccurrence(a, b) ==
          doctest::Approx(oracle::cosine_bits(va, vb)).epsilon(1e-12));

    // Growing the overlap with |A|, |B| fixed never decreases the value.
    int off_a = -1, off_b = -1;
    for (int s = 0; s < 144; ++s) {
      if (va[s] && !vb[s] && off_b < 0) off_b = s;
      if (!va[s] && vb[s] && off_a < 0) off_a = s;
    }
    if (off_a >= 0 && off_b >= 0) {
      // Swap one non-overlapping set bit of b onto a's support.
      Occupancy144 b2;
      for (int s = 0; s < 144; ++s)
        if (vb[s]) b2.set(s);
      // b2 = b with bit off_a cleared and bit off_b set: same |B|, +1 overlap.
      Occupancy144 b3;
      for (int s = 0; s < 144; ++s) {
        if (s == off_a) continue;
        if (vb[s]) b3.set(s);
      }
      b3.set(off_b);
      CHECK(cosine_cooccurrence(a, b3) >= cosine_cooccurrence(a, b) - 1e-12);
    }
  }
}

TEST_CASE("temporal graph lives exactly on the spatial edge set") {
  std::vector<Stay> stays = {make_stay(0, 0, 0, 0, 50, 4), make_stay(1, 0, 1, 1, 50, 4),
                             make_stay(2, 9, 9, 0, 50, 4)};
  STKGStore store = build_stkg("u1", stays);
  auto sg = infer_spatial_relations(store);
  auto tg = infer_temporal_relations(store, sg);
  REQUIRE(tg.edges.size() == 1);
  CHECK(tg.edges[0].i == 0);
  CHECK(tg.edges[0].j == 1);
  CHECK(tg.edges[0].weight == doctest::Approx(1.0));  // identical occupancies

  // Disjoint occupancies on a spatial edge give weight 0 (entry kept).
  std::vector<Stay> stays2 = {make_stay(0, 0, 0, 0, 50, 4), make_stay(1, 0, 1, 0, 100, 4)};
  STKGStore store2 = build_stkg("u1", stays2);
  auto sg2 = infer_spatial_relations(store2);
  auto tg2 = infer_temporal_relations(store2, sg2);
  REQUIRE(tg2.edges.size() == 1);
  CHECK(tg2.edges[0].weight == doctest::Approx(0.0));
}

TEST_CASE("relation triples enumerate with weights") {
  std::vector<Stay> stays = {make_stay(0, 0, 0, 0, 50, 4), make_stay(1, 0, 1, 0, 52, 4)};
  STKGStore store = build_stkg("u1", stays);
  auto sg = infer_spatial_relations(store);
  auto tg = infer_temporal_relations(store, sg);
  store.attach_spatial(std::move(sg));
  store.attach_temporal(std::move(tg));
  int spatial = 0, cooccur = 0;
  store.enumerate_triples([&](const Triple& t) {
    if (t.pred == Predicate::kSpatiallyRelated) ++spatial;
    if (t.pred == Predicate::kCooccursWith) {
      ++cooccur;
      CHECK(t.has_weight);
      CHECK(t.weight >= 0.0);
      CHECK(t.weight <= 1.0);
    }
  });
  CHECK(spatial == 1);
  CHECK(cooccur == 1);
}
