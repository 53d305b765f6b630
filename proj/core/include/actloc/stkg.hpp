#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "actloc/stays.hpp"

namespace actloc {

enum class Predicate {
  kBelongsTo,         // Stay -> User
  kLocatedIn,         // Stay -> Grid
  kOccursOn,          // Stay -> Day
  kCoversSlot,        // Stay -> TimeSlot
  kSpatiallyRelated,  // Stay <-> Stay
  kCooccursWith,      // Stay <-> Stay, weight in [0,1]
};

const char* predicate_name(Predicate p);

// One knowledge triple. The object is one of several entity kinds; relation
// triples carry a weight when the predicate is cooccursWith.
struct Triple {
  Predicate pred;
  std::int32_t stay;  // subject stay id
  enum class ObjKind { kUser, kGrid, kDay, kSlot, kStay } obj_kind;
  std::int64_t obj_a = 0;  // grid r / day / slot / stay id
  std::int64_t obj_b = 0;  // grid c
  double weight = 0;
  bool has_weight = false;
};

// Unweighted symmetric stay-stay adjacency after path closure: two stays are
// related iff their grids fall in the same connected component of the
// queen-contiguity graph over the user's stay grids. Within a component the
// relation is complete, so components are the compact representation.
struct SpatialGraph {
  std::int32_t n = 0;
  std::vector<std::int32_t> component;               // per stay
  std::vector<std::vector<std::int32_t>> components; // stay ids per component

  bool has_edge(std::int32_t i, std::int32_t j) const {
    return i != j && component[i] == component[j];
  }
  std::uint64_t edge_count() const;
};

// Cosine co-occurrence weights on exactly the spatial edge set.
struct TemporalGraph {
  std::int32_t n = 0;
  struct Edge {
    std::int32_t i, j;  // i < j
    double weight;
  };
  std::vector<Edge> edges;
};

// Per-user triple collection over {User, Stay, Grid, Day, TimeSlot}
// entities. Base triples are materialized at construction; relation triples
// are derived from the inferred graphs when enumerated, which keeps the
// store small for users with large spatially-connected stay sets.
class STKGStore {
 public:
  STKGStore() = default;
  STKGStore(std::string uid, std::vector<Stay> stays);

  const std::string& uid() const { return uid_; }
  const std::vector<Stay>& stays() const { return stays_; }

  std::size_t entity_count_stays() const { return stays_.size(); }
  std::size_t entity_count_grids() const { return grids_.size(); }
  std::size_t entity_count_days() const { return days_.size(); }
  std::size_t entity_count_slots() const { return slots_.size(); }

  const std::vector<Triple>& base_triples() const { return base_; }

  void attach_spatial(SpatialGraph sg) { spatial_ = std::move(sg); has_spatial_ = true; }
  void attach_temporal(TemporalGraph tg) { temporal_ = std::move(tg); has_temporal_ = true; }
  const SpatialGraph& spatial() const { return spatial_; }
  const TemporalGraph& temporal() const { return temporal_; }
  bool has_spatial() const { return has_spatial_; }
  bool has_temporal() const { return has_temporal_; }

  // Visits base triples, then spatiallyRelated, then cooccursWith (each
  // symmetric pair visited once, i < j).
  void enumerate_triples(const std::function<void(const Triple&)>& fn) const;

 private:
  std::string uid_;
  std::vector<Stay> stays_;
  std::vector<Triple> base_;
  std::vector<GridIndex> grids_;
  std::vector<std::int32_t> days_;
  std::vector<std::int32_t> slots_;
  SpatialGraph spatial_;
  TemporalGraph temporal_;
  bool has_spatial_ = false;
  bool has_temporal_ = false;
};

STKGStore build_stkg(const std::string& uid, const std::vector<Stay>& stays);

// The 8 queen-contiguity neighbors of a cell (unbounded index domain).
std::array<GridIndex, 8> queen_neighbors(const GridIndex& g);

SpatialGraph infer_spatial_relations(const STKGStore& store);

// |A and B| / sqrt(|A| |B|); both vectors must be nonempty.
double cosine_cooccurrence(const Occupancy144& a, const Occupancy144& b);

TemporalGraph infer_temporal_relations(const STKGStore& store, const SpatialGraph& sg);

}  // namespace actloc
