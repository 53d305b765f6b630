#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "actloc/stkg.hpp"

namespace actloc {

// Raised when a cross-checked internal invariant breaks (debug modes only);
// the CLI maps it to exit code 2.
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Undirected weighted graph over dense integer node ids. A self-loop's
// weight is stored once; it contributes twice to the node strength and twice
// to the ordered-pair adjacency sum, so 2m == sum of strengths holds.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::int32_t n = 0);

  void add_edge(std::int32_t u, std::int32_t v, double w);  // u != v
  void add_self_loop(std::int32_t u, double w);

  std::int32_t size() const { return n_; }
  double total_weight() const { return m_; }  // m = (sum_ij A_ij) / 2
  double strength(std::int32_t u) const { return strength_[u]; }
  double self_loop(std::int32_t u) const { return self_loop_[u]; }
  const std::vector<std::pair<std::int32_t, double>>& neighbors(std::int32_t u) const {
    return adj_[u];
  }

 private:
  std::int32_t n_ = 0;
  double m_ = 0;
  std::vector<std::vector<std::pair<std::int32_t, double>>> adj_;
  std::vector<double> strength_;
  std::vector<double> self_loop_;
};

// node -> community id; ids form a contiguous range after compact().
struct Partition {
  std::vector<std::int32_t> assignment;

  std::int32_t community_count() const;
  void compact();

  static Partition singletons(std::int32_t n);
};

// Per-community running sums used by the gain formula: w_in is the
// ordered-pair internal adjacency sum (internal edges twice, self-loops
// twice), w_tot the summed strength of members.
struct CommunityState {
  std::vector<double> w_in;
  std::vector<double> w_tot;

  static CommunityState from(const WeightedGraph& g, const Partition& p);
};

// Modularity per the ordered-pair double sum. Edgeless graphs score 0.
double modularity(const WeightedGraph& g, const Partition& p);

// Gain of inserting a detached node (currently in no community) into
// `target`, with k_in the weight from the node to current members of target.
double modularity_gain(const WeightedGraph& g, const CommunityState& state, std::int32_t node,
                       std::int32_t target, double k_in);

struct LouvainOptions {
  double tolerance = 1e-10;
  // Cross-checks every accepted move's predicted gain against a full
  // recomputation; for debugging, costs O(n + e) per move.
  bool check_gains = false;
};

struct LouvainResult {
  Partition partition;  // over original nodes, compacted
  double modularity = 0;
  std::uint64_t moves = 0;
  std::uint64_t levels = 0;
  double max_gain_error = 0;  // only populated when check_gains is set
};

// Deterministic Fast Unfolding: phase 1 sweeps nodes in ascending id and
// moves each to the neighboring community with the largest gain (ties:
// smallest community id) while the gain exceeds the tolerance; phase 2
// aggregates communities into super-nodes with modularity-preserving
// self-loops. Repeats until modularity stops improving.
LouvainResult louvain(const WeightedGraph& g, const LouvainOptions& opts = LouvainOptions{});

// Hadamard fusion of the spatial and temporal graphs: an edge exists iff
// spatially related and the co-occurrence weight is positive.
WeightedGraph build_st_graph(const SpatialGraph& sg, const TemporalGraph& tg);

// A community of stays mapped onto geography.
struct ActivityLocation {
  std::int32_t id = 0;
  std::vector<std::int32_t> stay_ids;
  std::vector<GridIndex> cells;  // distinct, sorted
  LocalXY centroid;              // unweighted mean of member stays' cell centers
  std::int64_t total_duration_slots = 0;
};

// One location per community, ids assigned by descending total duration
// (ties: smallest member stay id).
std::vector<ActivityLocation> to_activity_locations(const Partition& p,
                                                    const std::vector<Stay>& stays,
                                                    const GridConfig& cfg);

}  // namespace actloc
