#pragma once

#include <cstdint>
#include <vector>

#include "actloc/community.hpp"
#include "actloc/preprocess.hpp"

namespace actloc {

struct BaselineConfig {
  double d = 500.0;         // meters, stay distance threshold and cell size
  double epsilon = 1000.0;  // meters, DBSCAN radius (2d)
  int min_pts = 1;
  // The 10-minute stay threshold is the slot quantum and is not configurable.
};

// A stay as the baselines see it: a temporally-contiguous presence snapped to
// a position, with the linearized slot span kept for activity building.
struct BaselineStay {
  std::int32_t id = 0;
  std::int64_t start_lin = 0;
  std::int64_t end_lin = 0;  // exclusive
  LocalXY pos;               // stay point used by the radius metric
  GridIndex grid;            // cell of pos (d-sized for the grid method)

  std::int64_t duration_slots() const { return end_lin - start_lin; }
};

struct BaselineResult {
  std::vector<BaselineStay> stays;
  std::vector<std::int32_t> assignment;  // stay id -> location index
  std::vector<ActivityLocation> locations;
};

// Spatial-constraint method: anchor-based stay extraction with a running
// centroid and threshold d, stays snapped to a d-sized grid, then iterative
// aggregation of the max-stay cell with its unmarked queen neighbors.
BaselineResult spatial_constraint_identify(const std::vector<TracePoint>& points,
                                           const BaselineConfig& cfg,
                                           const GridConfig& grid_cfg);

// Non-spatial-constraint method: DBSCAN over trace-point positions
// (min_pts = 1 reduces to connected components of the epsilon-graph), then
// temporally-contiguous runs within each cluster become stays when they
// exceed 10 minutes.
BaselineResult dbscan_identify(const std::vector<TracePoint>& points, const BaselineConfig& cfg,
                               const GridConfig& grid_cfg);

// Cluster labels for a bare point set; exposed for the oracle equivalence
// tests. Labels are dense, assigned in order of first appearance.
std::vector<std::int32_t> dbscan_cluster(const std::vector<LocalXY>& pts, double epsilon,
                                         int min_pts);

}  // namespace actloc
