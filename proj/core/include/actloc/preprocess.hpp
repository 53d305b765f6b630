#pragma once

#include <cstdint>
#include <vector>

#include "actloc/grid.hpp"
#include "actloc/records.hpp"

namespace actloc {

// Thresholds for ping-pong removal. The cleaning target is the A-B-A pattern:
// a bounce to another tower and back with no plausible movement.
struct OscillationParams {
  double max_speed = 100.0 / 3.0;   // m/s
  double pingpong_window = 600.0;   // s, elapsed time bound for the A..A return
  double ratio_lo = 0.67;           // displacement ratio band d(i-1,i)/d(i,i+1)
  double ratio_hi = 1.5;
  double return_radius = 200.0;     // m, how close the A endpoints must be
};

// Smoothed presence in one (day, slot, cell) unit. Position is the
// duration-weighted mean of the records overlapping the slot.
struct TracePoint {
  SlotIndex when;
  GridIndex grid;
  LocalXY pos;
};

// Removes record i when (a) the records around it return to roughly the same
// place within the window, and (b) the displacement ratio sits in the
// ping-pong band or either leg is faster than max_speed. Repeats passes until
// nothing is removed. Sequences shorter than 3 pass through unchanged.
std::vector<RawRecord> filter_oscillations(const std::vector<RawRecord>& records,
                                           const OscillationParams& params,
                                           const GridConfig& cfg,
                                           std::uint64_t* removed_count = nullptr);

// Connection duration of record i is t(i+1) - t(i); the last record's
// duration runs to the end of its slot. Durations are apportioned to the
// slots they overlap and each occupied slot yields one trace point at the
// weighted mean position.
std::vector<TracePoint> smooth_to_trace_points(const std::vector<RawRecord>& records,
                                               const GridConfig& cfg);

}  // namespace actloc
