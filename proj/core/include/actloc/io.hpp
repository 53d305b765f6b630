#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "actloc/community.hpp"
#include "actloc/evaluation.hpp"
#include "actloc/preprocess.hpp"
#include "actloc/stays.hpp"
#include "actloc/stkg.hpp"

namespace actloc {

// Writes via a temp file in the same directory, then renames into place.
void atomic_write(const std::string& path,
                  const std::function<void(std::string& buffer)>& fill);

// Line formatters; all numeric formatting is fixed-precision so identical
// inputs produce identical bytes.
void append_trace_point_line(std::string& out, const std::string& uid, const TracePoint& tp);
void append_stay_line(std::string& out, const std::string& uid, const Stay& st);
void append_location_line(std::string& out, const std::string& uid, const char* method,
                          const ActivityLocation& loc, double modularity, bool has_modularity);
void append_triple_line(std::string& out, const std::string& uid, const Triple& t);
void append_per_user_line(std::string& out, const PerUserMetrics& m);

struct TracePointFile {
  std::string uid;
  std::vector<TracePoint> points;
};
std::vector<TracePointFile> read_trace_points_jsonl(const std::string& path);

struct StaysFile {
  std::string uid;
  std::vector<Stay> stays;
};
std::vector<StaysFile> read_stays_jsonl(const std::string& path);

}  // namespace actloc
