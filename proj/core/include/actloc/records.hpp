#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "actloc/grid.hpp"

namespace actloc {

// One sighting event. Timestamps are seconds since the configured epoch date
// (timezone-naive local time).
struct RawRecord {
  std::int64_t timestamp = 0;
  double lon = 0;
  double lat = 0;
};

struct UserRecords {
  std::string uid;
  std::vector<RawRecord> records;  // ascending timestamp, file order on ties
};

struct ParseStats {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_skipped = 0;  // malformed or before the epoch date
};

// Parses CSV with header `Uid,Timestamp,Longitude,Latitude` and timestamps
// formatted `YYYY/M/D H:MM:SS`. Malformed rows are counted and skipped, never
// fatal. Output is grouped by uid (uid-sorted) and time-sorted within each
// user, preserving file order on timestamp ties.
std::vector<UserRecords> parse_records(std::istream& in, const GridConfig& cfg,
                                       ParseStats& stats);

std::vector<UserRecords> parse_records_file(const std::string& path, const GridConfig& cfg,
                                            ParseStats& stats);

}  // namespace actloc
