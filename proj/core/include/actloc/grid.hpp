#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

namespace actloc {

// Calendar date, timezone-naive local time throughout.
struct Date {
  int year = 2019;
  int month = 6;
  int day = 1;

  bool operator==(const Date&) const = default;
};

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);
Date civil_from_days(std::int64_t z);

// 0 = Monday .. 6 = Sunday.
int day_of_week(const Date& d);

// Spatial grid and time-slot discretization shared by the whole pipeline.
// Local equirectangular projection with fixed meters-per-degree constants;
// adequate at city scale, which is all the grid method needs.
struct GridConfig {
  double origin_lon = 121.0;
  double origin_lat = 31.0;
  double cell_size = 500.0;   // meters
  Date epoch_date{2019, 6, 1};
  int slot_minutes = 10;
  int slots_per_day = 144;

  double meters_per_deg_lon() const {
    return 111320.0 * std::cos(origin_lat * M_PI / 180.0);
  }
  double meters_per_deg_lat() const { return 110540.0; }
  int slot_seconds() const { return slot_minutes * 60; }
};

struct GridIndex {
  std::int32_t r = 0;
  std::int32_t c = 0;

  bool operator==(const GridIndex&) const = default;
  auto operator<=>(const GridIndex&) const = default;
};

struct GridIndexHash {
  std::size_t operator()(const GridIndex& g) const {
    std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g.r)) << 32) |
                      static_cast<std::uint32_t>(g.c);
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    return static_cast<std::size_t>(k);
  }
};

// (day, slot) with day counted from GridConfig::epoch_date.
struct SlotIndex {
  std::int32_t day = 0;
  std::int32_t slot = 0;  // [0, slots_per_day)

  bool operator==(const SlotIndex&) const = default;
  auto operator<=>(const SlotIndex&) const = default;
};

inline std::int64_t linearize(const SlotIndex& s, int slots_per_day = 144) {
  return static_cast<std::int64_t>(s.day) * slots_per_day + s.slot;
}

inline SlotIndex delinearize(std::int64_t lin, int slots_per_day = 144) {
  SlotIndex s;
  s.day = static_cast<std::int32_t>(lin / slots_per_day);
  s.slot = static_cast<std::int32_t>(lin % slots_per_day);
  return s;
}

// Local position in meters relative to the grid origin.
struct LocalXY {
  double x = 0;
  double y = 0;
};

// x east, y north; c = floor(x / cell), r = floor(y / cell).
LocalXY project_to_local(double lon, double lat, const GridConfig& cfg);
void local_to_lonlat(double x, double y, const GridConfig& cfg, double& lon, double& lat);
GridIndex cell_of(const LocalXY& p, const GridConfig& cfg);

struct Projection {
  GridIndex grid;
  LocalXY pos;
};
Projection project_to_grid(double lon, double lat, const GridConfig& cfg);

// Center of a cell in local meters.
LocalXY cell_center(const GridIndex& g, const GridConfig& cfg);

SlotIndex timestamp_to_slot(std::int64_t timestamp, const GridConfig& cfg);

// Day-of-week of pipeline day index d (0 = Monday .. 6 = Sunday).
int weekday_of_day(int day, const GridConfig& cfg);
inline bool is_weekday(int day, const GridConfig& cfg) {
  return weekday_of_day(day, cfg) < 5;
}

// "YYYY/M/D H:MM:SS" (no zero padding on month/day/hour) to seconds since
// epoch_date midnight. Returns false on malformed input.
bool parse_timestamp(const char* begin, const char* end, const GridConfig& cfg,
                     std::int64_t& out_seconds);

// Inverse of parse_timestamp, same layout as the raw export.
std::string format_timestamp(std::int64_t seconds, const GridConfig& cfg);

bool parse_date(const std::string& s, Date& out);  // YYYY-MM-DD

}  // namespace actloc
