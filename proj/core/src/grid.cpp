#include "actloc/grid.hpp"

#include <cstdio>
#include <cstdlib>

namespace actloc {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int day_of_week(const Date& d) {
  // days_from_civil(1970,1,1) == 0 was a Thursday.
  std::int64_t z = days_from_civil(d.year, d.month, d.day);
  return static_cast<int>(((z % 7) + 10) % 7);  // 0 = Monday
}

LocalXY project_to_local(double lon, double lat, const GridConfig& cfg) {
  LocalXY p;
  p.x = (lon - cfg.origin_lon) * cfg.meters_per_deg_lon();
  p.y = (lat - cfg.origin_lat) * cfg.meters_per_deg_lat();
  return p;
}

void local_to_lonlat(double x, double y, const GridConfig& cfg, double& lon, double& lat) {
  lon = cfg.origin_lon + x / cfg.meters_per_deg_lon();
  lat = cfg.origin_lat + y / cfg.meters_per_deg_lat();
}

GridIndex cell_of(const LocalXY& p, const GridConfig& cfg) {
  GridIndex g;
  g.c = static_cast<std::int32_t>(std::floor(p.x / cfg.cell_size));
  g.r = static_cast<std::int32_t>(std::floor(p.y / cfg.cell_size));
  return g;
}

Projection project_to_grid(double lon, double lat, const GridConfig& cfg) {
  Projection out;
  out.pos = project_to_local(lon, lat, cfg);
  out.grid = cell_of(out.pos, cfg);
  return out;
}

LocalXY cell_center(const GridIndex& g, const GridConfig& cfg) {
  LocalXY p;
  p.x = (g.c + 0.5) * cfg.cell_size;
  p.y = (g.r + 0.5) * cfg.cell_size;
  return p;
}

SlotIndex timestamp_to_slot(std::int64_t timestamp, const GridConfig& cfg) {
  SlotIndex s;
  s.day = static_cast<std::int32_t>(timestamp / 86400);
  s.slot = static_cast<std::int32_t>((timestamp % 86400) / cfg.slot_seconds());
  return s;
}

int weekday_of_day(int day, const GridConfig& cfg) {
  return (day_of_week(cfg.epoch_date) + day) % 7;
}

namespace {

// Parses an unsigned integer, advancing p. Returns false if no digits.
bool eat_uint(const char*& p, const char* end, long& out) {
  if (p >= end || *p < '0' || *p > '9') return false;
  long v = 0;
  while (p < end && *p >= '0' && *p <= '9') {
    v = v * 10 + (*p - '0');
    ++p;
  }
  out = v;
  return true;
}

bool eat_char(const char*& p, const char* end, char c) {
  if (p >= end || *p != c) return false;
  ++p;
  return true;
}

}  // namespace

bool parse_timestamp(const char* begin, const char* end, const GridConfig& cfg,
                     std::int64_t& out_seconds) {
  const char* p = begin;
  while (p < end && *p == ' ') ++p;
  long y, mo, d, h, mi, se;
  if (!eat_uint(p, end, y) || !eat_char(p, end, '/') || !eat_uint(p, end, mo) ||
      !eat_char(p, end, '/') || !eat_uint(p, end, d) || !eat_char(p, end, ' ') ||
      !eat_uint(p, end, h) || !eat_char(p, end, ':') || !eat_uint(p, end, mi) ||
      !eat_char(p, end, ':') || !eat_uint(p, end, se))
    return false;
  while (p < end && *p == ' ') ++p;
  if (p != end) return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return false;
  std::int64_t days = days_from_civil(static_cast<int>(y), static_cast<int>(mo),
                                      static_cast<int>(d)) -
                      days_from_civil(cfg.epoch_date.year, cfg.epoch_date.month,
                                      cfg.epoch_date.day);
  out_seconds = days * 86400 + h * 3600 + mi * 60 + se;
  return true;
}

std::string format_timestamp(std::int64_t seconds, const GridConfig& cfg) {
  std::int64_t day = seconds / 86400;
  std::int64_t sod = seconds % 86400;
  if (sod < 0) {
    sod += 86400;
    day -= 1;
  }
  Date dt = civil_from_days(
      days_from_civil(cfg.epoch_date.year, cfg.epoch_date.month, cfg.epoch_date.day) + day);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%d/%d/%d %d:%02d:%02d", dt.year, dt.month, dt.day,
                static_cast<int>(sod / 3600), static_cast<int>((sod % 3600) / 60),
                static_cast<int>(sod % 60));
  return buf;
}

bool parse_date(const std::string& s, Date& out) {
  int y, m, d;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3) return false;
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  out = Date{y, m, d};
  return true;
}

}  // namespace actloc
