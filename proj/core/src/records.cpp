#include "actloc/records.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <unordered_map>

namespace actloc {

namespace {

// Hand-rolled decimal parser; raw exports are large enough that strtod shows
// up in profiles. Accepts [-]digits[.digits].
bool parse_double(const char* begin, const char* end, double& out) {
  const char* p = begin;
  while (p < end && *p == ' ') ++p;
  bool neg = false;
  if (p < end && (*p == '-' || *p == '+')) {
    neg = (*p == '-');
    ++p;
  }
  if (p >= end || ((*p < '0' || *p > '9') && *p != '.')) return false;
  double v = 0;
  bool any = false;
  while (p < end && *p >= '0' && *p <= '9') {
    v = v * 10 + (*p - '0');
    ++p;
    any = true;
  }
  if (p < end && *p == '.') {
    ++p;
    double scale = 1;
    double frac = 0;
    while (p < end && *p >= '0' && *p <= '9') {
      frac = frac * 10 + (*p - '0');
      scale *= 10;
      ++p;
      any = true;
    }
    v += frac / scale;
  }
  while (p < end && *p == ' ') ++p;
  if (!any || p != end) return false;
  out = neg ? -v : v;
  return true;
}

struct FieldView {
  const char* begin;
  const char* end;
};

// Splits a CSV line on commas; no quoting in this schema.
int split4(const char* begin, const char* end, FieldView f[4]) {
  int n = 0;
  const char* field_start = begin;
  for (const char* p = begin; p <= end; ++p) {
    if (p == end || *p == ',') {
      if (n < 4) f[n] = {field_start, p};
      ++n;
      field_start = p + 1;
    }
  }
  return n;
}

void trim(FieldView& f) {
  while (f.begin < f.end && (*f.begin == ' ' || *f.begin == '\t')) ++f.begin;
  while (f.end > f.begin && (f.end[-1] == ' ' || f.end[-1] == '\t' || f.end[-1] == '\r')) --f.end;
}

}  // namespace

std::vector<UserRecords> parse_records(std::istream& in, const GridConfig& cfg,
                                       ParseStats& stats) {
  std::vector<UserRecords> users;
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(1 << 14);

  // Fast path for uid-grouped files: most rows repeat the previous uid.
  std::string last_uid;
  std::size_t last_idx = static_cast<std::size_t>(-1);

  std::vector<char> buf(1 << 22);
  std::string carry;
  bool header_done = false;

  auto handle_line = [&](const char* b, const char* e) {
    if (b == e) return;
    if (!header_done) {
      header_done = true;  // header is mandated by the format; skip it
      return;
    }
    ++stats.rows_read;
    FieldView f[4];
    if (split4(b, e, f) != 4) {
      ++stats.rows_skipped;
      return;
    }
    for (auto& fv : f) trim(fv);
    std::int64_t ts;
    double lon, lat;
    if (f[0].begin == f[0].end || !parse_timestamp(f[1].begin, f[1].end, cfg, ts) ||
        !parse_double(f[2].begin, f[2].end, lon) || !parse_double(f[3].begin, f[3].end, lat) ||
        lon < -180.0 || lon > 180.0 || lat < -90.0 || lat > 90.0 || ts < 0) {
      ++stats.rows_skipped;
      return;
    }
    std::size_t idx;
    if (last_idx != static_cast<std::size_t>(-1) &&
        last_uid.compare(0, last_uid.size(), f[0].begin, f[0].end - f[0].begin) == 0) {
      idx = last_idx;
    } else {
      std::string uid(f[0].begin, f[0].end);
      auto it = index.find(uid);
      if (it == index.end()) {
        idx = users.size();
        index.emplace(uid, idx);
        users.push_back(UserRecords{uid, {}});
      } else {
        idx = it->second;
      }
      last_uid = std::move(uid);
      last_idx = idx;
    }
    users[idx].records.push_back(RawRecord{ts, lon, lat});
  };

  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize got = in.gcount();
    if (got <= 0) break;
    const char* data = buf.data();
    const char* end = data + got;
    const char* line_start = data;
    for (const char* p = data; p < end; ++p) {
      if (*p == '\n') {
        if (!carry.empty()) {
          carry.append(line_start, p);
          handle_line(carry.data(), carry.data() + carry.size());
          carry.clear();
        } else {
          handle_line(line_start, p);
        }
        line_start = p + 1;
      }
    }
    carry.append(line_start, end);
  }
  if (!carry.empty()) handle_line(carry.data(), carry.data() + carry.size());

  for (auto& u : users) {
    auto& r = u.records;
    if (!std::is_sorted(r.begin(), r.end(), [](const RawRecord& a, const RawRecord& b) {
          return a.timestamp < b.timestamp;
        })) {
      std::stable_sort(r.begin(), r.end(), [](const RawRecord& a, const RawRecord& b) {
        return a.timestamp < b.timestamp;
      });
    }
  }
  std::sort(users.begin(), users.end(),
            [](const UserRecords& a, const UserRecords& b) { return a.uid < b.uid; });
  return users;
}

std::vector<UserRecords> parse_records_file(const std::string& path, const GridConfig& cfg,
                                            ParseStats& stats) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return parse_records(in, cfg, stats);
}

}  // namespace actloc
