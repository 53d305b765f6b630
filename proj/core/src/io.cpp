#include "actloc/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace actloc {

void atomic_write(const std::string& path,
                  const std::function<void(std::string& buffer)>& fill) {
  std::string buffer;
  fill(buffer);
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

namespace {

void append_num(std::string& out, std::int64_t v) {
  char buf[24];
  int n = std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  out.append(buf, n);
}

void append_fixed(std::string& out, double v, int prec) {
  char buf[40];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  out.append(buf, n);
}

}  // namespace

void append_trace_point_line(std::string& out, const std::string& uid, const TracePoint& tp) {
  out += "{\"uid\":\"";
  out += uid;
  out += "\",\"day\":";
  append_num(out, tp.when.day);
  out += ",\"slot\":";
  append_num(out, tp.when.slot);
  out += ",\"r\":";
  append_num(out, tp.grid.r);
  out += ",\"c\":";
  append_num(out, tp.grid.c);
  out += ",\"x\":";
  append_fixed(out, tp.pos.x, 3);
  out += ",\"y\":";
  append_fixed(out, tp.pos.y, 3);
  out += "}\n";
}

void append_stay_line(std::string& out, const std::string& uid, const Stay& st) {
  out += "{\"uid\":\"";
  out += uid;
  out += "\",\"stay_id\":";
  append_num(out, st.id);
  out += ",\"r\":";
  append_num(out, st.grid.r);
  out += ",\"c\":";
  append_num(out, st.grid.c);
  out += ",\"start_day\":";
  append_num(out, st.start.day);
  out += ",\"start_slot\":";
  append_num(out, st.start.slot);
  out += ",\"end_day\":";
  append_num(out, st.end.day);
  out += ",\"end_slot\":";
  append_num(out, st.end.slot);
  out += ",\"occupancy_hex\":\"";
  out += st.occupancy.to_hex();
  out += "\"}\n";
}

void append_location_line(std::string& out, const std::string& uid, const char* method,
                          const ActivityLocation& loc, double modularity, bool has_modularity) {
  out += "{\"uid\":\"";
  out += uid;
  out += "\",\"method\":\"";
  out += method;
  out += "\",\"location_id\":";
  append_num(out, loc.id);
  out += ",\"stay_ids\":[";
  for (std::size_t i = 0; i < loc.stay_ids.size(); ++i) {
    if (i) out += ',';
    append_num(out, loc.stay_ids[i]);
  }
  out += "],\"cells\":[";
  for (std::size_t i = 0; i < loc.cells.size(); ++i) {
    if (i) out += ',';
    out += '[';
    append_num(out, loc.cells[i].r);
    out += ',';
    append_num(out, loc.cells[i].c);
    out += ']';
  }
  out += "],\"centroid_x\":";
  append_fixed(out, loc.centroid.x, 3);
  out += ",\"centroid_y\":";
  append_fixed(out, loc.centroid.y, 3);
  out += ",\"total_duration_slots\":";
  append_num(out, loc.total_duration_slots);
  if (has_modularity) {
    out += ",\"modularity\":";
    append_fixed(out, modularity, 9);
  }
  out += "}\n";
}

void append_triple_line(std::string& out, const std::string& uid, const Triple& t) {
  auto stay_ref = [&](std::int64_t id) {
    std::string s = "stay:";
    s += uid;
    s += ':';
    s += std::to_string(id);
    return s;
  };
  out += "{\"s\":\"";
  out += stay_ref(t.stay);
  out += "\",\"p\":\"";
  out += predicate_name(t.pred);
  out += "\",\"o\":\"";
  switch (t.obj_kind) {
    case Triple::ObjKind::kUser:
      out += "user:";
      out += uid;
      break;
    case Triple::ObjKind::kGrid:
      out += "grid:";
      append_num(out, t.obj_a);
      out += ':';
      append_num(out, t.obj_b);
      break;
    case Triple::ObjKind::kDay:
      out += "day:";
      append_num(out, t.obj_a);
      break;
    case Triple::ObjKind::kSlot:
      out += "slot:";
      append_num(out, t.obj_a);
      break;
    case Triple::ObjKind::kStay:
      out += stay_ref(t.obj_a);
      break;
  }
  out += '"';
  if (t.has_weight) {
    out += ",\"weight\":";
    append_fixed(out, t.weight, 9);
  }
  out += "}\n";
}

void append_per_user_line(std::string& out, const PerUserMetrics& m) {
  out += "{\"uid\":\"";
  out += m.uid;
  out += "\",\"method\":\"";
  out += m.method;
  out += "\",\"primary_location\":";
  append_num(out, m.primary_location);
  out += ",\"var_start_h2\":";
  append_fixed(out, m.var_start_h2, 6);
  out += ",\"var_end_h2\":";
  append_fixed(out, m.var_end_h2, 6);
  out += ",\"observable_days\":";
  append_num(out, m.observable);
  out += ",\"max_radius_m\":";
  append_fixed(out, m.max_radius_m, 3);
  if (m.ari) {
    out += ",\"ari\":";
    append_fixed(out, *m.ari, 6);
  }
  out += "}\n";
}

std::vector<TracePointFile> read_trace_points_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace point file: " + path);
  std::map<std::string, std::vector<TracePoint>> by_uid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TracePoint tp;
    tp.when = SlotIndex{j.at("day").get<std::int32_t>(), j.at("slot").get<std::int32_t>()};
    tp.grid = GridIndex{j.at("r").get<std::int32_t>(), j.at("c").get<std::int32_t>()};
    tp.pos = LocalXY{j.at("x").get<double>(), j.at("y").get<double>()};
    by_uid[j.at("uid").get<std::string>()].push_back(tp);
  }
  std::vector<TracePointFile> out;
  for (auto& [uid, pts] : by_uid) out.push_back(TracePointFile{uid, std::move(pts)});
  return out;
}

std::vector<StaysFile> read_stays_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stays file: " + path);
  std::map<std::string, std::vector<Stay>> by_uid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Stay st;
    st.id = j.at("stay_id").get<std::int32_t>();
    st.grid = GridIndex{j.at("r").get<std::int32_t>(), j.at("c").get<std::int32_t>()};
    st.start = SlotIndex{j.at("start_day").get<std::int32_t>(),
                         j.at("start_slot").get<std::int32_t>()};
    st.end = SlotIndex{j.at("end_day").get<std::int32_t>(), j.at("end_slot").get<std::int32_t>()};
    st.duration_slots = st.end_lin() - st.start_lin();
    if (!Occupancy144::from_hex(j.at("occupancy_hex").get<std::string>(), st.occupancy))
      throw std::runtime_error("bad occupancy_hex in " + path);
    by_uid[j.at("uid").get<std::string>()].push_back(st);
  }
  std::vector<StaysFile> out;
  for (auto& [uid, stays] : by_uid) out.push_back(StaysFile{uid, std::move(stays)});
  return out;
}

}  // namespace actloc
