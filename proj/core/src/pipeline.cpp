#include "actloc/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace actloc {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  int k = std::min<std::size_t>(workers, n);
  pool.reserve(k);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EvalStay> eval_view(const std::vector<Stay>& stays, const GridConfig& cfg) {
  std::vector<EvalStay> out(stays.size());
  for (std::size_t i = 0; i < stays.size(); ++i) {
    out[i].id = stays[i].id;
    out[i].start_lin = stays[i].start_lin();
    out[i].end_lin = stays[i].end_lin();
    out[i].point = cell_center(stays[i].grid, cfg);
  }
  return out;
}

std::vector<EvalStay> eval_view(const std::vector<BaselineStay>& stays, double cell_size) {
  std::vector<EvalStay> out(stays.size());
  for (std::size_t i = 0; i < stays.size(); ++i) {
    out[i].id = stays[i].id;
    out[i].start_lin = stays[i].start_lin;
    out[i].end_lin = stays[i].end_lin;
    out[i].point = LocalXY{(stays[i].grid.c + 0.5) * cell_size, (stays[i].grid.r + 0.5) * cell_size};
  }
  return out;
}

std::vector<StayTruthCounts> truth_counts_for_spans(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans, const UserTruth& truth,
    const std::vector<RawRecord>& records, const GridConfig& cfg) {
  std::vector<StayTruthCounts> out(spans.size());
  if (spans.empty()) return out;
  const int slot_sec = cfg.slot_seconds();
  // Spans are disjoint and sorted; records are time-sorted. Truth labels
  // follow file order, which the generator emits time-sorted.
  std::vector<std::array<std::int64_t, 2>> counts(spans.size(), {0, 0});
  std::size_t si = 0;
  std::size_t n = std::min(records.size(), truth.labels.size());
  for (std::size_t i = 0; i < n; ++i) {
    char lab = truth.labels[i];
    if (lab != 'h' && lab != 'w') continue;
    std::int64_t slot = records[i].timestamp / slot_sec;
    while (si < spans.size() && spans[si].second <= slot) ++si;
    if (si < spans.size() && spans[si].first <= slot && slot < spans[si].second)
      ++counts[si][lab == 'h' ? 0 : 1];
  }
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (counts[s][0]) out[s].emplace_back(0, counts[s][0]);
    if (counts[s][1]) out[s].emplace_back(1, counts[s][1]);
  }
  return out;
}

namespace {

// Structural cross-checks behind --debug-invariants; failures surface as
// exit code 2 rather than silently wrong output.
void check_user_invariants(const UserPipelineResult& r, const PipelineConfig& cfg) {
  for (std::size_t i = 1; i < r.stays.size(); ++i) {
    if (r.stays[i - 1].end_lin() > r.stays[i].start_lin())
      throw InvariantViolation("stays overlap in linearized time");
  }
  for (const Stay& st : r.stays) {
    if (st.duration_slots < 2 || st.occupancy.count() < 1)
      throw InvariantViolation("stay below duration threshold or empty occupancy");
  }
  auto check_partition = [](const std::vector<std::int32_t>& assignment,
                            const std::vector<ActivityLocation>& locs, const char* what) {
    std::vector<int> seen(assignment.size(), 0);
    for (const ActivityLocation& loc : locs) {
      for (std::int32_t sid : loc.stay_ids) {
        if (sid < 0 || static_cast<std::size_t>(sid) >= seen.size() || seen[sid]++)
          throw InvariantViolation(std::string(what) + ": stay not in exactly one location");
      }
    }
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] < 0 || !seen[i])
        throw InvariantViolation(std::string(what) + ": unassigned stay");
    }
  };
  check_partition(r.stkg_assignment, r.stkg_locations, "stkg");
  check_partition(r.grid.assignment, r.grid.locations, "grid");
  check_partition(r.dbscan.assignment, r.dbscan.locations, "dbscan");
  for (const PerUserMetrics* m : {&r.metrics_stkg, &r.metrics_grid, &r.metrics_dbscan}) {
    if (m->var_start_h2 < 0 || m->var_end_h2 < 0)
      throw InvariantViolation("negative variance");
  }
  // Grid-method radius bound: every cluster fits a 3x3 window of d-cells.
  for (double radius : r.metrics_grid.radii) {
    if (radius > 3.0 * cfg.baseline.d)
      throw InvariantViolation("grid-baseline cluster radius above 3d");
  }
}

}  // namespace

UserPipelineResult process_user(const std::string& uid, const std::vector<RawRecord>& records,
                                const UserTruth* truth, const PipelineConfig& cfg) {
  UserPipelineResult res;
  std::vector<RawRecord> filtered =
      filter_oscillations(records, cfg.oscillation, cfg.grid, &res.oscillations_removed);
  res.trace_points = smooth_to_trace_points(filtered, cfg.grid);
  res.stays = extract_stays(res.trace_points, cfg.midnight, cfg.max_gap_slots, &res.stay_stats,
                            cfg.grid);

  STKGStore store = build_stkg(uid, res.stays);
  SpatialGraph sg = infer_spatial_relations(store);
  TemporalGraph tg = infer_temporal_relations(store, sg);
  WeightedGraph stg = build_st_graph(sg, tg);
  LouvainOptions opts;
  opts.check_gains = cfg.debug_invariants;
  LouvainResult louv = louvain(stg, opts);
  res.stkg_modularity = louv.modularity;
  res.stkg_locations = to_activity_locations(louv.partition, res.stays, cfg.grid);
  res.stkg_assignment.assign(res.stays.size(), -1);
  for (const ActivityLocation& loc : res.stkg_locations) {
    for (std::int32_t sid : loc.stay_ids) res.stkg_assignment[sid] = loc.id;
  }

  res.grid = spatial_constraint_identify(res.trace_points, cfg.baseline, cfg.grid);
  res.dbscan = dbscan_identify(res.trace_points, cfg.baseline, cfg.grid);

  std::vector<EvalStay> ev_stkg = eval_view(res.stays, cfg.grid);
  std::vector<EvalStay> ev_grid = eval_view(res.grid.stays, cfg.baseline.d);
  std::vector<EvalStay> ev_db = eval_view(res.dbscan.stays, cfg.grid.cell_size);

  std::vector<StayTruthCounts> tl_stkg, tl_grid, tl_db;
  const std::vector<StayTruthCounts>* p_stkg = nullptr;
  const std::vector<StayTruthCounts>* p_grid = nullptr;
  const std::vector<StayTruthCounts>* p_db = nullptr;
  if (truth) {
    auto spans_of = [](const std::vector<EvalStay>& v) {
      std::vector<std::pair<std::int64_t, std::int64_t>> spans(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) spans[i] = {v[i].start_lin, v[i].end_lin};
      return spans;
    };
    tl_stkg = truth_counts_for_spans(spans_of(ev_stkg), *truth, records, cfg.grid);
    tl_grid = truth_counts_for_spans(spans_of(ev_grid), *truth, records, cfg.grid);
    tl_db = truth_counts_for_spans(spans_of(ev_db), *truth, records, cfg.grid);
    p_stkg = &tl_stkg;
    p_grid = &tl_grid;
    p_db = &tl_db;
  }

  res.metrics_stkg = evaluate_user(uid, "stkg", ev_stkg, res.stkg_assignment,
                                   res.stkg_locations, cfg.grid, p_stkg);
  res.metrics_grid =
      evaluate_user(uid, "grid", ev_grid, res.grid.assignment, res.grid.locations, cfg.grid, p_grid);
  res.metrics_dbscan = evaluate_user(uid, "dbscan", ev_db, res.dbscan.assignment,
                                     res.dbscan.locations, cfg.grid, p_db);
  if (cfg.debug_invariants) check_user_invariants(res, cfg);
  return res;
}

void MethodAggregate::add(const PerUserMetrics& m, double radius_threshold) {
  ++n_users;
  for (double r : m.radii) {
    ++n_locations;
    sum_radius += r;
    if (r < radius_threshold) ++n_radius_under;
  }
  if (m.primary_location >= 0) {
    ++n_primary;
    sum_var_start += m.var_start_h2;
    sum_var_end += m.var_end_h2;
    sum_observable += m.observable;
  }
  sum_max_radius += m.max_radius_m;
  if (m.ari) {
    ++n_ari;
    sum_ari += *m.ari;
  }
}

namespace {

struct UserLines {
  std::string stays, loc_stkg, loc_grid, loc_db, per_user;
  RunCounters counters;
  PerUserMetrics m_stkg, m_grid, m_db;
};

void serialize_user(const std::string& uid, const UserPipelineResult& r, UserLines& out) {
  for (const Stay& st : r.stays) append_stay_line(out.stays, uid, st);
  for (const ActivityLocation& loc : r.stkg_locations)
    append_location_line(out.loc_stkg, uid, "stkg", loc, r.stkg_modularity, true);
  for (const ActivityLocation& loc : r.grid.locations)
    append_location_line(out.loc_grid, uid, "grid", loc, 0, false);
  for (const ActivityLocation& loc : r.dbscan.locations)
    append_location_line(out.loc_db, uid, "dbscan", loc, 0, false);
  append_per_user_line(out.per_user, r.metrics_stkg);
  append_per_user_line(out.per_user, r.metrics_grid);
  append_per_user_line(out.per_user, r.metrics_dbscan);

  out.counters.users = 1;
  out.counters.oscillations_removed = r.oscillations_removed;
  out.counters.trace_points = r.trace_points.size();
  out.counters.stays = r.stays.size();
  out.counters.pass_bys = r.stay_stats.pass_bys;
  out.counters.stkg_locations = r.stkg_locations.size();
  out.counters.grid_locations = r.grid.locations.size();
  out.counters.dbscan_locations = r.dbscan.locations.size();
  out.m_stkg = r.metrics_stkg;
  out.m_grid = r.metrics_grid;
  out.m_db = r.metrics_dbscan;
}

class AtomicFile {
 public:
  AtomicFile(const std::filesystem::path& dir, const std::string& name)
      : target_(dir / name), tmp_(dir / (name + ".tmp")), out_(tmp_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + tmp_.string());
  }
  void append(const std::string& s) { out_.write(s.data(), s.size()); }
  void commit() {
    out_.close();
    std::filesystem::rename(tmp_, target_);
  }

 private:
  std::filesystem::path target_;
  std::filesystem::path tmp_;
  std::ofstream out_;
};

}  // namespace

RunResult run_all(const std::vector<UserRecords>& users, const std::vector<UserTruth>* truth,
                  const PipelineConfig& cfg, const ParseStats& parse_stats,
                  double parse_seconds) {
  using clock = std::chrono::steady_clock;
  RunResult result;
  result.parse_seconds = parse_seconds;
  result.counters.records_read = parse_stats.rows_read;
  result.counters.records_skipped = parse_stats.rows_skipped;
  result.agg_stkg.method = "stkg";
  result.agg_grid.method = "grid";
  result.agg_dbscan.method = "dbscan";

  std::unordered_map<std::string, const UserTruth*> truth_by_uid;
  if (truth) {
    for (const UserTruth& t : *truth) truth_by_uid[t.uid] = &t;
  }

  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  AtomicFile f_stays(dir, "stays.jsonl");
  AtomicFile f_stkg(dir, "locations_stkg.jsonl");
  AtomicFile f_grid(dir, "locations_grid.jsonl");
  AtomicFile f_db(dir, "locations_dbscan.jsonl");
  AtomicFile f_user(dir, "per_user.jsonl");

  auto t0 = clock::now();
  double write_s = 0;

  // Users are processed in uid order in fixed-size chunks: parallel compute,
  // ordered append. Memory stays bounded and output bytes are independent of
  // the worker count.
  const std::size_t chunk = 256;
  std::vector<UserLines> lines(std::min(chunk, users.size()));
  for (std::size_t begin = 0; begin < users.size(); begin += chunk) {
    std::size_t n = std::min(chunk, users.size() - begin);
    parallel_for(n, cfg.workers, [&](std::size_t k) {
      const UserRecords& u = users[begin + k];
      const UserTruth* ut = nullptr;
      auto it = truth_by_uid.find(u.uid);
      if (it != truth_by_uid.end()) ut = it->second;
      UserPipelineResult r = process_user(u.uid, u.records, ut, cfg);
      lines[k] = UserLines{};
      serialize_user(u.uid, r, lines[k]);
    });
    auto w0 = clock::now();
    for (std::size_t k = 0; k < n; ++k) {
      const UserLines& L = lines[k];
      f_stays.append(L.stays);
      f_stkg.append(L.loc_stkg);
      f_grid.append(L.loc_grid);
      f_db.append(L.loc_db);
      f_user.append(L.per_user);
      result.counters.users += L.counters.users;
      result.counters.oscillations_removed += L.counters.oscillations_removed;
      result.counters.trace_points += L.counters.trace_points;
      result.counters.stays += L.counters.stays;
      result.counters.pass_bys += L.counters.pass_bys;
      result.counters.stkg_locations += L.counters.stkg_locations;
      result.counters.grid_locations += L.counters.grid_locations;
      result.counters.dbscan_locations += L.counters.dbscan_locations;
      result.agg_stkg.add(L.m_stkg, cfg.radius_threshold);
      result.agg_grid.add(L.m_grid, cfg.radius_threshold);
      result.agg_dbscan.add(L.m_db, cfg.radius_threshold);
    }
    write_s += std::chrono::duration<double>(clock::now() - w0).count();
  }

  auto w1 = clock::now();
  f_stays.commit();
  f_stkg.commit();
  f_grid.commit();
  f_db.commit();
  f_user.commit();

  bool with_ari = truth != nullptr;
  write_metrics_csv((dir / "metrics.csv").string(),
                    {result.agg_stkg, result.agg_grid, result.agg_dbscan}, with_ari);
  write_s += std::chrono::duration<double>(clock::now() - w1).count();

  result.process_seconds =
      std::chrono::duration<double>(clock::now() - t0).count() - write_s;
  result.write_seconds = write_s;
  write_run_summary((dir / "run_summary.json").string(), result);
  return result;
}

void write_metrics_csv(const std::string& path, const std::vector<MethodAggregate>& aggs,
                       bool with_ari) {
  atomic_write(path, [&](std::string& out) {
    out += "method,metric,value\n";
    char buf[64];
    auto row = [&](const std::string& method, const char* metric, double v, int prec) {
      out += method;
      out += ',';
      out += metric;
      out += ',';
      std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
      out += buf;
      out += '\n';
    };
    for (const MethodAggregate& a : aggs) {
      row(a.method, "n_users", static_cast<double>(a.n_users), 0);
      row(a.method, "n_locations", static_cast<double>(a.n_locations), 0);
      row(a.method, "share_radius_under_threshold", a.share_radius_under(), 6);
      row(a.method, "mean_radius_m",
          a.n_locations ? a.sum_radius / a.n_locations : 0.0, 3);
      row(a.method, "mean_max_radius_m",
          a.n_users ? a.sum_max_radius / a.n_users : 0.0, 3);
      row(a.method, "mean_var_start_h2", a.mean_var_start(), 6);
      row(a.method, "mean_var_end_h2", a.mean_var_end(), 6);
      row(a.method, "mean_observable_days",
          a.n_primary ? a.sum_observable / a.n_primary : 0.0, 3);
      if (with_ari) row(a.method, "mean_ari", a.mean_ari(), 6);
    }
  });
}

void write_run_summary(const std::string& path, const RunResult& r) {
  atomic_write(path, [&](std::string& out) {
    char buf[1600];
    std::snprintf(
        buf, sizeof(buf),
        "{\"users\":%llu,\"records_read\":%llu,\"records_skipped\":%llu,"
        "\"oscillations_removed\":%llu,\"trace_points\":%llu,\"stays\":%llu,"
        "\"pass_bys\":%llu,\"stkg_locations\":%llu,\"grid_locations\":%llu,"
        "\"dbscan_locations\":%llu,"
        "\"runtime\":{\"parse_s\":%.3f,\"process_s\":%.3f,\"write_s\":%.3f}}\n",
        static_cast<unsigned long long>(r.counters.users),
        static_cast<unsigned long long>(r.counters.records_read),
        static_cast<unsigned long long>(r.counters.records_skipped),
        static_cast<unsigned long long>(r.counters.oscillations_removed),
        static_cast<unsigned long long>(r.counters.trace_points),
        static_cast<unsigned long long>(r.counters.stays),
        static_cast<unsigned long long>(r.counters.pass_bys),
        static_cast<unsigned long long>(r.counters.stkg_locations),
        static_cast<unsigned long long>(r.counters.grid_locations),
        static_cast<unsigned long long>(r.counters.dbscan_locations), r.parse_seconds,
        r.process_seconds, r.write_seconds);
    out += buf;
  });
}

}  // namespace actloc
