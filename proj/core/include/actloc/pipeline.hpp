#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actloc/baselines.hpp"
#include "actloc/community.hpp"
#include "actloc/evaluation.hpp"
#include "actloc/io.hpp"
#include "actloc/records.hpp"
#include "actloc/stays.hpp"
#include "actloc/synth.hpp"

namespace actloc {

struct PipelineConfig {
  GridConfig grid;
  OscillationParams oscillation;
  MidnightPolicy midnight = MidnightPolicy::kWrap;
  std::int64_t max_gap_slots = kUnlimitedGap;
  BaselineConfig baseline;
  double radius_threshold = 1000.0;
  int workers = 0;  // 0: hardware concurrency
  bool debug_invariants = false;
  std::string out_dir = "out";
};

struct RunCounters {
  std::uint64_t users = 0;
  std::uint64_t records_read = 0;
  std::uint64_t records_skipped = 0;
  std::uint64_t oscillations_removed = 0;
  std::uint64_t trace_points = 0;
  std::uint64_t stays = 0;
  std::uint64_t pass_bys = 0;
  std::uint64_t stkg_locations = 0;
  std::uint64_t grid_locations = 0;
  std::uint64_t dbscan_locations = 0;
};

// Full per-user pipeline result, kept only as long as needed for output.
struct UserPipelineResult {
  std::vector<TracePoint> trace_points;
  std::vector<Stay> stays;
  std::vector<std::int32_t> stkg_assignment;  // stay id -> location id
  std::vector<ActivityLocation> stkg_locations;
  double stkg_modularity = 0;
  BaselineResult grid;
  BaselineResult dbscan;
  PerUserMetrics metrics_stkg, metrics_grid, metrics_dbscan;
  std::uint64_t oscillations_removed = 0;
  StayStats stay_stats;
};

// Runs preprocess -> stays -> stkg -> community -> baselines -> metrics for
// one user. truth, when present, provides record labels for ARI scoring.
UserPipelineResult process_user(const std::string& uid, const std::vector<RawRecord>& records,
                                const UserTruth* truth, const PipelineConfig& cfg);

// Method-agnostic eval views.
std::vector<EvalStay> eval_view(const std::vector<Stay>& stays, const GridConfig& cfg);
std::vector<EvalStay> eval_view(const std::vector<BaselineStay>& stays, double cell_size);

// Per-stay record counts by true place (h=0, w=1; transit records dropped).
// A record belongs to the stay whose span contains its timestamp's slot.
std::vector<StayTruthCounts> truth_counts_for_spans(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans, const UserTruth& truth,
    const std::vector<RawRecord>& records, const GridConfig& cfg);

// Aggregate means for metrics.csv and the acceptance checks.
struct MethodAggregate {
  std::string method;
  std::uint64_t n_users = 0;
  std::uint64_t n_locations = 0;
  std::uint64_t n_radius_under = 0;
  double sum_radius = 0;
  std::uint64_t n_primary = 0;
  double sum_var_start = 0;
  double sum_var_end = 0;
  double sum_observable = 0;
  double sum_max_radius = 0;
  std::uint64_t n_ari = 0;
  double sum_ari = 0;

  void add(const PerUserMetrics& m, double radius_threshold);
  double mean_var_start() const { return n_primary ? sum_var_start / n_primary : 0; }
  double mean_var_end() const { return n_primary ? sum_var_end / n_primary : 0; }
  double mean_ari() const { return n_ari ? sum_ari / n_ari : 0; }
  double share_radius_under() const {
    return n_locations ? static_cast<double>(n_radius_under) / n_locations : 0;
  }
};

struct RunResult {
  RunCounters counters;
  MethodAggregate agg_stkg, agg_grid, agg_dbscan;
  double parse_seconds = 0;
  double process_seconds = 0;
  double write_seconds = 0;
};

// The `all` stage: processes every user with a worker pool, writes
// stays.jsonl, locations_{stkg,grid,dbscan}.jsonl, per_user.jsonl,
// metrics.csv and run_summary.json into cfg.out_dir. Outputs are uid-sorted
// and written atomically; identical inputs and flags give identical bytes
// regardless of worker count.
RunResult run_all(const std::vector<UserRecords>& users, const std::vector<UserTruth>* truth,
                  const PipelineConfig& cfg, const ParseStats& parse_stats,
                  double parse_seconds);

void write_metrics_csv(const std::string& path, const std::vector<MethodAggregate>& aggs,
                       bool with_ari);
void write_run_summary(const std::string& path, const RunResult& result);

// Deterministic helper used by stage commands as well.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace actloc
