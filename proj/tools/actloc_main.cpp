// actloc: activity-location identification from mobile phone sightings.
//
// Subcommands cover the pipeline stage by stage (synth, preprocess, stays,
// stkg, detect, baseline, evaluate) plus `all`, which runs everything from a
// records CSV (or a freshly generated synthetic dataset) to the final
// metrics. See README.md for file formats.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "actloc/pipeline.hpp"

namespace {

using namespace actloc;

struct CommonFlags {
  std::string grid_origin = "121.0,31.0";
  double cell_size = 500.0;
  std::string epoch_date = "2019-06-01";
  double max_speed = 100.0 / 3.0;
  double pingpong_window = 600.0;
  std::string ratio_band = "0.67,1.5";
  double return_radius = 200.0;
  std::string midnight_policy = "wrap";
  std::string max_gap = "unlimited";
  double baseline_d = 500.0;
  double epsilon = 1000.0;
  int min_pts = 1;
  double radius_threshold = 1000.0;
  int workers = 0;
  bool debug_invariants = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--grid-origin", f.grid_origin, "Grid origin LON,LAT");
  cmd->add_option("--cell-size", f.cell_size, "Grid cell size in meters");
  cmd->add_option("--epoch-date", f.epoch_date, "Day-0 date YYYY-MM-DD");
  cmd->add_option("--max-speed", f.max_speed, "Oscillation speed bound m/s");
  cmd->add_option("--pingpong-window", f.pingpong_window, "Oscillation return window s");
  cmd->add_option("--ratio-band", f.ratio_band, "Displacement ratio band LO,HI");
  cmd->add_option("--return-radius", f.return_radius, "Oscillation return radius m");
  cmd->add_option("--midnight-policy", f.midnight_policy, "wrap|split");
  cmd->add_option("--max-gap-slots", f.max_gap, "N or 'unlimited'");
  cmd->add_option("--baseline-d", f.baseline_d, "Baseline distance threshold m");
  cmd->add_option("--epsilon", f.epsilon, "DBSCAN epsilon m");
  cmd->add_option("--min-pts", f.min_pts, "DBSCAN MinPts");
  cmd->add_option("--radius-threshold", f.radius_threshold, "Radius share threshold m");
  cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
  cmd->add_flag("--debug-invariants", f.debug_invariants,
                "Cross-check incremental modularity bookkeeping");
}

bool parse_pair(const std::string& s, double& a, double& b) {
  return std::sscanf(s.c_str(), "%lf,%lf", &a, &b) == 2;
}

PipelineConfig make_config(const CommonFlags& f, const std::string& out_dir) {
  PipelineConfig cfg;
  if (!parse_pair(f.grid_origin, cfg.grid.origin_lon, cfg.grid.origin_lat))
    throw CLI::ValidationError("--grid-origin", "expected LON,LAT");
  cfg.grid.cell_size = f.cell_size;
  if (!parse_date(f.epoch_date, cfg.grid.epoch_date))
    throw CLI::ValidationError("--epoch-date", "expected YYYY-MM-DD");
  cfg.oscillation.max_speed = f.max_speed;
  cfg.oscillation.pingpong_window = f.pingpong_window;
  if (!parse_pair(f.ratio_band, cfg.oscillation.ratio_lo, cfg.oscillation.ratio_hi))
    throw CLI::ValidationError("--ratio-band", "expected LO,HI");
  cfg.oscillation.return_radius = f.return_radius;
  if (f.midnight_policy == "wrap") {
    cfg.midnight = MidnightPolicy::kWrap;
  } else if (f.midnight_policy == "split") {
    cfg.midnight = MidnightPolicy::kSplit;
  } else {
    throw CLI::ValidationError("--midnight-policy", "expected wrap|split");
  }
  if (f.max_gap == "unlimited") {
    cfg.max_gap_slots = kUnlimitedGap;
  } else {
    cfg.max_gap_slots = std::stoll(f.max_gap);
    if (cfg.max_gap_slots < 1)
      throw CLI::ValidationError("--max-gap-slots", "must be >= 1 or 'unlimited'");
  }
  cfg.baseline.d = f.baseline_d;
  cfg.baseline.epsilon = f.epsilon;
  cfg.baseline.min_pts = f.min_pts;
  cfg.radius_threshold = f.radius_threshold;
  cfg.workers = f.workers;
  cfg.debug_invariants = f.debug_invariants;
  cfg.out_dir = out_dir;

  if (cfg.grid.cell_size <= 0) throw CLI::ValidationError("--cell-size", "must be > 0");
  if (cfg.oscillation.max_speed <= 0) throw CLI::ValidationError("--max-speed", "must be > 0");
  if (!(cfg.oscillation.ratio_lo < 1.0 && 1.0 < cfg.oscillation.ratio_hi))
    throw CLI::ValidationError("--ratio-band", "band must bracket 1");
  if (cfg.baseline.d <= 0 || cfg.baseline.epsilon <= 0 || cfg.baseline.min_pts < 1)
    throw CLI::ValidationError("--baseline-d/--epsilon/--min-pts", "out of range");
  return cfg;
}

struct SynthFlags {
  std::uint64_t seed = 42;
  int users = 100;
  int days = 14;
  double hard_fraction = 0.5;
  double tower_spacing = 400.0;
  double ping_interval = 300.0;
  double assignment_radius = 800.0;
  double oscillation_rate = 0.05;
  double schedule_jitter = 20.0;
};

void add_synth(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--users", f.users, "Number of users");
  cmd->add_option("--days", f.days, "Number of days");
  cmd->add_option("--hard-fraction", f.hard_fraction,
                  "Fraction of users with queen-adjacent home/work");
  cmd->add_option("--tower-spacing", f.tower_spacing, "Tower lattice spacing m");
  cmd->add_option("--ping-interval", f.ping_interval, "Mean ping interval s");
  cmd->add_option("--assignment-radius", f.assignment_radius, "Tower assignment radius m");
  cmd->add_option("--oscillation-rate", f.oscillation_rate, "Injected ping-pong rate");
  cmd->add_option("--schedule-jitter", f.schedule_jitter, "Schedule jitter std-dev min");
}

SynthConfig make_synth(const SynthFlags& f) {
  SynthConfig s;
  s.seed = f.seed;
  s.n_users = f.users;
  s.n_days = f.days;
  s.hard_case_fraction = f.hard_fraction;
  s.tower_spacing = f.tower_spacing;
  s.ping_mean_interval = f.ping_interval;
  s.tower_assignment_radius = f.assignment_radius;
  s.oscillation_rate = f.oscillation_rate;
  s.schedule_jitter_min = f.schedule_jitter;
  return s;
}

int require_file(const std::string& path, const char* what) {
  if (!std::filesystem::exists(path)) {
    std::cerr << "error: missing " << what << ": " << path << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activity-location identification from mobile phone sightings"};
  app.require_subcommand(1);

  CommonFlags common;
  SynthFlags synth_flags;
  std::string input, truth_path, out_dir = "out";
  bool synth_input = false;

  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
  add_synth(c_synth, synth_flags);
  c_synth->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_synth, common);

  auto* c_pre = app.add_subcommand("preprocess", "Oscillation filter + slot smoothing");
  c_pre->add_option("--input", input, "records.csv")->required();
  c_pre->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_pre, common);

  auto* c_stays = app.add_subcommand("stays", "Extract stays from trace points");
  c_stays->add_option("--input", input, "trace_points.jsonl")->required();
  c_stays->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_stays, common);

  auto* c_stkg = app.add_subcommand("stkg", "Dump the knowledge-graph triples for stays");
  c_stkg->add_option("--input", input, "stays.jsonl")->required();
  c_stkg->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_stkg, common);

  auto* c_detect = app.add_subcommand("detect", "Community detection on the fused graph");
  c_detect->add_option("--input", input, "stays.jsonl")->required();
  c_detect->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_detect, common);

  auto* c_base = app.add_subcommand("baseline", "Grid and DBSCAN baselines");
  c_base->add_option("--input", input, "trace_points.jsonl")->required();
  c_base->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_base, common);

  auto* c_eval = app.add_subcommand("evaluate", "Metrics for all three methods");
  c_eval->add_option("--input", input, "records.csv")->required();
  c_eval->add_option("--truth", truth_path, "truth.jsonl for ARI scoring");
  c_eval->add_option("--out-dir,--out", out_dir, "Output directory");
  add_common(c_eval, common);

  auto* c_all = app.add_subcommand("all", "Full pipeline: ingest/synth to metrics");
  c_all->add_option("--input", input, "records.csv (omit with --synth)");
  c_all->add_flag("--synth", synth_input, "Generate the input dataset first");
  c_all->add_option("--truth", truth_path, "truth.jsonl for ARI scoring");
  c_all->add_option("--out-dir,--out", out_dir, "Output directory");
  add_synth(c_all, synth_flags);
  add_common(c_all, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);  // prints usage or the requested help text
    return rc == 0 ? 0 : 1;
  }

  try {
    PipelineConfig cfg = make_config(common, out_dir);
    std::filesystem::create_directories(out_dir);

    if (app.got_subcommand(c_synth)) {
      SynthDataset ds = generate_dataset(make_synth(synth_flags), cfg.grid);
      std::filesystem::path dir(out_dir);
      write_dataset(ds, cfg.grid, (dir / "records.csv").string(),
                    (dir / "truth.jsonl").string());
      std::uint64_t n = 0;
      for (const auto& u : ds.users) n += u.records.size();
      std::cout << "synth: " << ds.users.size() << " users, " << n << " records\n";
      return 0;
    }

    if (app.got_subcommand(c_pre)) {
      if (int rc = require_file(input, "records.csv")) return rc;
      ParseStats stats;
      auto users = parse_records_file(input, cfg.grid, stats);
      std::filesystem::path dir(out_dir);
      atomic_write((dir / "trace_points.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          std::uint64_t removed = 0;
          auto filtered = filter_oscillations(u.records, cfg.oscillation, cfg.grid, &removed);
          for (const TracePoint& tp : smooth_to_trace_points(filtered, cfg.grid))
            append_trace_point_line(out, u.uid, tp);
        }
      });
      std::cout << "preprocess: " << users.size() << " users, " << stats.rows_read
                << " rows, " << stats.rows_skipped << " skipped\n";
      return 0;
    }

    if (app.got_subcommand(c_stays)) {
      if (int rc = require_file(input, "trace_points.jsonl")) return rc;
      auto users = read_trace_points_jsonl(input);
      std::filesystem::path dir(out_dir);
      atomic_write((dir / "stays.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          for (const Stay& st :
               extract_stays(u.points, cfg.midnight, cfg.max_gap_slots, nullptr, cfg.grid))
            append_stay_line(out, u.uid, st);
        }
      });
      return 0;
    }

    if (app.got_subcommand(c_stkg)) {
      if (int rc = require_file(input, "stays.jsonl")) return rc;
      auto users = read_stays_jsonl(input);
      std::filesystem::path dir(out_dir);
      atomic_write((dir / "triples.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          STKGStore store = build_stkg(u.uid, u.stays);
          SpatialGraph sg = infer_spatial_relations(store);
          TemporalGraph tg = infer_temporal_relations(store, sg);
          store.attach_spatial(std::move(sg));
          store.attach_temporal(std::move(tg));
          store.enumerate_triples(
              [&](const Triple& t) { append_triple_line(out, u.uid, t); });
        }
      });
      return 0;
    }

    if (app.got_subcommand(c_detect)) {
      if (int rc = require_file(input, "stays.jsonl")) return rc;
      auto users = read_stays_jsonl(input);
      std::filesystem::path dir(out_dir);
      atomic_write((dir / "locations_stkg.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          STKGStore store = build_stkg(u.uid, u.stays);
          SpatialGraph sg = infer_spatial_relations(store);
          TemporalGraph tg = infer_temporal_relations(store, sg);
          WeightedGraph stg = build_st_graph(sg, tg);
          LouvainOptions opts;
          opts.check_gains = cfg.debug_invariants;
          LouvainResult louv = louvain(stg, opts);
          for (const ActivityLocation& loc :
               to_activity_locations(louv.partition, u.stays, cfg.grid))
            append_location_line(out, u.uid, "stkg", loc, louv.modularity, true);
        }
      });
      return 0;
    }

    if (app.got_subcommand(c_base)) {
      if (int rc = require_file(input, "trace_points.jsonl")) return rc;
      auto users = read_trace_points_jsonl(input);
      std::filesystem::path dir(out_dir);
      atomic_write((dir / "locations_grid.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          BaselineResult r = spatial_constraint_identify(u.points, cfg.baseline, cfg.grid);
          for (const ActivityLocation& loc : r.locations)
            append_location_line(out, u.uid, "grid", loc, 0, false);
        }
      });
      atomic_write((dir / "locations_dbscan.jsonl").string(), [&](std::string& out) {
        for (const auto& u : users) {
          BaselineResult r = dbscan_identify(u.points, cfg.baseline, cfg.grid);
          for (const ActivityLocation& loc : r.locations)
            append_location_line(out, u.uid, "dbscan", loc, 0, false);
        }
      });
      return 0;
    }

    // evaluate and all share the full pipeline.
    if (app.got_subcommand(c_eval) || app.got_subcommand(c_all)) {
      using clock = std::chrono::steady_clock;
      auto t0 = clock::now();
      if (app.got_subcommand(c_all) && synth_input) {
        SynthDataset ds = generate_dataset(make_synth(synth_flags), cfg.grid);
        std::filesystem::path dir(out_dir);
        write_dataset(ds, cfg.grid, (dir / "records.csv").string(),
                      (dir / "truth.jsonl").string());
        input = (dir / "records.csv").string();
        if (truth_path.empty()) truth_path = (dir / "truth.jsonl").string();
      }
      if (input.empty()) {
        std::cerr << "error: --input is required (or --synth for `all`)\n";
        return 1;
      }
      if (int rc = require_file(input, "records.csv")) return rc;
      ParseStats stats;
      auto users = parse_records_file(input, cfg.grid, stats);
      std::vector<UserTruth> truth;
      bool has_truth = false;
      if (!truth_path.empty()) {
        if (int rc = require_file(truth_path, "truth.jsonl")) return rc;
        truth = read_truth_jsonl(truth_path);
        has_truth = true;
      }
      double parse_s = std::chrono::duration<double>(clock::now() - t0).count();
      RunResult r = run_all(users, has_truth ? &truth : nullptr, cfg, stats, parse_s);
      std::cout << "users=" << r.counters.users << " records=" << r.counters.records_read
                << " skipped=" << r.counters.records_skipped
                << " stays=" << r.counters.stays
                << " locations(stkg/grid/dbscan)=" << r.counters.stkg_locations << "/"
                << r.counters.grid_locations << "/" << r.counters.dbscan_locations << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
