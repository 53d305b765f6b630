#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "actloc/grid.hpp"
#include "actloc/stays.hpp"

namespace actloc {

struct SynthConfig {
  std::uint64_t seed = 42;
  int n_users = 100;
  int n_days = 14;
  double tower_spacing = 400.0;           // meters, jittered lattice
  double ping_mean_interval = 300.0;      // seconds, exponential inter-arrival
  double tower_assignment_radius = 800.0; // meters
  double hard_case_fraction = 0.5;        // home and work grids queen-adjacent
  double oscillation_rate = 0.05;         // fraction of pings doubled as A-B-A
  double schedule_jitter_min = 20.0;      // minutes std-dev on schedule times
};

// Record labels: 'h' home, 'w' work, 't' transit/roaming/network artifact.
struct TruthPlace {
  std::string label;  // "home" or "work"
  LocalXY anchor;
  GridIndex grid;
};

struct UserTruth {
  std::string uid;
  std::vector<TruthPlace> places;
  std::string labels;  // one char per record, file order
};

struct SynthRecord {
  std::int64_t timestamp = 0;
  std::int32_t tower = -1;
  char label = 't';
};

struct SynthUser {
  std::string uid;
  std::vector<SynthRecord> records;  // time-sorted
  UserTruth truth;
};

struct Tower {
  LocalXY pos;
  double lon = 0, lat = 0;
};

struct SynthDataset {
  std::vector<Tower> towers;
  std::vector<SynthUser> users;  // uid-sorted
};

// Deterministic under seed; per-user streams are derived from seed and uid so
// parallel generation cannot change the output.
SynthDataset generate_dataset(const SynthConfig& cfg, const GridConfig& grid_cfg);

// Writes records.csv (Uid,Timestamp,Longitude,Latitude) and truth.jsonl.
void write_dataset(const SynthDataset& ds, const GridConfig& grid_cfg,
                   const std::string& csv_path, const std::string& truth_path);

// Majority true label of the records whose attributed time overlaps the stay;
// transit-majority stays are excluded from scoring.
struct StayLabel {
  char majority = 't';
  std::map<char, double> mass;  // seconds per label
};

// Spans are linearized slots; record attribution follows the smoothing rule
// (duration to the next record, last record to its slot end).
std::vector<StayLabel> label_stays(const std::vector<std::pair<std::int64_t, std::int64_t>>& spans,
                                   const std::vector<SynthRecord>& records,
                                   const GridConfig& cfg);

// Parsed truth.jsonl entry for evaluation runs that start from files.
std::vector<UserTruth> read_truth_jsonl(const std::string& path);

}  // namespace actloc
