#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "actloc/pipeline.hpp"

#include "json.hpp"

using namespace actloc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Corpus {
  std::vector<UserRecords> users;
  std::vector<UserTruth> truth;
  ParseStats stats;
};

Corpus make_corpus(int n_users, fs::path dir) {
  fs::create_directories(dir);
  SynthConfig scfg;
  scfg.seed = 99;
  scfg.n_users = n_users;
  scfg.n_days = 7;
  GridConfig grid;
  auto ds = generate_dataset(scfg, grid);
  write_dataset(ds, grid, (dir / "records.csv").string(), (dir / "truth.jsonl").string());
  Corpus c;
  c.users = parse_records_file((dir / "records.csv").string(), grid, c.stats);
  c.truth = read_truth_jsonl((dir / "truth.jsonl").string());
  return c;
}

}  // namespace

TEST_CASE("run_all writes every output and keeps stay ids unique per method") {
  fs::path dir = fs::temp_directory_path() / "actloc_pipe_test";
  fs::remove_all(dir);
  Corpus c = make_corpus(8, dir);

  PipelineConfig cfg;
  cfg.out_dir = (dir / "out").string();
  cfg.workers = 2;
  RunResult r = run_all(c.users, &c.truth, cfg, c.stats, 0.0);

  for (const char* name : {"stays.jsonl", "locations_stkg.jsonl", "locations_grid.jsonl",
                           "locations_dbscan.jsonl", "per_user.jsonl", "metrics.csv",
                           "run_summary.json"}) {
    CHECK(fs::exists(dir / "out" / name));
  }
  CHECK(r.counters.users == 8);
  CHECK(r.counters.records_read == c.stats.rows_read);

  // Counters equal line counts.
  auto count_lines = [&](const char* name) {
    std::istringstream in(slurp(dir / "out" / name));
    std::string line;
    std::uint64_t n = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++n;
    return n;
  };
  CHECK(count_lines("stays.jsonl") == r.counters.stays);
  CHECK(count_lines("locations_stkg.jsonl") == r.counters.stkg_locations);
  CHECK(count_lines("locations_grid.jsonl") == r.counters.grid_locations);
  CHECK(count_lines("locations_dbscan.jsonl") == r.counters.dbscan_locations);
  CHECK(count_lines("per_user.jsonl") == 3 * r.counters.users);

  // Every stay id appears exactly once per method's locations file.
  for (const char* name : {"locations_stkg.jsonl", "locations_grid.jsonl",
                           "locations_dbscan.jsonl"}) {
    std::istringstream in(slurp(dir / "out" / name));
    std::string line;
    std::map<std::string, std::set<std::int64_t>> seen;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      auto& s = seen[j["uid"].get<std::string>()];
      for (const auto& sid : j["stay_ids"]) {
        CHECK(s.insert(sid.get<std::int64_t>()).second);
      }
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical across worker counts") {
  fs::path dir = fs::temp_directory_path() / "actloc_pipe_det";
  fs::remove_all(dir);
  Corpus c = make_corpus(6, dir);

  for (int workers : {1, 4}) {
    PipelineConfig cfg;
    cfg.out_dir = (dir / ("out" + std::to_string(workers))).string();
    cfg.workers = workers;
    run_all(c.users, &c.truth, cfg, c.stats, 0.0);
  }
  for (const char* name : {"stays.jsonl", "locations_stkg.jsonl", "locations_grid.jsonl",
                           "locations_dbscan.jsonl", "per_user.jsonl", "metrics.csv"}) {
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out4" / name));
  }
  fs::remove_all(dir);
}

TEST_CASE("empty input gives empty outputs and zero counters") {
  fs::path dir = fs::temp_directory_path() / "actloc_pipe_empty";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "records.csv");
    csv << "Uid,Timestamp,Longitude,Latitude\n";
  }
  GridConfig grid;
  ParseStats stats;
  auto users = parse_records_file((dir / "records.csv").string(), grid, stats);
  CHECK(users.empty());
  PipelineConfig cfg;
  cfg.out_dir = (dir / "out").string();
  RunResult r = run_all(users, nullptr, cfg, stats, 0.0);
  CHECK(r.counters.users == 0);
  CHECK(r.counters.records_read == 0);
  CHECK(r.counters.stays == 0);
  CHECK(r.counters.stkg_locations == 0);
  CHECK(fs::exists(dir / "out" / "stays.jsonl"));
  CHECK(fs::file_size(dir / "out" / "stays.jsonl") == 0);
  fs::remove_all(dir);
}

TEST_CASE("debug invariants pass on a small corpus") {
  fs::path dir = fs::temp_directory_path() / "actloc_pipe_dbg";
  fs::remove_all(dir);
  Corpus c = make_corpus(4, dir);
  PipelineConfig cfg;
  cfg.out_dir = (dir / "out").string();
  cfg.debug_invariants = true;  // throws on any gain-bookkeeping divergence
  CHECK_NOTHROW(run_all(c.users, &c.truth, cfg, c.stats, 0.0));
  fs::remove_all(dir);
}

TEST_CASE("stage views agree with the full pipeline for one user") {
  fs::path dir = fs::temp_directory_path() / "actloc_pipe_user";
  fs::remove_all(dir);
  Corpus c = make_corpus(3, dir);
  PipelineConfig cfg;
  auto res = process_user(c.users[0].uid, c.users[0].records, &c.truth[0], cfg);

  // The stay -> location maps are complete for each method.
  for (std::size_t i = 0; i < res.stays.size(); ++i) CHECK(res.stkg_assignment[i] >= 0);
  CHECK(res.metrics_stkg.method == "stkg");
  CHECK(res.metrics_grid.method == "grid");
  CHECK(res.metrics_dbscan.method == "dbscan");
  CHECK(res.metrics_stkg.radii.size() == res.stkg_locations.size());

  // Louvain modularity is reported in [ -0.5, 1 ].
  CHECK(res.stkg_modularity >= -0.5);
  CHECK(res.stkg_modularity <= 1.0);
  fs::remove_all(dir);
}
