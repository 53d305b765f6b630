#include "actloc/synth.hpp"

#include "actloc/stkg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace actloc {

namespace {

// Deterministic samplers on top of mt19937_64; the std distributions are
// implementation defined, which would break seed reproducibility claims.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform() {  // [0, 1)
    return (gen() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
  }
  double expo(double mean) { return -mean * std::log1p(-uniform()); }
  double normal(double mu, double sigma) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) u1 = 1e-12;
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kHour = 3600.0;
constexpr int kRegionLoCell = 4;    // user home cells live in [lo, hi)
constexpr int kRegionHiCell = 36;
constexpr double kTravelSpeed = 8.0;   // m/s between anchors
constexpr double kRoamSpeed = 1.3;     // m/s weekend roaming
constexpr double kSessionMean = 7200.0;  // s camped on one tower before reselect
constexpr double kPrimaryBias = 12.0;    // extra weight on the nearest tower
// Nights can end on one distant tower (an idle-mode reselection artifact);
// the distance keeps those towers clear of roaming and commute corridors.
constexpr double kRecampProb = 0.5;
constexpr double kRecampMinDist = 5000.0;
constexpr double kRecampMaxDist = 7000.0;

struct TowerIndex {
  std::vector<Tower> towers;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> buckets;
  double bucket_side = 400.0;

  std::int64_t key(double x, double y) const {
    std::int64_t bx = static_cast<std::int64_t>(std::floor(x / bucket_side));
    std::int64_t by = static_cast<std::int64_t>(std::floor(y / bucket_side));
    return bx * 1000003 + by;
  }

  // Towers within radius, sorted by (distance, id).
  std::vector<std::pair<double, std::int32_t>> within(const LocalXY& p, double radius) const {
    std::vector<std::pair<double, std::int32_t>> out;
    int span = static_cast<int>(radius / bucket_side) + 1;
    std::int64_t bx = static_cast<std::int64_t>(std::floor(p.x / bucket_side));
    std::int64_t by = static_cast<std::int64_t>(std::floor(p.y / bucket_side));
    for (std::int64_t i = bx - span; i <= bx + span; ++i) {
      for (std::int64_t j = by - span; j <= by + span; ++j) {
        auto it = buckets.find(i * 1000003 + j);
        if (it == buckets.end()) continue;
        for (std::int32_t t : it->second) {
          double d = std::hypot(towers[t].pos.x - p.x, towers[t].pos.y - p.y);
          if (d <= radius) out.emplace_back(d, t);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

TowerIndex build_towers(const SynthConfig& cfg, const GridConfig& grid_cfg,
                        std::uint64_t seed) {
  TowerIndex idx;
  idx.bucket_side = cfg.tower_spacing;
  Rng rng(splitmix(seed ^ 0x70776572ULL));
  const double lo = -2000.0, hi = 24000.0;
  const double jitter = cfg.tower_spacing * 0.2;
  for (double x = lo; x <= hi; x += cfg.tower_spacing) {
    for (double y = lo; y <= hi; y += cfg.tower_spacing) {
      Tower t;
      t.pos.x = x + rng.uniform(-jitter, jitter);
      t.pos.y = y + rng.uniform(-jitter, jitter);
      local_to_lonlat(t.pos.x, t.pos.y, grid_cfg, t.lon, t.lat);
      std::int32_t id = static_cast<std::int32_t>(idx.towers.size());
      idx.towers.push_back(t);
      idx.buckets[idx.key(t.pos.x, t.pos.y)].push_back(id);
    }
  }
  return idx;
}

// Inverse-distance-weighted categorical over a fixed tower list. The
// quadratic falloff plus a bias on the nearest tower mirror how strongly
// signal strength favors the serving cell; most sessions camp there, the
// rest spread the place across its neighbor cells.
struct TowerSampler {
  std::vector<std::int32_t> ids;
  std::vector<double> cum;

  TowerSampler() = default;
  explicit TowerSampler(const std::vector<std::pair<double, std::int32_t>>& cand) {
    double acc = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      const auto& [d, id] = cand[i];
      double w = 1.0 / ((30.0 + d) * (30.0 + d));
      if (i == 0) w *= kPrimaryBias;
      acc += w;
      ids.push_back(id);
      cum.push_back(acc);
    }
  }
  bool empty() const { return ids.empty(); }
  std::int32_t sample(Rng& rng) const {
    double u = rng.uniform() * cum.back();
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    return ids[std::min<std::size_t>(it - cum.begin(), ids.size() - 1)];
  }
};

struct UserGen {
  const SynthConfig& cfg;
  const GridConfig& grid_cfg;
  const TowerIndex& towers;
  Rng rng;
  SynthUser out;

  LocalXY home, work;
  TowerSampler home_towers, work_towers;

  UserGen(const SynthConfig& c, const GridConfig& g, const TowerIndex& t, std::string uid,
          std::uint64_t user_seed)
      : cfg(c), grid_cfg(g), towers(t), rng(user_seed) {
    out.uid = std::move(uid);
    out.truth.uid = out.uid;
  }

  LocalXY anchor_in_cell(const GridIndex& cell) {
    double margin = 80.0;
    double s = grid_cfg.cell_size;
    return LocalXY{cell.c * s + rng.uniform(margin, s - margin),
                   cell.r * s + rng.uniform(margin, s - margin)};
  }

  void pick_anchors(bool hard_case) {
    GridIndex home_cell{
        static_cast<std::int32_t>(rng.uniform_int(kRegionLoCell, kRegionHiCell - 1)),
        static_cast<std::int32_t>(rng.uniform_int(kRegionLoCell, kRegionHiCell - 1))};
    GridIndex work_cell;
    if (hard_case) {
      auto nb = queen_neighbors(home_cell);
      work_cell = nb[rng.uniform_int(0, 7)];
    } else {
      while (true) {
        int dr = static_cast<int>(rng.uniform_int(-8, 8));
        int dc = static_cast<int>(rng.uniform_int(-8, 8));
        int cheb = std::max(std::abs(dr), std::abs(dc));
        if (cheb >= 3 && cheb <= 8) {
          work_cell = GridIndex{home_cell.r + dr, home_cell.c + dc};
          break;
        }
      }
    }
    home = anchor_in_cell(home_cell);
    work = anchor_in_cell(work_cell);
    // Adjacent-cell anchors can end up sharing a serving tower, in which case
    // the two places collapse into one cell sequence and no stay-based method
    // can tell them apart. Keep a modest separation inside the hard case.
    for (int tries = 0; tries < 64 && std::hypot(work.x - home.x, work.y - home.y) < 450.0;
         ++tries)
      work = anchor_in_cell(work_cell);
    home_towers = TowerSampler(towers.within(home, cfg.tower_assignment_radius));
    work_towers = TowerSampler(towers.within(work, cfg.tower_assignment_radius));
    if (home_towers.empty() || work_towers.empty())
      throw std::runtime_error("synth: no tower within assignment radius of an anchor");
    out.truth.places.push_back(TruthPlace{"home", home, home_cell});
    out.truth.places.push_back(TruthPlace{"work", work, work_cell});
  }

  void emit(double t, std::int32_t tower, char label) {
    out.records.push_back(SynthRecord{static_cast<std::int64_t>(t), tower, label});
    out.truth.labels.push_back(label);
  }

  // Emits one ping plus, at the configured rate, an A-B-A oscillation pair
  // bouncing to another tower nearby. next_t guards record ordering.
  void emit_with_noise(double t, std::int32_t tower, char label, double next_t) {
    emit(t, tower, label);
    if (rng.uniform() < cfg.oscillation_rate && next_t > t + 95.0) {
      const LocalXY& tp = towers.towers[tower].pos;
      auto cand = towers.within(tp, 2000.0);
      // Drop candidates closer than 300 m so the bounce is a real jump.
      std::vector<std::pair<double, std::int32_t>> far;
      for (const auto& c : cand)
        if (c.first >= 300.0) far.push_back(c);
      if (!far.empty()) {
        std::int32_t f = far[rng.uniform_int(0, static_cast<std::int64_t>(far.size()) - 1)].second;
        double d1 = rng.uniform(8.0, 25.0);
        double d2 = rng.uniform(40.0, 90.0);
        emit(t + d1, f, 't');
        emit(t + d2, tower, label);
      }
    }
  }

  // Pings over [a, b) at a fixed anchor. The phone camps on one tower per
  // session and reselects at exponential times, so consecutive pings mostly
  // repeat a tower instead of bouncing across the whole neighbor set.
  void dwell(double a, double b, const TowerSampler& sampler, char label) {
    if (b <= a) return;
    std::int32_t tower = sampler.sample(rng);
    double session_end = a + rng.expo(kSessionMean);
    double t = a + rng.expo(cfg.ping_mean_interval);
    while (t < b) {
      while (t >= session_end) {
        tower = sampler.sample(rng);
        session_end += rng.expo(kSessionMean);
      }
      double next = t + rng.expo(cfg.ping_mean_interval);
      emit_with_noise(t, tower, label, std::min(next, b));
      t = next;
    }
  }

  // Pings along the straight home-work path. [a, b) is the observable
  // window; the motion itself runs from depart_t at kTravelSpeed.
  void transit(double a, double b, double depart_t, const LocalXY& from, const LocalXY& to) {
    if (b <= a) return;
    double t = a + rng.expo(cfg.ping_mean_interval);
    double len = std::hypot(to.x - from.x, to.y - from.y);
    while (t < b) {
      double frac = len > 0 ? std::clamp(kTravelSpeed * (t - depart_t) / len, 0.0, 1.0) : 1.0;
      LocalXY p{from.x + frac * (to.x - from.x), from.y + frac * (to.y - from.y)};
      auto cand = towers.within(p, cfg.tower_assignment_radius);
      if (!cand.empty()) emit(t, TowerSampler(cand).sample(rng), 't');
      t += rng.expo(cfg.ping_mean_interval);
    }
  }

  // Weekend roaming: waypoint walk around home, transit-labeled.
  void roam(double a, double b) {
    if (b <= a) return;
    LocalXY pos = home;
    LocalXY target = roam_target();
    double t = a + rng.expo(cfg.ping_mean_interval);
    double prev = a;
    while (t < b) {
      double step = kRoamSpeed * (t - prev);
      while (step > 0) {
        double d = std::hypot(target.x - pos.x, target.y - pos.y);
        if (d <= step) {
          pos = target;
          step -= d;
          target = roam_target();
        } else {
          pos.x += step * (target.x - pos.x) / d;
          pos.y += step * (target.y - pos.y) / d;
          step = 0;
        }
      }
      auto cand = towers.within(pos, cfg.tower_assignment_radius);
      if (!cand.empty()) emit(t, TowerSampler(cand).sample(rng), 't');
      prev = t;
      t += rng.expo(cfg.ping_mean_interval);
    }
  }

  LocalXY roam_target() {
    double ang = rng.uniform(0, 2 * M_PI);
    double dist = rng.uniform(1000.0, 3500.0);
    return LocalXY{home.x + dist * std::cos(ang), home.y + dist * std::sin(ang)};
  }

  void night_recamp(double sleep_t) {
    if (rng.uniform() >= kRecampProb) return;
    auto cand = towers.within(home, kRecampMaxDist);
    std::vector<std::int32_t> far;
    for (const auto& [d, id] : cand)
      if (d >= kRecampMinDist) far.push_back(id);
    if (far.empty()) return;
    std::int32_t f = far[rng.uniform_int(0, static_cast<std::int64_t>(far.size()) - 1)];
    emit(sleep_t + rng.uniform(600.0, 2400.0), f, 't');
  }

  void generate(bool hard_case) {
    pick_anchors(hard_case);
    double jitter = cfg.schedule_jitter_min * 60.0;
    double travel = std::hypot(work.x - home.x, work.y - home.y) / kTravelSpeed;

    for (int d = 0; d < cfg.n_days; ++d) {
      double base = d * 86400.0;
      double wake = base + rng.uniform(5.5 * kHour, 8.5 * kHour);
      double sleep = base + std::clamp(rng.normal(23.0 * kHour, 0.5 * kHour), 21.5 * kHour,
                                       23.8 * kHour);
      if (is_weekday(d, grid_cfg)) {
        double depart =
            base + std::clamp(rng.normal(8.0 * kHour, jitter), 6.8 * kHour, 8.9 * kHour);
        double arrive = depart + travel;
        double work_end =
            base + std::clamp(rng.normal(18.0 * kHour, jitter), 16.0 * kHour, 20.0 * kHour);
        if (work_end < arrive) work_end = arrive;
        double back = work_end + travel;

        auto clip = [&](double x) { return std::clamp(x, wake, sleep); };
        dwell(wake, clip(depart), home_towers, 'h');
        transit(clip(depart), clip(arrive), depart, home, work);
        dwell(clip(arrive), clip(work_end), work_towers, 'w');
        transit(clip(work_end), clip(back), work_end, work, home);
        dwell(clip(back), sleep, home_towers, 'h');
      } else {
        double out_start =
            base + std::clamp(rng.normal(9.0 * kHour, kHour), 8.0 * kHour, 11.0 * kHour);
        double out_end =
            base + std::clamp(rng.normal(17.5 * kHour, kHour), 15.0 * kHour, 19.5 * kHour);
        dwell(wake, std::min(out_start, sleep), home_towers, 'h');
        roam(std::min(out_start, sleep), std::min(out_end, sleep));
        dwell(std::min(out_end, sleep), sleep, home_towers, 'h');
      }
      night_recamp(sleep);
    }
  }
};

}  // namespace

SynthDataset generate_dataset(const SynthConfig& cfg, const GridConfig& grid_cfg) {
  if (cfg.n_users <= 0 || cfg.n_days <= 0 || cfg.ping_mean_interval <= 0 ||
      cfg.tower_spacing <= 0 || cfg.tower_assignment_radius <= 0)
    throw std::invalid_argument("synth: counts and intervals must be positive");
  if (cfg.hard_case_fraction < 0 || cfg.hard_case_fraction > 1 || cfg.oscillation_rate < 0 ||
      cfg.oscillation_rate > 1)
    throw std::invalid_argument("synth: fractions must lie in [0, 1]");
  SynthDataset ds;
  TowerIndex idx = build_towers(cfg, grid_cfg, cfg.seed);
  ds.towers = idx.towers;
  ds.users.resize(cfg.n_users);

  // Per-user seeds derive from the master seed and uid, so the parallel
  // schedule cannot affect the output.
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= cfg.n_users) break;
      char buf[24];
      std::snprintf(buf, sizeof(buf), "%010d", 1000000000 + i);
      std::string uid = buf;
      std::uint64_t user_seed = splitmix(cfg.seed ^ fnv1a(uid));
      bool hard = (i < static_cast<int>(std::round(cfg.hard_case_fraction * cfg.n_users)));
      UserGen gen(cfg, grid_cfg, idx, uid, user_seed);
      gen.generate(hard);
      ds.users[i] = std::move(gen.out);
    }
  };
  unsigned n_threads = std::min<unsigned>(std::thread::hardware_concurrency(),
                                          static_cast<unsigned>(cfg.n_users));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return ds;
}

void write_dataset(const SynthDataset& ds, const GridConfig& grid_cfg,
                   const std::string& csv_path, const std::string& truth_path) {
  // Tower coordinate strings are precomputed; rows reuse them verbatim.
  std::vector<std::string> tower_str(ds.towers.size());
  for (std::size_t i = 0; i < ds.towers.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.7f,%.8f", ds.towers[i].lon, ds.towers[i].lat);
    tower_str[i] = buf;
  }
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + csv_path);
  csv << "Uid,Timestamp,Longitude,Latitude\n";
  std::string row;
  row.reserve(96);
  for (const SynthUser& u : ds.users) {
    for (const SynthRecord& r : u.records) {
      row.clear();
      row += u.uid;
      row += ',';
      row += format_timestamp(r.timestamp, grid_cfg);
      row += ',';
      row += tower_str[r.tower];
      row += '\n';
      csv << row;
    }
  }
  csv.close();

  std::ofstream truth(truth_path, std::ios::binary);
  if (!truth) throw std::runtime_error("cannot write " + truth_path);
  for (const SynthUser& u : ds.users) {
    nlohmann::json j;
    j["uid"] = u.truth.uid;
    nlohmann::json places = nlohmann::json::array();
    for (const TruthPlace& p : u.truth.places) {
      places.push_back({{"label", p.label},
                        {"x", p.anchor.x},
                        {"y", p.anchor.y},
                        {"r", p.grid.r},
                        {"c", p.grid.c}});
    }
    j["places"] = places;
    j["labels"] = u.truth.labels;
    truth << j.dump() << '\n';
  }
}

std::vector<StayLabel> label_stays(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& spans,
    const std::vector<SynthRecord>& records, const GridConfig& cfg) {
  std::vector<StayLabel> out(spans.size());
  if (records.empty() || spans.empty()) return out;
  const int slot_sec = cfg.slot_seconds();

  // Both record attributions and stay spans are time-sorted; sweep in step.
  std::size_t si = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::int64_t t0 = records[i].timestamp;
    std::int64_t t1 = (i + 1 < records.size()) ? records[i + 1].timestamp
                                               : (t0 / slot_sec + 1) * slot_sec;
    if (t1 <= t0) continue;
    while (si < spans.size() && spans[si].second * slot_sec <= t0) ++si;
    for (std::size_t s = si; s < spans.size(); ++s) {
      std::int64_t ss = spans[s].first * slot_sec;
      std::int64_t se = spans[s].second * slot_sec;
      if (ss >= t1) break;
      double overlap = static_cast<double>(std::min(t1, se) - std::max(t0, ss));
      if (overlap > 0) out[s].mass[records[i].label] += overlap;
    }
  }
  for (StayLabel& sl : out) {
    char best = 't';
    double best_mass = -1;
    for (const auto& [label, mass] : sl.mass) {  // ascending label: ties lexicographic
      if (mass > best_mass) {
        best_mass = mass;
        best = label;
      }
    }
    sl.majority = best;
  }
  return out;
}

std::vector<UserTruth> read_truth_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open truth file: " + path);
  std::vector<UserTruth> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    UserTruth t;
    t.uid = j.at("uid").get<std::string>();
    for (const auto& p : j.at("places")) {
      TruthPlace tp;
      tp.label = p.at("label").get<std::string>();
      tp.anchor = LocalXY{p.at("x").get<double>(), p.at("y").get<double>()};
      tp.grid = GridIndex{p.at("r").get<std::int32_t>(), p.at("c").get<std::int32_t>()};
      t.places.push_back(tp);
    }
    t.labels = j.at("labels").get<std::string>();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace actloc
