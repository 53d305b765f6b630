#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "actloc/community.hpp"
#include "actloc/grid.hpp"

namespace actloc {

// Method-agnostic view of a stay for metric computation: its linearized slot
// span and the grid-center point that stands in for its location.
struct EvalStay {
  std::int32_t id = 0;
  std::int64_t start_lin = 0;
  std::int64_t end_lin = 0;
  LocalXY point;
};

// A maximal run of same-location stays clipped to one calendar day.
struct Activity {
  std::int32_t location = 0;
  std::int32_t day = 0;
  std::int32_t start_slot = 0;
  std::int32_t end_slot = 0;  // exclusive, in (0, 144]

  int daytime_overlap() const;  // slots intersecting [36, 108)
};

// Distance from the unweighted centroid of member stay points to the
// furthest member stay point.
double cluster_radius(const ActivityLocation& loc, const std::vector<EvalStay>& stays);

// Groups time-sorted stays into maximal same-location runs; each run emits
// one activity per calendar day it touches, clipped to the day.
std::vector<Activity> build_activities(const std::vector<EvalStay>& stays,
                                       const std::vector<std::int32_t>& assignment);

// Location with the most weekday-daytime overlap (ties: smaller id); absent
// when the user has no weekday daytime activity.
std::optional<std::int32_t> primary_daytime_location(const std::vector<Activity>& activities,
                                                     const GridConfig& cfg);

// Population variance of per-weekday earliest start / latest end hours at a
// location. Requires at least one qualifying weekday.
struct TimeVariance {
  double var_start_h2 = 0;
  double var_end_h2 = 0;
  int days = 0;
};
TimeVariance time_variance(const std::vector<Activity>& activities, std::int32_t location,
                           const GridConfig& cfg);

// Distinct weekdays with at least one activity at the location.
int observable_days(const std::vector<Activity>& activities, std::int32_t location,
                    const GridConfig& cfg);

// Standard ARI over two labelings of the same universe; the degenerate
// zero-denominator case (e.g. both single-class) scores 1.
double adjusted_rand_index(const std::vector<std::int32_t>& a,
                           const std::vector<std::int32_t>& b);

// ARI from a prediction-by-truth contingency table. Scoring records rather
// than whole stays keeps the comparison meaningful when a method produces a
// few giant stays whose majority label hides the mixture inside.
double ari_from_contingency(const std::vector<std::vector<std::int64_t>>& counts);

// Per stay: record counts by truth label index (transit already excluded).
using StayTruthCounts = std::vector<std::pair<std::int32_t, std::int64_t>>;

// Per-user metric bundle for one method's result.
struct PerUserMetrics {
  std::string uid;
  std::string method;
  std::int32_t primary_location = -1;  // -1: absent
  double var_start_h2 = 0;
  double var_end_h2 = 0;
  int observable = 0;
  double max_radius_m = 0;
  std::vector<double> radii;  // one per location
  std::optional<double> ari;
};

// truth_counts, when present, carries per-stay record counts by true place.
PerUserMetrics evaluate_user(const std::string& uid, const std::string& method,
                             const std::vector<EvalStay>& stays,
                             const std::vector<std::int32_t>& assignment,
                             const std::vector<ActivityLocation>& locations,
                             const GridConfig& cfg,
                             const std::vector<StayTruthCounts>* truth_counts);

}  // namespace actloc
