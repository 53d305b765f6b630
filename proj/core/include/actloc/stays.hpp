#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "actloc/grid.hpp"
#include "actloc/preprocess.hpp"

namespace actloc {

// 144 time-of-day flags, one per 10-minute slot.
class Occupancy144 {
 public:
  void set(int slot) { bits_[slot >> 6] |= (1ULL << (63 - (slot & 63))); }
  bool test(int slot) const { return bits_[slot >> 6] & (1ULL << (63 - (slot & 63))); }
  void set_all() {
    bits_[0] = ~0ULL;
    bits_[1] = ~0ULL;
    bits_[2] = 0xFFFF000000000000ULL;  // slots 128..143
  }
  int count() const {
    return std::popcount(bits_[0]) + std::popcount(bits_[1]) + std::popcount(bits_[2]);
  }
  int overlap(const Occupancy144& o) const {
    return std::popcount(bits_[0] & o.bits_[0]) + std::popcount(bits_[1] & o.bits_[1]) +
           std::popcount(bits_[2] & o.bits_[2]);
  }
  bool operator==(const Occupancy144&) const = default;

  // 36 hex chars, most-significant flag = slot 0.
  std::string to_hex() const;
  static bool from_hex(const std::string& hex, Occupancy144& out);

 private:
  std::array<std::uint64_t, 3> bits_{0, 0, 0};
};

// Contiguous presence in one grid cell lasting more than 10 minutes.
struct Stay {
  std::int32_t id = 0;  // unique per user, ordered by start
  GridIndex grid;
  SlotIndex start;
  SlotIndex end;  // exclusive
  std::int64_t duration_slots = 0;
  Occupancy144 occupancy;

  std::int64_t start_lin() const { return linearize(start); }
  std::int64_t end_lin() const { return linearize(end); }
};

enum class MidnightPolicy {
  kWrap,   // midnight-crossing stay stays one node, occupancy wraps
  kSplit,  // stays cut at day boundaries before the duration test
};

constexpr std::int64_t kUnlimitedGap = std::numeric_limits<std::int64_t>::max();

struct StayStats {
  std::uint64_t pass_bys = 0;
  std::int64_t pass_by_duration_slots = 0;
  std::int64_t stay_duration_slots = 0;
};

// Merges consecutive same-grid trace points into segments; a segment's
// duration runs from its first slot to the first slot of the next
// different-grid trace point, the attributed gap capped at max_gap_slots.
// The final segment ends after its last observed slot. Segments of >= 2
// slots become stays, 1-slot segments are pass-bys.
std::vector<Stay> extract_stays(const std::vector<TracePoint>& points,
                                MidnightPolicy policy,
                                std::int64_t max_gap_slots = kUnlimitedGap,
                                StayStats* stats = nullptr,
                                const GridConfig& cfg = GridConfig{});

}  // namespace actloc
