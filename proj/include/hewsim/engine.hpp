// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hewsim/common.hpp"

namespace hewsim {

enum class EventKind : std::uint8_t {
  SlotBoundary,    // backoff countdown completed
  TxStart,         // transmission decision commits
  TxEnd,           // transmission leaves the medium
  TimerExpiry,     // DIFS re-arm boundary
  TrafficArrival,  // offered-load MPDU arrival
};

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;  // monotonically assigned; tie-breaker at equal times
  EventKind kind = EventKind::TimerExpiry;
  int subject = -1;       // node index (TxEnd: transmission id)
  std::int64_t payload = 0;
};

// Deterministic pending-event set ordered by (time, seq). Same-time events
// fire in insertion order; cancellation is by lazy tombstone.
class EventQueue {
 public:
  using Handle = std::uint64_t;

  // Throws SimError when t is before the current clock.
  Handle schedule(SimTime t, EventKind kind, int subject, std::int64_t payload = 0);
  void cancel(Handle h);

  // Next event with time <= t_end, advancing the clock to its time; nullopt
  // when none remain at or before t_end (clock then advances to t_end).
  std::optional<Event> pop_next(SimTime t_end);

  SimTime clock() const { return clock_; }
  bool empty() const { return live_ == 0; }
  std::uint64_t processed() const { return processed_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t live_ = 0;
  std::uint64_t processed_ = 0;
  SimTime clock_ = 0;
};

// Per-(node, purpose) random stream split from the scenario seed.
//
// Splitting function: the scenario seed and the FNV-1a hashes of the node id
// and purpose tag are chained through splitmix64; four outputs seed a
// std::mt19937_64. Different (node, purpose) pairs land in unrelated seed
// space, and the same inputs always reproduce the same sequence.
class RandomStream {
 public:
  RandomStream(std::uint64_t scenario_seed, std::string_view node_id,
               std::string_view purpose);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform over [0, n), consuming exactly one 64-bit step: the draw is
  // mapped by fixed-point multiply (x * n) >> 64, whose bias is below 2^-48
  // for any n used here. Throws SimError when n == 0.
  std::uint64_t uniform(std::uint64_t n);

  double uniform_unit();  // [0, 1), one step

 private:
  std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace hewsim
