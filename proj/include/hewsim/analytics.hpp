// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hewsim/scenario.hpp"
#include "hewsim/trace.hpp"

namespace hewsim {

struct NodeTally {
  std::int64_t attempts = 0;
  std::int64_t collisions = 0;
  std::int64_t successes = 0;
  std::int64_t drops = 0;
  std::int64_t delivered_bits = 0;   // payload successfully transmitted
  SimTime airtime_ns = 0;            // successful exchange airtime, clipped to window
  std::int64_t backoff_slots = 0;    // idle slots counted down
  bool operator==(const NodeTally&) const = default;
};

struct WlanTally {
  std::int64_t attempts = 0;
  std::int64_t collisions = 0;
  std::int64_t successes = 0;
  std::int64_t delivered_bits = 0;
  SimTime airtime_ns = 0;
  bool operator==(const WlanTally&) const = default;
};

// Event-level tallies over the measurement window (warm-up excluded).
struct MetricsRaw {
  std::vector<NodeTally> node;
  std::vector<WlanTally> wlan;
  std::uint64_t events_processed = 0;
  SimTime measured_window_ns = 0;
  // Union of transmission time per basic channel, clipped to the window.
  std::array<SimTime, kMaxBasicChannels> channel_busy_ns{};
  // Airtime of exchanges still unresolved when the run ended, clipped.
  SimTime unresolved_airtime_ns = 0;
  // Sum credited at exchange resolution; must equal the per-node sum exactly.
  std::int64_t exchange_delivered_bits = 0;

  bool operator==(const MetricsRaw&) const = default;
  std::string summary_digest() const;  // deterministic serialization
};

struct Report {
  struct PerWlan {
    std::string id;
    double throughput_bps = 0.0;
    double collision_prob = 0.0;
    double airtime_share = 0.0;
  };
  struct PerNode {
    std::string id;
    std::string wlan;
    double throughput_bps = 0.0;
    double collision_prob = 0.0;
    double airtime_share = 0.0;
  };
  std::vector<PerWlan> wlans;
  std::vector<PerNode> nodes;
  double jain = 1.0;  // over per-WLAN throughputs
  SimTime measured_window_ns = 0;

  double total_throughput_bps() const {
    double sum = 0.0;
    for (const auto& w : wlans) sum += w.throughput_bps;
    return sum;
  }
};

// Jain fairness index (sum x)^2 / (n * sum x^2); 1.0 for an empty or all-zero
// vector (vacuous fairness).
double jain_index(std::span<const double> xs);

// Reduce raw tallies to per-WLAN/per-node throughput, collision probability,
// airtime share and fairness.
Report reduce(const MetricsRaw& raw, const Scenario& s);

// Closed-form contention-free saturation throughput (bits/s): one saturated
// transmitter cycling DIFS + mean backoff + RTS/CTS/DATA/ACK with three SIFS.
// Covers n_contenders == 1 only; throws ConfigError otherwise.
double analytic_saturation_throughput(const PhyParams& phy, int width_channels,
                                      int streams, int aggregation,
                                      int n_contenders = 1);

struct RunResult {
  Report report;
  MetricsRaw raw;
};

// Execute one scenario to t_end (<= scenario duration; 0 means the full
// duration) and reduce. Deterministic in (scenario, seed).
RunResult run(const Scenario& s, std::uint64_t seed, SimTime t_end = 0,
              const TraceSink& trace = {});

// Report rows in the fixed CSV schema. axis_value is "-" for plain runs.
std::string report_csv(const Report& report, std::string_view axis_value,
                       std::uint64_t seed, bool header);

// One row per (value, seed, wlan, node) plus per-WLAN rows and mean/stddev
// summary rows per value. Cells may run concurrently; rows are keyed and
// sorted, so the CSV is byte-identical for identical inputs.
std::string sweep_csv(const Scenario& base, std::string_view axis,
                      std::span<const std::string> values,
                      std::span<const std::uint64_t> seeds, SimTime duration = 0);

// Apply one sweep-axis setting (ofdma, mumimo, aggregation, cca_threshold,
// tx_power, n_stas; the latter three accept an ":wlan-id" suffix to target
// one WLAN). Throws ConfigError on unknown axes or non-applicable values.
void apply_axis(Scenario& s, std::string_view axis, std::string_view value);

}  // namespace hewsim
