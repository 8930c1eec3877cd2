// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hewsim/channelset.hpp"
#include "hewsim/common.hpp"

namespace hewsim {

struct SectorPattern {
  double center_deg = 0.0;
  double beamwidth_deg = 360.0;      // in (0, 360]
  double mainlobe_gain_db = 0.0;
  double backlobe_atten_db = 0.0;    // >= 0
  bool operator==(const SectorPattern&) const = default;
};

struct AntennaPattern {
  std::optional<SectorPattern> sector{};  // nullopt: omnidirectional
  bool omni() const { return !sector.has_value(); }
  bool operator==(const AntennaPattern&) const = default;
};

struct RadioParams {
  double tx_power_dbm = 20.0;
  double cca_threshold_dbm = -82.0;
  AntennaPattern pattern{};
  bool str_capable = false;
  bool operator==(const RadioParams&) const = default;
};

enum class Role { Ap, Sta };

struct Traffic {
  bool saturated = false;
  double offered_bps = 0.0;  // ignored when saturated; 0 means no traffic
  bool none() const { return !saturated && offered_bps <= 0.0; }
  bool operator==(const Traffic&) const = default;
};

struct Node {
  std::string id;
  Role role = Role::Sta;
  double x = 0.0;
  double y = 0.0;
  RadioParams radio{};
  int antennas = 1;
  Traffic traffic{};
  bool operator==(const Node&) const = default;
};

struct Wlan {
  std::string id;
  Node ap;
  std::vector<Node> stas;
  ChannelSet channels{};
  bool operator==(const Wlan&) const = default;
};

// MAC/PHY timing and frame constants. Defaults follow published IEEE
// 802.11ac numbers: 9 us slots, SIFS 16 us, DIFS 34 us, 40 us PHY header,
// 24 Mb/s control rate, 65 Mb/s per 20 MHz per spatial stream, and width
// factors matching the 802.11ac data-subcarrier ratios.
struct PhyParams {
  SimTime slot_ns = 9'000;
  SimTime sifs_ns = 16'000;
  SimTime difs_ns = 34'000;
  SimTime phy_header_ns = 40'000;
  std::int64_t control_rate_bps = 24'000'000;
  std::int64_t base_rate_20mhz_1ss_bps = 65'000'000;
  // Rate multiplier per bonded width, indexed by log2(channel count).
  std::array<double, 4> width_factors{1.0, 2.1, 4.5, 9.0};
  int cw_min = 16;
  int cw_max = 1024;
  int max_aggregation = 64;
  int mac_header_bits = 288;
  int mpdu_payload_bits = 12'000;
  int rts_bits = 160;
  int cts_bits = 112;
  int ack_bits = 112;

  double width_factor(int channel_count) const;

  bool operator==(const PhyParams&) const = default;
};

// Log-distance path loss; defaults are conventional indoor values.
struct PropagationModel {
  double pl0_db = 40.0;        // loss at 1 m
  double exponent = 3.5;
  double noise_floor_dbm = -95.0;  // per 20 MHz basic channel
  // Receptions survive overlap when SINR >= this threshold; disabled
  // (nullopt) means the pure collision model: any audible overlap fails.
  std::optional<double> capture_threshold_db{};
  bool operator==(const PropagationModel&) const = default;
};

enum class Protocol { CsmaCa, CsmaEca };

// Downlink MU-MIMO shape x:y:z — x total streams to y destinations with z
// streams each; x = y*z.
struct MumimoConfig {
  int x = 1;
  int y = 1;
  int z = 1;

  static MumimoConfig parse(std::string_view text);  // "x:y:z"
  std::string to_string() const;
  bool operator==(const MumimoConfig&) const = default;
};

struct ProtocolConfig {
  Protocol protocol = Protocol::CsmaCa;
  bool str = false;
  int aggregation = 64;   // MPDUs per TXOP, clamped to phy.max_aggregation
  bool piggyback = false;
  int retry_limit = 7;
  int ofdma = 0;          // 0: off; N: cap on allocated 20 MHz subchannels
  std::optional<MumimoConfig> mumimo{};
  SimTime sounding_interval_ns = 50 * kNsPerMs;  // <= 0: sound once, never refresh
  double mu_stream_penalty = 1.0;  // per-extra-stream rate factor in MU-MIMO
  bool operator==(const ProtocolConfig&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  SimTime duration_ns = kNsPerSec;
  std::uint64_t seed = 1;
  std::vector<Wlan> wlans;
  RadioParams radio_defaults{};
  PhyParams phy{};
  PropagationModel propagation{};
  ProtocolConfig protocol{};
  double warmup_fraction = 0.1;  // leading fraction excluded from reports

  SimTime warmup_ns() const {
    return static_cast<SimTime>(static_cast<double>(duration_ns) * warmup_fraction);
  }
  bool operator==(const Scenario&) const = default;
};

// Parse the documented scenario file format (see docs/scenario-format.md).
// Throws ConfigError with a line-numbered message on syntax errors, a named
// field on schema violations, and a named invariant on invariant violations.
Scenario parse_scenario(std::string_view text);

// Render a scenario such that parse_scenario(render_scenario(s)) == s.
std::string render_scenario(const Scenario& s);

// Built-in reference topologies: fig2-overlap, stadium-toy, train-toy,
// apartment-toy. Pure: repeated calls return identical scenarios.
Scenario builtin_scenario(std::string_view name);

// Empty iff every type invariant holds; each entry names the offending
// node/WLAN and the invariant.
std::vector<std::string> validate(const Scenario& s);

SimTime parse_duration_ns(std::string_view text);  // accepts ns/us/ms/s suffixes

}  // namespace hewsim
