// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "hewsim/channelset.hpp"
#include "hewsim/common.hpp"
#include "hewsim/scenario.hpp"

namespace hewsim {

// Log-distance path loss in dB, clamped at the 1 m reference distance.
// Throws SimError for non-positive distances.
double path_loss_db(double distance_m, const PropagationModel& model);

// Gain toward a receiver at the given azimuth: mainlobe gain inside the
// beamwidth, negative backlobe attenuation outside, 0 dB for omni.
double antenna_gain_db(const AntennaPattern& pattern, double azimuth_deg);

// One TXOP on the medium: the spectrum-occupancy unit. The whole composed
// frame exchange is charged to the channel as a single block from start to
// end; total power splits equally across the basic channels.
struct Transmission {
  int id = -1;
  int tx_node = -1;  // global node index
  ChannelSet channels{};
  SimTime start = 0;
  SimTime end = 0;
  double total_power_dbm = 0.0;
  AntennaPattern pattern{};
  double x = 0.0;
  double y = 0.0;
  std::vector<int> receivers;  // intended receiver node indices

  double per_channel_power_dbm() const {
    return total_power_dbm - 10.0 * std::log10(static_cast<double>(channels.count));
  }
};

// Received power on one basic channel at a receiver position. Throws
// SimError when ch is outside the transmission's channel set.
double received_power_dbm(const Transmission& tx, double rx_x, double rx_y, int ch,
                          const PropagationModel& model);

struct CcaVerdict {
  std::array<bool, kMaxBasicChannels> busy{};  // meaningful on the sensed set
  bool overall = false;  // any sensed basic channel busy
};

// Energy-detect CCA: a basic channel is busy when the linear sum of received
// powers from all active transmissions is at or above the node's threshold.
// The node's own ongoing transmission is excluded only when it is
// STR-capable; otherwise its whole sensed set reads busy during its own TX.
CcaVerdict cca_assess(const Node& node, int node_index, const ChannelSet& sensed,
                      std::span<const Transmission> active,
                      const PropagationModel& model);

// Per-(node, channel) idle bookkeeping consumed by dbca_assess.
struct ChannelIdleView {
  std::array<bool, kMaxBasicChannels> busy_now{};
  std::array<SimTime, kMaxBasicChannels> idle_since{};  // valid where !busy_now
};

// Width assessment at transmission start: the widest valid set within the
// configured one whose channels have all been idle for at least the
// PIFS-equivalent window (slot + SIFS). Throws SimError when the primary is
// busy (the caller's state machine must not have invoked it).
ChannelSet dbca_assess(const ChannelSet& configured, const ChannelIdleView& view,
                       SimTime t, const PhyParams& phy);

struct ReceptionOutcome {
  int tx_id = -1;
  int rx_node = -1;
  bool success = false;
};

// Resolve the receptions of the `ended` transmissions against every
// transmission in `context` that overlaps them in time and spectrum.
// Collision model (capture threshold disabled): any overlap audible above
// the noise floor at the receiver fails the reception. Capture model:
// success iff the worst-case SINR over the whole frame duration stays at or
// above the threshold on every used channel. Both require the signal itself
// above the noise floor.
std::vector<ReceptionOutcome> resolve_receptions(
    std::span<const Transmission> ended, std::span<const Transmission> context,
    std::span<const Node> nodes, const PropagationModel& model);

}  // namespace hewsim
