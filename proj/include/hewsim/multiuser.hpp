// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <vector>

#include "hewsim/mac.hpp"

namespace hewsim {

// Extended RTS announcing an OFDMA allocation (or an uplink MU-MIMO group):
// 120 + 56 * n_tx bits. Throws ConfigError for n_tx == 0.
std::int64_t rts_prime_bits(int n_tx);

// Map of allocated basic channels to stations. One station per subchannel;
// a station may hold several. N_tx is the number of allocated subchannels.
struct OfdmaAllocation {
  std::map<int, int> subchannels;  // basic channel index -> station node index
  int n_tx() const { return static_cast<int>(subchannels.size()); }

  // Channels held by one station, ascending.
  std::vector<int> channels_of(int sta) const;
  std::vector<int> stations() const;  // distinct stations in serving order
};

// Round-robin subchannel allocator with a persistent cursor: each allocation
// starts from the candidate after the last one served. All provided
// subchannels are assigned; when stations outnumber subchannels the first
// ones in cyclic order get one each, otherwise earlier stations in serving
// order receive the leftover subchannels (one extra each).
class RoundRobinAllocator {
 public:
  OfdmaAllocation allocate(const ChannelSet& available, std::span<const int> candidates);
  int last_served() const { return last_served_; }

 private:
  int last_served_ = -1;
};

struct MuPeer {
  int node = -1;
  int n_mpdus = 0;
  int streams = 1;   // spatial streams toward/from this peer
  int antennas = 1;
};

// RTS' over the full allocated set, parallel CTS, parallel per-station DATA
// at the 20 MHz rate per held subchannel (phase lasts as long as the slowest
// station), parallel ACKs. Temporal overheads are paid once for all
// stations.
FrameExchange build_ofdma_exchange(int ap_node, const OfdmaAllocation& alloc,
                                   const ChannelSet& used, std::span<const MuPeer> peers,
                                   const PhyParams& phy);

// Explicit sounding cost: announcement + NDP + one SIFS-separated report per
// sounded station, charged to the channel once per sounding interval.
// T_announce = T_ndp = 40 us; T_report = phy header + 1024 bits at the
// control rate.
SimTime sounding_overhead_ns(int n_stas, const PhyParams& phy);

struct CsiRecord {
  int node = -1;
  SimTime sounded_at = 0;
  double quality = 1.0;             // > 0
  std::vector<double> signature;    // unit vector, dimension = AP antennas
};

// Greedy grouping: seed with the highest-quality station, then repeatedly
// add the station minimizing the maximum pairwise |signature dot product|
// among the chosen, tie-broken by quality closeness to the group mean.
// Records must already be fresh; throws ConfigError when fewer than y.
std::vector<int> select_group(std::span<const CsiRecord> fresh, int y);

// Downlink MU-MIMO: RTS/CTS, then one MU DATA phase whose PHY header
// announces the group (each destination served with z streams), then y
// sequential SIFS-separated ACKs. Throws ConfigError on a cfg/group
// mismatch (x != y*z, x over the AP antennas, z over a member's antennas).
FrameExchange build_dl_mumimo(int ap_node, const MumimoConfig& cfg,
                              std::span<const MuPeer> group, const ChannelSet& width,
                              const PhyParams& phy, int ap_antennas,
                              double stream_penalty = 1.0);

// Uplink MU-MIMO: RTS'' names the group, the selected stations start
// transmitting together (one stream each; empty-buffer members send padding
// for the whole phase), then sequential ACKs from the AP. Throws ConfigError
// on an empty group or a group larger than the AP antenna count.
FrameExchange build_ul_mumimo(int ap_node, std::span<const MuPeer> group,
                              const ChannelSet& width, const PhyParams& phy,
                              int ap_antennas);

}  // namespace hewsim
