// SPDX-License-Identifier: Apache-2.0
#include "hewsim/multiuser.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hewsim {

std::int64_t rts_prime_bits(int n_tx) {
  if (n_tx <= 0) throw ConfigError("rts_prime_bits: N_tx must be >= 1");
  return 120 + 56 * static_cast<std::int64_t>(n_tx);
}

std::vector<int> OfdmaAllocation::channels_of(int sta) const {
  std::vector<int> out;
  for (const auto& [ch, node] : subchannels)
    if (node == sta) out.push_back(ch);
  return out;
}

std::vector<int> OfdmaAllocation::stations() const {
  std::vector<int> out;
  for (const auto& [ch, node] : subchannels)
    if (std::find(out.begin(), out.end(), node) == out.end()) out.push_back(node);
  return out;
}

OfdmaAllocation RoundRobinAllocator::allocate(const ChannelSet& available,
                                              std::span<const int> candidates) {
  if (candidates.empty()) throw ConfigError("ofdma_allocate: no candidates");
  const int m = available.count;
  const int k = static_cast<int>(candidates.size());

  // Serving order starts after the last served candidate.
  int start = 0;
  if (last_served_ >= 0) {
    auto it = std::find(candidates.begin(), candidates.end(), last_served_);
    if (it != candidates.end())
      start = static_cast<int>(it - candidates.begin() + 1) % k;
  }

  const int served = std::min(m, k);
  std::vector<int> counts(static_cast<std::size_t>(served), m / k);
  if (m <= k) {
    std::fill(counts.begin(), counts.end(), 1);
  } else {
    for (int i = 0; i < m % k; ++i) counts[static_cast<std::size_t>(i)] += 1;
  }

  OfdmaAllocation alloc;
  int ch = available.first;
  int last = last_served_;
  for (int i = 0; i < served; ++i) {
    const int sta = candidates[static_cast<std::size_t>((start + i) % k)];
    for (int c = 0; c < counts[static_cast<std::size_t>(i)]; ++c)
      alloc.subchannels[ch++] = sta;
    last = sta;
  }
  last_served_ = last;
  return alloc;
}

FrameExchange build_ofdma_exchange(int ap_node, const OfdmaAllocation& alloc,
                                   const ChannelSet& used, std::span<const MuPeer> peers,
                                   const PhyParams& phy) {
  if (alloc.subchannels.empty()) throw ConfigError("ofdma exchange: empty allocation");
  for (const auto& [ch, sta] : alloc.subchannels) {
    if (!used.contains(ch))
      throw ConfigError("ofdma exchange: allocated channel outside the used set");
    (void)sta;
  }

  std::vector<int> stas = alloc.stations();
  auto peer_of = [&](int node) -> const MuPeer& {
    for (const MuPeer& p : peers)
      if (p.node == node) return p;
    throw ConfigError("ofdma exchange: allocation names a station without queue info");
  };

  FrameExchange fx;
  const std::int64_t rts_bits = rts_prime_bits(alloc.n_tx());
  fx.phases.push_back(Phase{FrameKind::RtsPrime, LinkDir::Down, used,
                            control_frame_ns(rts_bits, phy), {ap_node}, rts_bits});
  fx.phases.push_back(Phase{FrameKind::Cts, LinkDir::Up, used,
                            control_frame_ns(phy.cts_bits, phy), stas, phy.cts_bits});

  // Each station carries its aggregate over its own subchannels at the
  // 20 MHz rate per subchannel; the phase lasts as long as the slowest one.
  SimTime data_ns = 0;
  std::int64_t data_bits = 0;
  for (int sta : stas) {
    const MuPeer& p = peer_of(sta);
    const int held = static_cast<int>(alloc.channels_of(sta).size());
    const std::int64_t bits = static_cast<std::int64_t>(p.n_mpdus) *
                              (phy.mac_header_bits + phy.mpdu_payload_bits);
    const std::int64_t rate =
        static_cast<std::int64_t>(held) * data_rate_bps(phy, 1, p.streams);
    data_ns = std::max(data_ns, bits_duration_ns(bits, rate));
    data_bits += bits;
    fx.links.push_back({ap_node, sta,
                        static_cast<std::int64_t>(p.n_mpdus) * phy.mpdu_payload_bits,
                        p.n_mpdus});
  }
  std::vector<int> data_participants = stas;
  data_participants.insert(data_participants.begin(), ap_node);
  fx.phases.push_back(Phase{FrameKind::Data, LinkDir::Down, used,
                            phy.phy_header_ns + data_ns, data_participants, data_bits});
  fx.phases.push_back(Phase{FrameKind::BlockAck, LinkDir::Up, used,
                            control_frame_ns(phy.ack_bits, phy), stas, phy.ack_bits});
  fx.total_airtime_ns = exchange_airtime_ns(fx, phy);
  return fx;
}

SimTime sounding_overhead_ns(int n_stas, const PhyParams& phy) {
  if (n_stas < 1) return 0;
  const SimTime t_announce = 40 * kNsPerUs;
  const SimTime t_ndp = 40 * kNsPerUs;
  const SimTime t_report =
      phy.phy_header_ns + bits_duration_ns(1024, phy.control_rate_bps);
  return t_announce + t_ndp +
         static_cast<SimTime>(n_stas) * (phy.sifs_ns + t_report);
}

namespace {

double dot_abs(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return std::fabs(s);
}

}  // namespace

std::vector<int> select_group(std::span<const CsiRecord> fresh, int y) {
  if (y <= 0) throw ConfigError("select_group: y must be >= 1");
  if (static_cast<int>(fresh.size()) < y)
    throw ConfigError("select_group: insufficient fresh CSI (" +
                      std::to_string(fresh.size()) + " of " + std::to_string(y) + ")");

  std::vector<std::size_t> chosen;
  std::vector<bool> used(fresh.size(), false);

  // Seed with the highest-quality station.
  std::size_t best = 0;
  for (std::size_t i = 1; i < fresh.size(); ++i)
    if (fresh[i].quality > fresh[best].quality) best = i;
  chosen.push_back(best);
  used[best] = true;

  while (static_cast<int>(chosen.size()) < y) {
    double group_quality = 0.0;
    for (std::size_t c : chosen) group_quality += fresh[c].quality;
    group_quality /= static_cast<double>(chosen.size());

    std::size_t pick = fresh.size();
    double pick_corr = 0.0;
    double pick_qdist = 0.0;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (used[i]) continue;
      double corr = 0.0;
      for (std::size_t c : chosen)
        corr = std::max(corr, dot_abs(fresh[i].signature, fresh[c].signature));
      const double qdist = std::fabs(fresh[i].quality - group_quality);
      if (pick == fresh.size() || corr < pick_corr ||
          (corr == pick_corr && qdist < pick_qdist)) {
        pick = i;
        pick_corr = corr;
        pick_qdist = qdist;
      }
    }
    chosen.push_back(pick);
    used[pick] = true;
  }

  std::vector<int> out;
  out.reserve(chosen.size());
  for (std::size_t c : chosen) out.push_back(fresh[c].node);
  return out;
}

FrameExchange build_dl_mumimo(int ap_node, const MumimoConfig& cfg,
                              std::span<const MuPeer> group, const ChannelSet& width,
                              const PhyParams& phy, int ap_antennas,
                              double stream_penalty) {
  if (cfg.x != cfg.y * cfg.z)
    throw ConfigError("mumimo config: x must equal y*z");
  if (cfg.x > ap_antennas)
    throw ConfigError("mumimo config: x exceeds the AP antenna count");
  if (static_cast<int>(group.size()) != cfg.y)
    throw ConfigError("mumimo config: group size must equal y");
  for (const MuPeer& p : group) {
    if (cfg.z > p.antennas)
      throw ConfigError("mumimo config: z exceeds a destination's antenna count");
  }

  FrameExchange fx;
  std::vector<int> members;
  for (const MuPeer& p : group) members.push_back(p.node);

  fx.phases.push_back(Phase{FrameKind::Rts, LinkDir::Down, width,
                            control_frame_ns(phy.rts_bits, phy), {ap_node},
                            phy.rts_bits});
  fx.phases.push_back(Phase{FrameKind::Cts, LinkDir::Up, width,
                            control_frame_ns(phy.cts_bits, phy), {members.front()},
                            phy.cts_bits});

  // The DATA PHY header announces the group; every destination is served
  // with z streams in parallel for the duration of the slowest one.
  SimTime data_ns = 0;
  std::int64_t data_bits = 0;
  const std::int64_t rate = data_rate_bps(phy, width.count, cfg.z, stream_penalty);
  for (const MuPeer& p : group) {
    const std::int64_t bits = static_cast<std::int64_t>(p.n_mpdus) *
                              (phy.mac_header_bits + phy.mpdu_payload_bits);
    data_ns = std::max(data_ns, bits_duration_ns(bits, rate));
    data_bits += bits;
    fx.links.push_back({ap_node, p.node,
                        static_cast<std::int64_t>(p.n_mpdus) * phy.mpdu_payload_bits,
                        p.n_mpdus});
  }
  std::vector<int> data_participants = members;
  data_participants.insert(data_participants.begin(), ap_node);
  fx.phases.push_back(Phase{FrameKind::Data, LinkDir::Down, width,
                            phy.phy_header_ns + data_ns, data_participants, data_bits});
  for (const MuPeer& p : group) {
    fx.phases.push_back(Phase{FrameKind::BlockAck, LinkDir::Up, width,
                              control_frame_ns(phy.ack_bits, phy), {p.node},
                              phy.ack_bits});
  }
  fx.total_airtime_ns = exchange_airtime_ns(fx, phy);
  return fx;
}

FrameExchange build_ul_mumimo(int ap_node, std::span<const MuPeer> group,
                              const ChannelSet& width, const PhyParams& phy,
                              int ap_antennas) {
  if (group.empty()) throw ConfigError("ul mumimo: empty group");
  if (static_cast<int>(group.size()) > ap_antennas)
    throw ConfigError("ul mumimo: group exceeds the AP antenna count");

  FrameExchange fx;
  std::vector<int> members;
  for (const MuPeer& p : group) members.push_back(p.node);

  const std::int64_t trigger_bits = rts_prime_bits(static_cast<int>(group.size()));
  fx.phases.push_back(Phase{FrameKind::RtsDoublePrime, LinkDir::Down, width,
                            control_frame_ns(trigger_bits, phy), {ap_node},
                            trigger_bits});

  // All selected stations transmit together, one stream each; members with
  // nothing queued pad the whole phase and deliver no payload.
  SimTime data_ns = 0;
  std::int64_t data_bits = 0;
  const std::int64_t rate = data_rate_bps(phy, width.count, 1);
  for (const MuPeer& p : group) {
    const std::int64_t bits = static_cast<std::int64_t>(p.n_mpdus) *
                              (phy.mac_header_bits + phy.mpdu_payload_bits);
    data_ns = std::max(data_ns, bits_duration_ns(bits, rate));
    data_bits += bits;
    if (p.n_mpdus > 0) {
      fx.links.push_back({p.node, ap_node,
                          static_cast<std::int64_t>(p.n_mpdus) * phy.mpdu_payload_bits,
                          p.n_mpdus});
    }
  }
  fx.phases.push_back(Phase{FrameKind::Data, LinkDir::Up, width,
                            phy.phy_header_ns + data_ns, members, data_bits});
  for (const MuPeer& p : group) {
    fx.phases.push_back(Phase{FrameKind::Ack, LinkDir::Down, width,
                              control_frame_ns(phy.ack_bits, phy), {p.node},
                              phy.ack_bits});
  }
  fx.total_airtime_ns = exchange_airtime_ns(fx, phy);
  return fx;
}

}  // namespace hewsim
