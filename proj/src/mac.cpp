// SPDX-License-Identifier: Apache-2.0
#include "hewsim/mac.hpp"

#include <algorithm>

namespace hewsim {

void record_success(BackoffState& st, const PhyParams& phy) {
  st.stage = 0;
  st.cw = phy.cw_min;
  st.last_outcome = TxOutcome::Success;
}

void record_collision(BackoffState& st, const PhyParams& phy) {
  st.stage += 1;
  st.cw = contention_window(phy, st.stage);
  st.last_outcome = TxOutcome::Collision;
}

void reset_after_drop(BackoffState& st, const PhyParams& phy) {
  st.stage = 0;
  st.cw = phy.cw_min;
  st.last_outcome = TxOutcome::None;
}

int sample_backoff(BackoffState& st, Protocol protocol, const PhyParams& phy,
                   RandomStream& rng) {
  if (st.cw <= 0) st.cw = phy.cw_min;
  if (protocol == Protocol::CsmaEca && st.last_outcome == TxOutcome::Success) {
    st.mode = BackoffMode::Deterministic;
    st.counter = deterministic_backoff(phy.cw_min);
  } else {
    st.mode = BackoffMode::Random;
    st.counter = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(st.cw)));
  }
  return st.counter;
}

SlotAction step_slot(const BackoffState& st, const CcaVerdict& cca) {
  if (cca.overall) return SlotAction::Freeze;
  if (st.counter == 0) return SlotAction::Transmit;
  return SlotAction::Decrement;
}

SimTime exchange_airtime_ns(const FrameExchange& fx, const PhyParams& phy) {
  SimTime total = 0;
  for (const Phase& p : fx.phases) total += p.duration_ns;
  if (fx.phases.size() > 1)
    total += static_cast<SimTime>(fx.phases.size() - 1) * phy.sifs_ns;
  return total;
}

SimTime control_frame_ns(std::int64_t bits, const PhyParams& phy) {
  return phy.phy_header_ns + bits_duration_ns(bits, phy.control_rate_bps);
}

std::int64_t data_rate_bps(const PhyParams& phy, int width_channels, int streams,
                           double per_extra_stream_penalty) {
  const double per_stream = static_cast<double>(phy.base_rate_20mhz_1ss_bps) *
                            phy.width_factor(width_channels) *
                            std::pow(per_extra_stream_penalty, streams - 1);
  return std::llround(per_stream * streams);
}

namespace {

Phase control_phase(FrameKind kind, LinkDir dir, const ChannelSet& width,
                    std::int64_t bits, std::vector<int> participants,
                    const PhyParams& phy) {
  return Phase{kind, dir, width, control_frame_ns(bits, phy), std::move(participants),
               bits};
}

}  // namespace

FrameExchange build_txop(int tx_node, int rx_node, TxQueue& queue,
                         const PhyParams& phy, const ChannelSet& width,
                         int streams, int aggregation, bool piggyback_enabled,
                         bool reverse_queued) {
  const int n = queue.available(std::min(aggregation, phy.max_aggregation));
  if (n <= 0) throw ConfigError("build_txop: empty queue");

  std::int64_t data_bits =
      static_cast<std::int64_t>(n) * (phy.mac_header_bits + phy.mpdu_payload_bits);
  if (piggyback_enabled && queue.pending_piggyback_ack) {
    data_bits += phy.ack_bits;  // the reverse ACK rides in the DATA header
    queue.pending_piggyback_ack = false;
  }
  const bool omit_ack = piggyback_enabled && reverse_queued;

  FrameExchange fx;
  fx.phases.push_back(
      control_phase(FrameKind::Rts, LinkDir::Down, width, phy.rts_bits, {tx_node}, phy));
  fx.phases.push_back(
      control_phase(FrameKind::Cts, LinkDir::Up, width, phy.cts_bits, {rx_node}, phy));
  const std::int64_t rate = data_rate_bps(phy, width.count, streams);
  fx.phases.push_back(Phase{FrameKind::Data, LinkDir::Down, width,
                            phy.phy_header_ns + bits_duration_ns(data_bits, rate),
                            {tx_node, rx_node}, data_bits});
  if (!omit_ack) {
    fx.phases.push_back(control_phase(FrameKind::BlockAck, LinkDir::Up, width,
                                      phy.ack_bits, {rx_node}, phy));
  }
  fx.total_airtime_ns = exchange_airtime_ns(fx, phy);
  fx.links.push_back({tx_node, rx_node,
                      static_cast<std::int64_t>(n) * phy.mpdu_payload_bits, n});
  return fx;
}

std::optional<FrameExchange> str_pair(const Node& ap, int ap_index, const Node& sta,
                                      int sta_index, TxQueue& downlink,
                                      TxQueue& uplink, bool same_slot_expiry,
                                      Protocol protocol, const PhyParams& phy,
                                      const ChannelSet& width, int streams_down,
                                      int streams_up, int aggregation) {
  if (!ap.radio.str_capable || !sta.radio.str_capable) return std::nullopt;
  if (downlink.empty() || uplink.empty()) return std::nullopt;
  // CSMA/CA offers no schedule knowledge: full duplex happens only when both
  // countdowns finish in the same slot. CSMA/ECA pairs on the deterministic
  // schedule regardless.
  if (protocol == Protocol::CsmaCa && !same_slot_expiry) return std::nullopt;

  const int agg = std::min(aggregation, phy.max_aggregation);
  const int n_down = std::min(downlink.available(phy.max_aggregation), agg);
  const int n_up = std::min(uplink.available(phy.max_aggregation), agg);
  const std::int64_t per_mpdu = phy.mac_header_bits + phy.mpdu_payload_bits;
  const std::int64_t down_bits = static_cast<std::int64_t>(n_down) * per_mpdu;
  const std::int64_t up_bits = static_cast<std::int64_t>(n_up) * per_mpdu;

  FrameExchange fx;
  fx.phases.push_back(
      control_phase(FrameKind::Rts, LinkDir::Down, width, phy.rts_bits, {ap_index}, phy));
  fx.phases.push_back(
      control_phase(FrameKind::Cts, LinkDir::Up, width, phy.cts_bits, {sta_index}, phy));
  const SimTime down_ns =
      phy.phy_header_ns +
      bits_duration_ns(down_bits, data_rate_bps(phy, width.count, streams_down));
  const SimTime up_ns =
      phy.phy_header_ns +
      bits_duration_ns(up_bits, data_rate_bps(phy, width.count, streams_up));
  fx.phases.push_back(Phase{FrameKind::Data, LinkDir::Bidir, width,
                            std::max(down_ns, up_ns), {ap_index, sta_index},
                            down_bits + up_bits});
  // ACK serialization: the overlapped DATA phases are acknowledged one after
  // the other.
  fx.phases.push_back(
      control_phase(FrameKind::BlockAck, LinkDir::Up, width, phy.ack_bits, {sta_index}, phy));
  fx.phases.push_back(
      control_phase(FrameKind::BlockAck, LinkDir::Down, width, phy.ack_bits, {ap_index}, phy));
  fx.total_airtime_ns = exchange_airtime_ns(fx, phy);
  fx.links.push_back({ap_index, sta_index,
                      static_cast<std::int64_t>(n_down) * phy.mpdu_payload_bits, n_down});
  fx.links.push_back({sta_index, ap_index,
                      static_cast<std::int64_t>(n_up) * phy.mpdu_payload_bits, n_up});
  return fx;
}

double PhyParams::width_factor(int channel_count) const {
  switch (channel_count) {
    case 1: return width_factors[0];
    case 2: return width_factors[1];
    case 4: return width_factors[2];
    case 8: return width_factors[3];
    default: throw ConfigError("width must be 1,2,4,8 basic channels");
  }
}

}  // namespace hewsim
