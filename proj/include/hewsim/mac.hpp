// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hewsim/channel.hpp"
#include "hewsim/common.hpp"
#include "hewsim/engine.hpp"
#include "hewsim/scenario.hpp"

namespace hewsim {

enum class BackoffMode { Random, Deterministic };
enum class TxOutcome { None, Success, Collision };

struct BackoffState {
  int counter = 0;
  int stage = 0;        // retry index
  int cw = 0;           // current contention window
  BackoffMode mode = BackoffMode::Random;
  TxOutcome last_outcome = TxOutcome::None;
};

// The canonical CSMA/ECA deterministic slot: cw_min/2 - 1.
inline int deterministic_backoff(int cw_min) { return cw_min / 2 - 1; }

inline int contention_window(const PhyParams& phy, int stage) {
  std::int64_t cw = static_cast<std::int64_t>(phy.cw_min) << stage;
  return static_cast<int>(std::min<std::int64_t>(cw, phy.cw_max));
}

void record_success(BackoffState& st, const PhyParams& phy);
void record_collision(BackoffState& st, const PhyParams& phy);
void reset_after_drop(BackoffState& st, const PhyParams& phy);

// Draw the next backoff on (re)entering contention. CSMA/CA: uniform in
// [0, cw). CSMA/ECA: the fixed deterministic slot after a success, standard
// random recovery (doubled cw) after a collision.
int sample_backoff(BackoffState& st, Protocol protocol, const PhyParams& phy,
                   RandomStream& rng);

enum class SlotAction { Decrement, Freeze, Transmit };

// Per-slot contention step: busy freezes the counter, idle decrements it,
// zero transmits at the boundary.
SlotAction step_slot(const BackoffState& st, const CcaVerdict& cca);

enum class FrameKind : std::uint8_t {
  Rts,
  RtsPrime,        // OFDMA allocation announcement
  RtsDoublePrime,  // uplink MU-MIMO trigger
  Cts,
  Data,
  BlockAck,
  Ack,
  Sounding,
};

enum class LinkDir : std::uint8_t { Down, Up, Bidir };

struct Phase {
  FrameKind kind = FrameKind::Data;
  LinkDir dir = LinkDir::Down;
  ChannelSet channels{};
  SimTime duration_ns = 0;
  std::vector<int> participants;
  std::int64_t bits = 0;  // frame payload size on the air (per participant)
};

// A payload stream carried by one exchange; delivered bits are credited to
// `src` when `dst` decodes successfully.
struct ExchangeLink {
  int src = -1;
  int dst = -1;
  std::int64_t payload_bits = 0;
  int n_mpdus = 0;
};

// One composed TXOP: control frames, (possibly multi-user) data and ACKs,
// SIFS-separated. The leading DIFS + backoff belong to the contention cycle,
// not the exchange.
struct FrameExchange {
  std::vector<Phase> phases;
  SimTime total_airtime_ns = 0;  // sum of phases plus inter-phase SIFS
  std::vector<ExchangeLink> links;

  std::int64_t payload_bits() const {
    std::int64_t sum = 0;
    for (const auto& l : links) sum += l.payload_bits;
    return sum;
  }
  std::int64_t control_bits() const {  // leading control frame size
    return phases.empty() ? 0 : phases.front().bits;
  }
};

// Recompute total airtime from the phase list: phases separated by SIFS.
SimTime exchange_airtime_ns(const FrameExchange& fx, const PhyParams& phy);

// Per-destination transmit queue of fixed-size MPDUs. Saturated queues
// always report a full aggregate available.
struct TxQueue {
  bool saturated = false;
  std::int64_t backlog_mpdus = 0;
  bool pending_piggyback_ack = false;  // owes the peer an ACK to ride on DATA

  bool empty() const { return !saturated && backlog_mpdus <= 0; }
  int available(int max_mpdus) const {
    if (saturated) return max_mpdus;
    return static_cast<int>(std::min<std::int64_t>(backlog_mpdus, max_mpdus));
  }
  void consume(int n) {
    if (!saturated) backlog_mpdus = std::max<std::int64_t>(0, backlog_mpdus - n);
  }
};

SimTime control_frame_ns(std::int64_t bits, const PhyParams& phy);
std::int64_t data_rate_bps(const PhyParams& phy, int width_channels, int streams,
                           double per_extra_stream_penalty = 1.0);

// RTS/CTS, one aggregate DATA phase of up to `aggregation` MPDUs, one block
// ACK. When the piggyback flag on `queue` is set the reverse ACK rides in
// the DATA phase (ack_bits added); when `reverse_queued` and piggybacking is
// on, the trailing block ACK phase is omitted (the receiver will piggyback
// it later). Throws ConfigError on an empty queue.
FrameExchange build_txop(int tx_node, int rx_node, TxQueue& queue,
                         const PhyParams& phy, const ChannelSet& width,
                         int streams, int aggregation, bool piggyback_enabled,
                         bool reverse_queued);

// Joint full-duplex exchange: RTS/CTS, overlapped DATA phases, sequential
// ACKs. CSMA/CA pairs only on simultaneous backoff expiry; CSMA/ECA pairs
// whenever the deterministic schedule lets either side align with the other.
// Returns nullopt when the pairing conditions are not met.
std::optional<FrameExchange> str_pair(const Node& ap, int ap_index, const Node& sta,
                                      int sta_index, TxQueue& downlink,
                                      TxQueue& uplink, bool same_slot_expiry,
                                      Protocol protocol, const PhyParams& phy,
                                      const ChannelSet& width, int streams_down,
                                      int streams_up, int aggregation);

}  // namespace hewsim
