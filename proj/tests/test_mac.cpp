// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "hewsim/mac.hpp"

using namespace hewsim;

namespace {

BackoffState fresh_state(const PhyParams& phy) {
  BackoffState st;
  st.cw = phy.cw_min;
  return st;
}

}  // namespace

TEST_CASE("csma-ca backoff is uniform in [0, cw)") {
  PhyParams phy;
  RandomStream rng(3, "bo", "ca");
  BackoffState st = fresh_state(phy);
  for (int i = 0; i < 500; ++i) {
    const int v = sample_backoff(st, Protocol::CsmaCa, phy, rng);
    CHECK(v >= 0);
    CHECK(v < phy.cw_min);
    CHECK(st.mode == BackoffMode::Random);
  }
}

TEST_CASE("csma-eca uses the fixed deterministic slot after success") {
  PhyParams phy;
  CHECK(deterministic_backoff(phy.cw_min) == 7);
  RandomStream rng(3, "bo", "eca");
  BackoffState st = fresh_state(phy);
  record_success(st, phy);
  CHECK(sample_backoff(st, Protocol::CsmaEca, phy, rng) == 7);
  record_success(st, phy);
  CHECK(sample_backoff(st, Protocol::CsmaEca, phy, rng) == 7);
  CHECK(st.mode == BackoffMode::Deterministic);
}

TEST_CASE("csma-eca recovers randomly with a doubled window after collision") {
  PhyParams phy;
  RandomStream rng(4, "bo", "eca2");
  BackoffState st = fresh_state(phy);
  record_collision(st, phy);
  CHECK(st.cw == 32);
  bool above_detslot = false;
  for (int i = 0; i < 300; ++i) {
    BackoffState copy = st;
    const int v = sample_backoff(copy, Protocol::CsmaEca, phy, rng);
    CHECK(copy.mode == BackoffMode::Random);
    CHECK(v < 32);
    if (v > 7) above_detslot = true;
  }
  CHECK(above_detslot);
}

TEST_CASE("contention window follows min(cw_min * 2^stage, cw_max)") {
  PhyParams phy;
  BackoffState st = fresh_state(phy);
  record_collision(st, phy);
  record_collision(st, phy);
  CHECK(st.stage == 2);
  CHECK(st.cw == 64);
  for (int i = 0; i < 10; ++i) record_collision(st, phy);
  CHECK(st.cw == phy.cw_max);
  RandomStream rng(9, "bo", "stage2");
  BackoffState stage2 = fresh_state(phy);
  record_collision(stage2, phy);
  record_collision(stage2, phy);
  for (int i = 0; i < 200; ++i) {
    BackoffState copy = stage2;
    CHECK(sample_backoff(copy, Protocol::CsmaCa, phy, rng) < 64);
  }
}

TEST_CASE("step_slot action table") {
  BackoffState st;
  st.counter = 5;
  CcaVerdict busy;
  busy.overall = true;
  CHECK(step_slot(st, busy) == SlotAction::Freeze);
  CHECK(st.counter == 5);  // freeze preserves the counter within the slot
  CcaVerdict idle;
  CHECK(step_slot(st, idle) == SlotAction::Decrement);
  st.counter = 0;
  CHECK(step_slot(st, idle) == SlotAction::Transmit);
  CHECK(step_slot(st, busy) == SlotAction::Freeze);
}

TEST_CASE("txop: single MPDU data duration matches the airtime formula") {
  PhyParams phy;
  TxQueue q{false, 1, false};
  const ChannelSet w20 = ChannelSet::make(0, 1, 0);
  FrameExchange fx = build_txop(0, 1, q, phy, w20, 1, 64, false, false);
  REQUIRE(fx.phases.size() == 4);
  CHECK(fx.phases[0].kind == FrameKind::Rts);
  CHECK(fx.phases[1].kind == FrameKind::Cts);
  CHECK(fx.phases[2].kind == FrameKind::Data);
  CHECK(fx.phases[3].kind == FrameKind::BlockAck);
  // 40 us PHY header + (288 + 12000) bits at 65 Mb/s, rounded up.
  CHECK(fx.phases[2].duration_ns == 229'047);
  CHECK(fx.phases[0].duration_ns == 46'667);
  CHECK(fx.phases[1].duration_ns == 44'667);
  CHECK(fx.total_airtime_ns ==
        46'667 + 44'667 + 229'047 + 44'667 + 3 * phy.sifs_ns);
  CHECK(fx.payload_bits() == 12'000);
}

TEST_CASE("txop airtime additivity holds exactly in integer ns") {
  PhyParams phy;
  for (int agg : {1, 7, 64}) {
    for (int count : {1, 2, 4, 8}) {
      TxQueue q{true, 0, false};
      FrameExchange fx = build_txop(0, 1, q, phy, ChannelSet::make(0, count, 0), 2,
                                    agg, false, false);
      SimTime sum = 0;
      for (const Phase& p : fx.phases) sum += p.duration_ns;
      sum += static_cast<SimTime>(fx.phases.size() - 1) * phy.sifs_ns;
      CHECK(fx.total_airtime_ns == sum);
      CHECK(fx.total_airtime_ns == exchange_airtime_ns(fx, phy));
    }
  }
}

TEST_CASE("aggregation: one 64-MPDU TXOP beats 64 single-MPDU TXOPs") {
  PhyParams phy;
  const ChannelSet w = ChannelSet::make(0, 1, 0);
  TxQueue q{true, 0, false};
  FrameExchange big = build_txop(0, 1, q, phy, w, 1, 64, false, false);
  FrameExchange small = build_txop(0, 1, q, phy, w, 1, 1, false, false);
  CHECK(big.payload_bits() == 64 * small.payload_bits());
  CHECK(big.total_airtime_ns < 64 * small.total_airtime_ns);
}

TEST_CASE("empty queue is an error") {
  PhyParams phy;
  TxQueue q{false, 0, false};
  CHECK_THROWS_AS(
      build_txop(0, 1, q, phy, ChannelSet::make(0, 1, 0), 1, 64, false, false),
      ConfigError);
}

TEST_CASE("piggybacking rides the reverse ACK in DATA and drops the ACK phase") {
  PhyParams phy;
  const ChannelSet w = ChannelSet::make(0, 1, 0);

  // Pending flag set: ack_bits ride in the DATA phase.
  TxQueue owing{true, 0, true};
  FrameExchange fx = build_txop(0, 1, owing, phy, w, 1, 1, true, false);
  CHECK(fx.phases[2].bits == phy.mac_header_bits + phy.mpdu_payload_bits + phy.ack_bits);
  CHECK_FALSE(owing.pending_piggyback_ack);

  // Reverse traffic queued: the standalone ACK phase disappears.
  TxQueue q{true, 0, false};
  FrameExchange no_ack = build_txop(0, 1, q, phy, w, 1, 1, true, true);
  REQUIRE(no_ack.phases.size() == 3);
  CHECK(no_ack.phases.back().kind == FrameKind::Data);

  // Piggyback disabled: four phases regardless.
  TxQueue q2{true, 0, true};
  FrameExchange plain = build_txop(0, 1, q2, phy, w, 1, 1, false, true);
  CHECK(plain.phases.size() == 4);
  CHECK(q2.pending_piggyback_ack);  // flag untouched when the feature is off
}

TEST_CASE("str_pair conditions") {
  PhyParams phy;
  const ChannelSet w = ChannelSet::make(0, 1, 0);
  Node ap;
  ap.id = "ap";
  ap.role = Role::Ap;
  ap.radio.str_capable = true;
  Node sta = ap;
  sta.id = "sta";
  sta.role = Role::Sta;
  TxQueue dl{true, 0, false};
  TxQueue ul{true, 0, false};

  // CSMA/CA without simultaneous expiry: no pairing.
  CHECK_FALSE(str_pair(ap, 0, sta, 1, dl, ul, false, Protocol::CsmaCa, phy, w, 1, 1, 64)
                  .has_value());
  // CSMA/CA with simultaneous expiry pairs.
  CHECK(str_pair(ap, 0, sta, 1, dl, ul, true, Protocol::CsmaCa, phy, w, 1, 1, 64)
            .has_value());
  // CSMA/ECA pairs on schedule knowledge alone.
  auto joint = str_pair(ap, 0, sta, 1, dl, ul, false, Protocol::CsmaEca, phy, w, 1, 1, 64);
  REQUIRE(joint.has_value());

  // Full-duplex accounting: both payloads delivered in one exchange.
  CHECK(joint->links.size() == 2);
  CHECK(joint->payload_bits() == 2 * 64 * phy.mpdu_payload_bits);
  // Overlapped DATA, sequential ACKs: RTS, CTS, DATA, ACK, ACK.
  REQUIRE(joint->phases.size() == 5);
  CHECK(joint->phases[2].dir == LinkDir::Bidir);
  CHECK(joint->phases[3].kind == FrameKind::BlockAck);
  CHECK(joint->phases[4].kind == FrameKind::BlockAck);

  // Missing capability or missing reverse traffic: no pairing.
  Node plain = sta;
  plain.radio.str_capable = false;
  CHECK_FALSE(str_pair(ap, 0, plain, 1, dl, ul, true, Protocol::CsmaEca, phy, w, 1, 1, 64)
                  .has_value());
  TxQueue empty{false, 0, false};
  CHECK_FALSE(str_pair(ap, 0, sta, 1, dl, empty, true, Protocol::CsmaEca, phy, w, 1, 1, 64)
                  .has_value());
}

TEST_CASE("joint exchange duration is driven by the slower direction") {
  PhyParams phy;
  const ChannelSet w = ChannelSet::make(0, 1, 0);
  Node ap;
  ap.id = "ap";
  ap.role = Role::Ap;
  ap.radio.str_capable = true;
  Node sta = ap;
  sta.role = Role::Sta;
  TxQueue dl{false, 64, false};
  TxQueue ul{false, 3, false};
  auto joint = str_pair(ap, 0, sta, 1, dl, ul, false, Protocol::CsmaEca, phy, w, 1, 1, 64);
  REQUIRE(joint.has_value());
  const std::int64_t down_bits = 64 * (phy.mac_header_bits + phy.mpdu_payload_bits);
  CHECK(joint->phases[2].duration_ns ==
        phy.phy_header_ns + bits_duration_ns(down_bits, data_rate_bps(phy, 1, 1)));
}
