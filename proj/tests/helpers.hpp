// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "hewsim/scenario.hpp"

namespace hewsim::test {

// One WLAN on a bonded channel: a saturated AP (downlink) or saturated
// stations (uplink), stations ringed 2 m around the AP.
struct SingleWlanOpts {
  int n_stas = 1;
  int width_channels = 1;
  int ap_antennas = 1;
  int sta_antennas = 1;
  int aggregation = 1;
  Protocol protocol = Protocol::CsmaCa;
  bool downlink = true;   // false: stations saturated toward the AP
  bool bidirectional = false;
  bool str = false;
  bool piggyback = false;
  int ofdma = 0;
  std::optional<MumimoConfig> mumimo{};
  SimTime duration_ns = 10 * kNsPerSec;
  double warmup_fraction = 0.1;
};

inline Scenario single_wlan(const SingleWlanOpts& o) {
  Scenario s;
  s.name = "single";
  s.duration_ns = o.duration_ns;
  s.warmup_fraction = o.warmup_fraction;
  s.seed = 1;
  s.protocol.protocol = o.protocol;
  s.protocol.aggregation = o.aggregation;
  s.protocol.str = o.str;
  s.protocol.piggyback = o.piggyback;
  s.protocol.ofdma = o.ofdma;
  s.protocol.mumimo = o.mumimo;
  if (o.str) s.radio_defaults.str_capable = true;

  Wlan w;
  w.id = "w";
  w.channels = ChannelSet::make(0, o.width_channels, 0);
  const bool ap_tx = o.downlink || o.bidirectional;
  w.ap = Node{"w.ap", Role::Ap, 0.0, 0.0, s.radio_defaults, o.ap_antennas,
              Traffic{ap_tx, 0.0}};
  const bool sta_tx = !o.downlink || o.bidirectional;
  for (int i = 0; i < o.n_stas; ++i) {
    const double angle = 2.0 * M_PI * static_cast<double>(i) /
                         static_cast<double>(std::max(o.n_stas, 1));
    w.stas.push_back(Node{"w.sta" + std::to_string(i + 1), Role::Sta,
                          2.0 * std::cos(angle), 2.0 * std::sin(angle),
                          s.radio_defaults, o.sta_antennas, Traffic{sta_tx, 0.0}});
  }
  s.wlans.push_back(std::move(w));
  return s;
}

}  // namespace hewsim::test
