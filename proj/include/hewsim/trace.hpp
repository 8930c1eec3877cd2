// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "hewsim/channelset.hpp"
#include "hewsim/common.hpp"

namespace hewsim {

// One line of the event trace used for invariant auditing.
struct TraceEvent {
  enum class Type { TxStart, TxEnd, Backoff, Drop };
  Type type = Type::TxStart;
  SimTime t = 0;
  int node = -1;
  std::string node_id;
  std::string wlan_id;
  ChannelSet channels{};
  std::string exchange;          // su|ofdma|mumimo_dl|mumimo_ul|joint|sounding
  std::int64_t control_bits = 0; // RTS/RTS'/RTS'' size of the exchange
  SimTime duration_ns = 0;
  bool success = false;
  std::int64_t delivered_bits = 0;
  int counter = 0;   // Backoff: sampled value
  bool deterministic = false;

  std::string format() const;
};

using TraceSink = std::function<void(const TraceEvent&)>;

}  // namespace hewsim
