// SPDX-License-Identifier: Apache-2.0
#include "hewsim/trace.hpp"

#include <sstream>

namespace hewsim {

std::string TraceEvent::format() const {
  std::ostringstream out;
  out << t << " ";
  switch (type) {
    case Type::TxStart:
      out << "tx_start node=" << node_id << " wlan=" << wlan_id
          << " exch=" << exchange << " channels=" << channels.to_string()
          << " control_bits=" << control_bits << " dur=" << duration_ns;
      break;
    case Type::TxEnd:
      out << "tx_end node=" << node_id << " wlan=" << wlan_id
          << " exch=" << exchange << " channels=" << channels.to_string()
          << " outcome=" << (success ? "success" : "collision")
          << " delivered=" << delivered_bits;
      break;
    case Type::Backoff:
      out << "backoff node=" << node_id << " counter=" << counter
          << " mode=" << (deterministic ? "det" : "rand");
      break;
    case Type::Drop:
      out << "drop node=" << node_id << " wlan=" << wlan_id;
      break;
  }
  return out.str();
}

}  // namespace hewsim
