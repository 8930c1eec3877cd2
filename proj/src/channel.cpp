// SPDX-License-Identifier: Apache-2.0
#include "hewsim/channel.hpp"

#include <algorithm>
#include <cmath>

namespace hewsim {

double path_loss_db(double distance_m, const PropagationModel& model) {
  if (distance_m <= 0.0) throw SimError("path_loss: distance must be positive");
  const double d = std::max(distance_m, 1.0);  // clamp at the reference distance
  return model.pl0_db + 10.0 * model.exponent * std::log10(d);
}

double antenna_gain_db(const AntennaPattern& pattern, double azimuth_deg) {
  if (pattern.omni()) return 0.0;
  const SectorPattern& s = *pattern.sector;
  double diff = std::fmod(std::fabs(azimuth_deg - s.center_deg), 360.0);
  if (diff > 180.0) diff = 360.0 - diff;
  if (diff <= s.beamwidth_deg / 2.0) return s.mainlobe_gain_db;
  return -s.backlobe_atten_db;
}

double received_power_dbm(const Transmission& tx, double rx_x, double rx_y, int ch,
                          const PropagationModel& model) {
  if (!tx.channels.contains(ch))
    throw SimError("received_power: channel " + std::to_string(ch) +
                   " not in the transmission's set");
  const double dx = rx_x - tx.x;
  const double dy = rx_y - tx.y;
  const double dist = std::sqrt(dx * dx + dy * dy);
  const double azimuth = std::atan2(dy, dx) * 180.0 / M_PI;
  return tx.per_channel_power_dbm() - path_loss_db(std::max(dist, 1e-9), model) +
         antenna_gain_db(tx.pattern, azimuth);
}

CcaVerdict cca_assess(const Node& node, int node_index, const ChannelSet& sensed,
                      std::span<const Transmission> active,
                      const PropagationModel& model) {
  CcaVerdict v;
  // Self-interference is cancelled only on STR-capable radios.
  bool own_tx_blocks = false;
  for (const Transmission& tx : active) {
    if (tx.tx_node == node_index && !node.radio.str_capable) own_tx_blocks = true;
  }
  const double threshold_mw = dbm_to_mw(node.radio.cca_threshold_dbm);
  for (int ch = sensed.first; ch <= sensed.last(); ++ch) {
    if (own_tx_blocks) {
      v.busy[ch] = true;
      v.overall = true;
      continue;
    }
    double sum_mw = 0.0;
    for (const Transmission& tx : active) {
      if (tx.tx_node == node_index) continue;
      if (!tx.channels.contains(ch)) continue;
      sum_mw += dbm_to_mw(received_power_dbm(tx, node.x, node.y, ch, model));
    }
    if (sum_mw >= threshold_mw) {
      v.busy[ch] = true;
      v.overall = true;
    }
  }
  return v;
}

ChannelSet dbca_assess(const ChannelSet& configured, const ChannelIdleView& view,
                       SimTime t, const PhyParams& phy) {
  const SimTime window = phy.slot_ns + phy.sifs_ns;  // PIFS-equivalent
  if (view.busy_now[configured.primary])
    throw SimError("dbca_assess: primary channel busy at transmission start");
  auto idle_long_enough = [&](int ch) {
    return !view.busy_now[ch] && t - view.idle_since[ch] >= window;
  };
  for (int count = configured.count; count >= 1; count /= 2) {
    const int lo = std::max(configured.first, configured.primary - count + 1);
    const int hi = std::min(configured.primary, configured.last() - count + 1);
    for (int a = lo; a <= hi; ++a) {
      bool ok = true;
      for (int ch = a; ch < a + count && ok; ++ch) ok = idle_long_enough(ch);
      if (ok) return ChannelSet::make(a, count, configured.primary);
    }
  }
  // The primary is idle now but not for the whole window yet.
  return ChannelSet::make(configured.primary, 1, configured.primary);
}

namespace {

bool overlaps(const Transmission& a, const Transmission& b) {
  return a.id != b.id && a.start < b.end && b.start < a.end &&
         a.channels.intersects(b.channels);
}

// Worst-case concurrent interference on one channel at a receiver over the
// whole frame: interference is piecewise constant between transmission
// boundaries, so evaluating the sum at each overlapping start covers every
// piece's maximum.
double max_interference_mw(const Transmission& victim,
                           std::span<const Transmission> context, double rx_x,
                           double rx_y, int ch, const PropagationModel& model) {
  double worst = 0.0;
  std::vector<SimTime> points{victim.start};
  for (const Transmission& other : context) {
    if (!overlaps(victim, other) || !other.channels.contains(ch)) continue;
    if (other.start > victim.start) points.push_back(other.start);
  }
  for (SimTime t : points) {
    double sum = 0.0;
    for (const Transmission& other : context) {
      if (!overlaps(victim, other) || !other.channels.contains(ch)) continue;
      if (other.start <= t && t < other.end)
        sum += dbm_to_mw(received_power_dbm(other, rx_x, rx_y, ch, model));
    }
    worst = std::max(worst, sum);
  }
  return worst;
}

}  // namespace

std::vector<ReceptionOutcome> resolve_receptions(
    std::span<const Transmission> ended, std::span<const Transmission> context,
    std::span<const Node> nodes, const PropagationModel& model) {
  std::vector<ReceptionOutcome> out;
  const double noise_mw = dbm_to_mw(model.noise_floor_dbm);
  for (const Transmission& tx : ended) {
    for (int rx : tx.receivers) {
      const Node& rx_node = nodes[static_cast<std::size_t>(rx)];
      bool ok = true;
      for (int ch = tx.channels.first; ch <= tx.channels.last() && ok; ++ch) {
        const double sig_mw =
            dbm_to_mw(received_power_dbm(tx, rx_node.x, rx_node.y, ch, model));
        if (sig_mw <= noise_mw) {
          ok = false;  // out of data range
          break;
        }
        const double interf_mw =
            max_interference_mw(tx, context, rx_node.x, rx_node.y, ch, model);
        if (!model.capture_threshold_db.has_value()) {
          // Pure collision model: any audible overlap fails the frame.
          if (interf_mw > noise_mw) ok = false;
        } else {
          const double sinr = sig_mw / (noise_mw + interf_mw);
          const double threshold = std::pow(10.0, *model.capture_threshold_db / 10.0);
          if (sinr < threshold) ok = false;
        }
      }
      out.push_back({tx.id, rx, ok});
    }
  }
  return out;
}

}  // namespace hewsim
