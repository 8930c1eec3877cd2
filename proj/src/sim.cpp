// SPDX-License-Identifier: Apache-2.0
#include "hewsim/sim.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "hewsim/channel.hpp"
#include "hewsim/engine.hpp"
#include "hewsim/mac.hpp"
#include "hewsim/multiuser.hpp"

namespace hewsim {

namespace {

// Contention state machine phases. A node's frozen counter drops by exactly
// one when the busy period completes (at the DIFS re-arm boundary): busy
// periods count as one virtual slot, which is what lets deterministic-backoff
// schedules pack back-to-back TXOPs.
enum class MacPhase : std::uint8_t {
  Idle,          // nothing queued
  Defer,         // medium busy
  DifsWait,      // medium idle, waiting out DIFS
  Countdown,     // counting idle slots
  PendingTx,     // counter hit zero, TxStart committed
  Transmitting,  // own exchange on the air
};

struct PerChannel {
  double sum_mw = 0.0;
  bool busy = false;
  SimTime busy_since = 0;
  SimTime idle_since = 0;
};

struct NodeRuntime {
  MacPhase phase = MacPhase::Idle;
  BackoffState bo{};
  int retry = 0;
  bool medium_busy = false;
  bool charge_on_resume = false;
  EventQueue::Handle timer = 0;
  bool has_timer = false;
  SimTime countdown_start = 0;
  SimTime pending_tx_time = -1;

  std::vector<int> peers;       // destination node indices
  std::vector<TxQueue> queues;  // parallel to peers
  int rr_cursor = 0;

  SimTime arrival_period = 0;
  int arrival_peer = 0;

  std::unique_ptr<RandomStream> bo_rng;

  // AP-side multi-user state
  RoundRobinAllocator ofdma;
  std::vector<CsiRecord> csi;           // one per associated station
  SimTime last_sounding = -1;
  std::map<int, SimTime> ul_reported;   // station -> last backlog report

  std::array<PerChannel, kMaxBasicChannels> ch{};
};

struct InflightExchange {
  FrameExchange fx;
  std::vector<int> initiators;  // 1, or 2 for a joint STR exchange
  bool sounding = false;
  bool attempt_counted = false;
  const char* kind = "su";
};

}  // namespace

struct Simulation::Impl {
  Scenario scen;
  std::uint64_t seed;
  TraceSink trace;

  std::vector<Node> nodes;
  std::vector<int> node_wlan;
  std::vector<int> wlan_ap;
  std::vector<std::vector<int>> wlan_stas;
  std::vector<ChannelSet> node_cset;

  EventQueue queue;
  MetricsRaw metrics;
  SimTime warmup = 0;
  SimTime t_end = 0;

  std::vector<Transmission> active;
  std::vector<Transmission> recent;  // ended, retained while overlapping actives
  std::map<int, InflightExchange> inflight;
  int next_tx_id = 0;

  std::array<int, kMaxBasicChannels> occ_count{};
  std::array<SimTime, kMaxBasicChannels> occ_since{};

  std::vector<NodeRuntime> rt;

  Impl(const Scenario& s, std::uint64_t sd, TraceSink tr)
      : scen(s), seed(sd), trace(std::move(tr)) {
    auto violations = validate(scen);
    if (!violations.empty())
      throw ConfigError("invalid scenario: " + violations.front());
    flatten();
  }

  const PhyParams& phy() const { return scen.phy; }
  const ProtocolConfig& proto() const { return scen.protocol; }
  const PropagationModel& prop() const { return scen.propagation; }

  void flatten() {
    for (std::size_t w = 0; w < scen.wlans.size(); ++w) {
      const Wlan& wl = scen.wlans[w];
      wlan_ap.push_back(static_cast<int>(nodes.size()));
      wlan_stas.emplace_back();
      nodes.push_back(wl.ap);
      node_wlan.push_back(static_cast<int>(w));
      node_cset.push_back(wl.channels);
      for (const Node& sta : wl.stas) {
        wlan_stas[w].push_back(static_cast<int>(nodes.size()));
        nodes.push_back(sta);
        node_wlan.push_back(static_cast<int>(w));
        node_cset.push_back(wl.channels);
      }
    }
    metrics.node.resize(nodes.size());
    metrics.wlan.resize(scen.wlans.size());
    rt.resize(nodes.size());

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      NodeRuntime& n = rt[i];
      n.bo.cw = phy().cw_min;
      n.bo_rng = std::make_unique<RandomStream>(seed, nodes[i].id, "backoff");
      const int w = node_wlan[i];
      if (nodes[i].role == Role::Ap) {
        for (int sta : wlan_stas[static_cast<std::size_t>(w)]) {
          n.peers.push_back(sta);
          n.queues.push_back(TxQueue{nodes[i].traffic.saturated, 0, false});
        }
      } else {
        n.peers.push_back(wlan_ap[static_cast<std::size_t>(w)]);
        n.queues.push_back(TxQueue{nodes[i].traffic.saturated, 0, false});
      }
      if (!nodes[i].traffic.saturated && nodes[i].traffic.offered_bps > 0.0) {
        n.arrival_period = static_cast<SimTime>(std::llround(
            static_cast<double>(phy().mpdu_payload_bits) * 1e9 /
            nodes[i].traffic.offered_bps));
        if (n.arrival_period < 1) n.arrival_period = 1;
      }
    }

    // Synthetic CSI: seeded per-station quality and spatial signature; the
    // signatures exist only to exercise grouping.
    if (proto().mumimo.has_value()) {
      for (std::size_t w = 0; w < scen.wlans.size(); ++w) {
        NodeRuntime& ap = rt[static_cast<std::size_t>(wlan_ap[w])];
        const int dim = nodes[static_cast<std::size_t>(wlan_ap[w])].antennas;
        for (int sta : wlan_stas[w]) {
          RandomStream rng(seed, nodes[static_cast<std::size_t>(sta)].id, "csi");
          CsiRecord rec;
          rec.node = sta;
          rec.sounded_at = -1;
          rec.quality = 0.5 + rng.uniform_unit();
          rec.signature.resize(static_cast<std::size_t>(dim));
          double norm = 0.0;
          for (double& v : rec.signature) {
            v = 2.0 * rng.uniform_unit() - 1.0;
            norm += v * v;
          }
          norm = std::sqrt(norm);
          if (norm <= 0.0) {
            rec.signature[0] = 1.0;
          } else {
            for (double& v : rec.signature) v /= norm;
          }
          ap.csi.push_back(std::move(rec));
        }
      }
    }
  }

  // --- tallies ---------------------------------------------------------

  bool in_window(SimTime t) const { return t >= warmup && t <= t_end; }

  void tally_backoff_slots(int node, std::int64_t slots, SimTime t) {
    if (slots > 0 && t >= warmup)
      metrics.node[static_cast<std::size_t>(node)].backoff_slots += slots;
  }

  SimTime clip_to_window(SimTime start, SimTime end) const {
    const SimTime lo = std::max(start, warmup);
    const SimTime hi = std::min(end, t_end);
    return std::max<SimTime>(0, hi - lo);
  }

  // --- channel occupancy ---------------------------------------------

  void register_tx(const Transmission& tx) {
    active.push_back(tx);
    for (int ch = tx.channels.first; ch <= tx.channels.last(); ++ch) {
      if (occ_count[ch]++ == 0) occ_since[ch] = tx.start;
    }
    refresh_views(tx.channels, tx.start);
  }

  void unregister_tx(int tx_id, SimTime t) {
    auto it = std::find_if(active.begin(), active.end(),
                           [&](const Transmission& a) { return a.id == tx_id; });
    if (it == active.end()) throw SimError("unregister: unknown transmission");
    Transmission ended = *it;
    active.erase(it);
    recent.push_back(ended);
    for (int ch = ended.channels.first; ch <= ended.channels.last(); ++ch) {
      if (--occ_count[ch] == 0)
        metrics.channel_busy_ns[ch] += clip_to_window(occ_since[ch], t);
    }
    refresh_views(ended.channels, t);
    prune_recent();
  }

  void prune_recent() {
    SimTime min_start = t_end + 1;
    for (const Transmission& a : active) min_start = std::min(min_start, a.start);
    std::erase_if(recent, [&](const Transmission& r) { return r.end <= min_start; });
  }

  // Recompute interference sums on the affected channels for every node and
  // fire the MAC medium transitions. Iteration order is fixed, so sums are
  // bit-reproducible.
  void refresh_views(const ChannelSet& affected, SimTime t) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      NodeRuntime& n = rt[i];
      const ChannelSet& cset = node_cset[i];
      if (!cset.intersects(affected)) continue;
      const double threshold_mw = dbm_to_mw(nodes[i].radio.cca_threshold_dbm);
      for (int ch = std::max(cset.first, affected.first);
           ch <= std::min(cset.last(), affected.last()); ++ch) {
        double sum = 0.0;
        for (const Transmission& tx : active) {
          if (tx.tx_node == static_cast<int>(i)) continue;
          if (!tx.channels.contains(ch)) continue;
          sum += dbm_to_mw(received_power_dbm(tx, nodes[i].x, nodes[i].y, ch, prop()));
        }
        PerChannel& pc = n.ch[ch];
        pc.sum_mw = sum;
        const bool now_busy = sum >= threshold_mw;
        if (now_busy && !pc.busy) pc.busy_since = t;
        if (!now_busy && pc.busy) pc.idle_since = t;
        pc.busy = now_busy;
      }
      bool busy = false;
      for (int ch = cset.first; ch <= cset.last(); ++ch) busy |= n.ch[ch].busy;
      if (busy != n.medium_busy) {
        n.medium_busy = busy;
        if (busy)
          on_medium_busy(static_cast<int>(i), t);
        else
          on_medium_idle(static_cast<int>(i), t);
      }
    }
  }

  // --- MAC state machine ----------------------------------------------

  void cancel_timer(NodeRuntime& n) {
    if (n.has_timer) {
      queue.cancel(n.timer);
      n.has_timer = false;
    }
  }

  void enter_contention(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (!has_traffic(node)) {
      n.phase = MacPhase::Idle;
      return;
    }
    const int counter = sample_backoff(n.bo, proto().protocol, phy(), *n.bo_rng);
    if (trace) {
      TraceEvent ev;
      ev.type = TraceEvent::Type::Backoff;
      ev.t = t;
      ev.node = node;
      ev.node_id = nodes[static_cast<std::size_t>(node)].id;
      ev.counter = counter;
      ev.deterministic = n.bo.mode == BackoffMode::Deterministic;
      trace(ev);
    }
    n.charge_on_resume = false;
    if (n.medium_busy) {
      n.phase = MacPhase::Defer;
      n.charge_on_resume = true;  // the ongoing busy period is a virtual slot
    } else {
      arm_difs(node, t);
    }
  }

  void arm_difs(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    n.phase = MacPhase::DifsWait;
    n.timer = queue.schedule(t + phy().difs_ns, EventKind::TimerExpiry, node,
                             n.charge_on_resume ? 1 : 0);
    n.has_timer = true;
  }

  void on_medium_busy(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    switch (n.phase) {
      case MacPhase::DifsWait:
        cancel_timer(n);
        n.phase = MacPhase::Defer;
        n.charge_on_resume = true;
        break;
      case MacPhase::Countdown: {
        const std::int64_t elapsed = (t - n.countdown_start) / phy().slot_ns;
        const std::int64_t used = std::min<std::int64_t>(elapsed, n.bo.counter);
        n.bo.counter -= static_cast<int>(used);
        tally_backoff_slots(node, used, t);
        cancel_timer(n);
        n.phase = MacPhase::Defer;
        n.charge_on_resume = true;
        break;
      }
      default:
        break;  // Idle, Defer, PendingTx, Transmitting: nothing to freeze
    }
  }

  void on_medium_idle(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (n.phase == MacPhase::Defer) arm_difs(node, t);
  }

  void on_resume_boundary(int node, bool charge, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (n.phase != MacPhase::DifsWait) return;
    n.has_timer = false;
    n.charge_on_resume = false;
    if (charge && n.bo.counter > 0) n.bo.counter -= 1;
    if (n.bo.counter == 0) {
      commit_tx(node, t);
    } else {
      n.phase = MacPhase::Countdown;
      n.countdown_start = t;
      n.timer = queue.schedule(t + static_cast<SimTime>(n.bo.counter) * phy().slot_ns,
                               EventKind::SlotBoundary, node);
      n.has_timer = true;
    }
  }

  void on_slot_boundary(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (n.phase != MacPhase::Countdown) return;
    n.has_timer = false;
    tally_backoff_slots(node, n.bo.counter, t);
    n.bo.counter = 0;
    commit_tx(node, t);
  }

  void commit_tx(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    n.phase = MacPhase::PendingTx;
    n.pending_tx_time = t;
    n.timer = queue.schedule(t, EventKind::TxStart, node);
    n.has_timer = true;
  }

  // --- traffic ----------------------------------------------------------

  bool has_traffic(int node) const {
    const NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    for (const TxQueue& q : n.queues)
      if (!q.empty()) return true;
    if (nodes[static_cast<std::size_t>(node)].role == Role::Ap &&
        proto().mumimo.has_value() && !n.ul_reported.empty())
      return true;
    return false;
  }

  void on_traffic_arrival(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (!n.queues.empty()) {
      n.queues[static_cast<std::size_t>(n.arrival_peer)].backlog_mpdus += 1;
      n.arrival_peer = (n.arrival_peer + 1) % static_cast<int>(n.queues.size());
    }
    queue.schedule(t + n.arrival_period, EventKind::TrafficArrival, node);
    if (n.phase == MacPhase::Idle) enter_contention(node, t);
  }

  // --- exchange decision and launch -------------------------------------

  ChannelIdleView idle_view(int node, SimTime t) const {
    const NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    ChannelIdleView v;
    for (int ch = 0; ch < kMaxBasicChannels; ++ch) {
      // A channel that went busy exactly now (same-instant TxStart) is still
      // idle for this decision: simultaneous expiries must collide, not
      // serialize.
      v.busy_now[ch] = n.ch[ch].busy && n.ch[ch].busy_since < t;
      v.idle_since[ch] = n.ch[ch].idle_since;
    }
    return v;
  }

  static ChannelSet cap_width(const ChannelSet& w, int cap) {
    int count = std::min(w.count, cap);
    const int lo = std::max(w.first, w.primary - count + 1);
    return ChannelSet::make(std::min(lo, w.primary), count, w.primary);
  }

  int pick_su_peer(NodeRuntime& n) {
    const int k = static_cast<int>(n.peers.size());
    for (int i = 0; i < k; ++i) {
      const int idx = (n.rr_cursor + i) % k;
      if (!n.queues[static_cast<std::size_t>(idx)].empty()) {
        n.rr_cursor = (idx + 1) % k;
        return idx;
      }
    }
    return -1;
  }

  int queue_index(int node, int peer) const {
    const NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    for (std::size_t i = 0; i < n.peers.size(); ++i)
      if (n.peers[i] == peer) return static_cast<int>(i);
    return -1;
  }

  int su_streams(int a, int b) const {
    return std::min(nodes[static_cast<std::size_t>(a)].antennas,
                    nodes[static_cast<std::size_t>(b)].antennas);
  }

  bool csi_stale(const NodeRuntime& ap, SimTime t) const {
    if (ap.last_sounding < 0) return true;
    if (proto().sounding_interval_ns <= 0) return false;
    return t - ap.last_sounding >= proto().sounding_interval_ns;
  }

  bool report_fresh(SimTime reported_at, SimTime t) const {
    if (proto().sounding_interval_ns <= 0) return true;
    return t - reported_at < proto().sounding_interval_ns;
  }

  void on_tx_start(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    if (n.phase != MacPhase::PendingTx) return;
    n.has_timer = false;
    n.pending_tx_time = -1;

    if (!has_traffic(node)) {
      n.phase = MacPhase::Idle;
      return;
    }

    const Node& me = nodes[static_cast<std::size_t>(node)];
    const bool is_ap = me.role == Role::Ap;
    const int agg = std::min(proto().aggregation, phy().max_aggregation);

    const ChannelSet width = dbca_assess(node_cset[static_cast<std::size_t>(node)],
                                         idle_view(node, t), t, phy());

    if (is_ap && proto().mumimo.has_value() && csi_stale(n, t)) {
      launch_sounding(node, t);
      return;
    }

    bool have_dl = false;
    for (const TxQueue& q : n.queues)
      if (!q.empty()) have_dl = true;

    if (is_ap && proto().mumimo.has_value() && have_dl) {
      if (launch_dl_mumimo(node, width, t, agg)) return;
    }
    if (is_ap && proto().mumimo.has_value() && !have_dl) {
      if (launch_ul_mumimo(node, width, t, agg)) return;
      n.phase = MacPhase::Idle;
      return;
    }
    if (is_ap && proto().ofdma > 0 && have_dl) {
      launch_ofdma(node, width, t, agg);
      return;
    }
    launch_su(node, width, t, agg);
  }

  void launch_sounding(int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    const int w = node_wlan[static_cast<std::size_t>(node)];
    const int n_stas =
        static_cast<int>(wlan_stas[static_cast<std::size_t>(w)].size());
    InflightExchange exch;
    exch.initiators = {node};
    exch.sounding = true;
    exch.kind = "sounding";
    Phase p{FrameKind::Sounding, LinkDir::Bidir, node_cset[static_cast<std::size_t>(node)],
            sounding_overhead_ns(std::max(n_stas, 1), phy()),
            wlan_stas[static_cast<std::size_t>(w)], 0};
    exch.fx.phases.push_back(p);
    exch.fx.total_airtime_ns = p.duration_ns;
    start_exchange(std::move(exch), node, t);
  }

  bool launch_dl_mumimo(int node, const ChannelSet& width, SimTime t, int agg) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    const MumimoConfig& cfg = *proto().mumimo;

    std::vector<CsiRecord> fresh;
    for (const CsiRecord& rec : n.csi) {
      if (rec.sounded_at < 0 || !report_fresh(rec.sounded_at, t)) continue;
      const int qi = queue_index(node, rec.node);
      if (qi < 0 || n.queues[static_cast<std::size_t>(qi)].empty()) continue;
      if (nodes[static_cast<std::size_t>(rec.node)].antennas < cfg.z) continue;
      fresh.push_back(rec);
    }
    if (fresh.empty()) return false;

    const int y = std::min<int>(cfg.y, static_cast<int>(fresh.size()));
    MumimoConfig eff{y * cfg.z, y, cfg.z};
    std::vector<int> members = select_group(fresh, y);

    std::vector<MuPeer> peers;
    for (int sta : members) {
      const int qi = queue_index(node, sta);
      MuPeer p;
      p.node = sta;
      p.n_mpdus = n.queues[static_cast<std::size_t>(qi)].available(agg);
      p.streams = cfg.z;
      p.antennas = nodes[static_cast<std::size_t>(sta)].antennas;
      peers.push_back(p);
    }
    InflightExchange exch;
    exch.initiators = {node};
    exch.kind = "mumimo_dl";
    exch.fx = build_dl_mumimo(node, eff, peers, width, phy(),
                              nodes[static_cast<std::size_t>(node)].antennas,
                              proto().mu_stream_penalty);
    start_exchange(std::move(exch), node, t);
    return true;
  }

  bool launch_ul_mumimo(int node, const ChannelSet& width, SimTime t, int agg) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    std::vector<MuPeer> group;
    const int cap = std::min(proto().mumimo->y,
                             nodes[static_cast<std::size_t>(node)].antennas);
    for (const auto& [sta, reported_at] : n.ul_reported) {
      if (!report_fresh(reported_at, t)) continue;
      if (static_cast<int>(group.size()) >= cap) break;
      MuPeer p;
      p.node = sta;
      const NodeRuntime& sn = rt[static_cast<std::size_t>(sta)];
      p.n_mpdus = sn.queues.empty() ? 0 : sn.queues[0].available(agg);
      p.streams = 1;
      p.antennas = nodes[static_cast<std::size_t>(sta)].antennas;
      group.push_back(p);
    }
    if (group.empty()) return false;
    InflightExchange exch;
    exch.initiators = {node};
    exch.kind = "mumimo_ul";
    exch.fx = build_ul_mumimo(node, group, width, phy(),
                              nodes[static_cast<std::size_t>(node)].antennas);
    start_exchange(std::move(exch), node, t);
    return true;
  }

  void launch_ofdma(int node, const ChannelSet& width, SimTime t, int agg) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    const ChannelSet used = cap_width(width, proto().ofdma);
    std::vector<int> candidates;
    for (std::size_t i = 0; i < n.peers.size(); ++i)
      if (!n.queues[i].empty()) candidates.push_back(n.peers[i]);
    OfdmaAllocation alloc = n.ofdma.allocate(used, candidates);
    std::vector<MuPeer> peers;
    for (int sta : alloc.stations()) {
      const int qi = queue_index(node, sta);
      MuPeer p;
      p.node = sta;
      p.n_mpdus = n.queues[static_cast<std::size_t>(qi)].available(agg);
      p.streams = su_streams(node, sta);
      p.antennas = nodes[static_cast<std::size_t>(sta)].antennas;
      peers.push_back(p);
    }
    InflightExchange exch;
    exch.initiators = {node};
    exch.kind = "ofdma";
    exch.fx = build_ofdma_exchange(node, alloc, used, peers, phy());
    start_exchange(std::move(exch), node, t);
  }

  void launch_su(int node, const ChannelSet& width, SimTime t, int agg) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    const int qi = pick_su_peer(n);
    if (qi < 0) {
      n.phase = MacPhase::Idle;
      return;
    }
    const int peer = n.peers[static_cast<std::size_t>(qi)];
    NodeRuntime& pn = rt[static_cast<std::size_t>(peer)];
    const int rev_qi = queue_index(peer, node);
    TxQueue* reverse = rev_qi >= 0 ? &pn.queues[static_cast<std::size_t>(rev_qi)] : nullptr;

    // Full-duplex pairing: CSMA/CA only on same-slot expiry, CSMA/ECA by
    // schedule alignment whenever the peer has reverse traffic.
    if (proto().str && reverse != nullptr && pn.phase != MacPhase::Transmitting) {
      const bool same_slot =
          pn.phase == MacPhase::PendingTx && pn.pending_tx_time == t;
      const bool i_am_ap = nodes[static_cast<std::size_t>(node)].role == Role::Ap;
      const int ap_node = i_am_ap ? node : peer;
      const int sta_node = i_am_ap ? peer : node;
      TxQueue& dl = i_am_ap ? n.queues[static_cast<std::size_t>(qi)] : *reverse;
      TxQueue& ul = i_am_ap ? *reverse : n.queues[static_cast<std::size_t>(qi)];
      auto joint = str_pair(nodes[static_cast<std::size_t>(ap_node)], ap_node,
                            nodes[static_cast<std::size_t>(sta_node)], sta_node, dl, ul,
                            same_slot, proto().protocol, phy(), width,
                            su_streams(ap_node, sta_node), su_streams(sta_node, ap_node),
                            agg);
      if (joint.has_value()) {
        cancel_timer(pn);
        pn.phase = MacPhase::Transmitting;
        pn.pending_tx_time = -1;
        InflightExchange exch;
        exch.initiators = {node, peer};
        exch.kind = "joint";
        exch.fx = std::move(*joint);
        start_exchange(std::move(exch), node, t);
        return;
      }
    }

    TxQueue& q = n.queues[static_cast<std::size_t>(qi)];
    const bool reverse_queued = reverse != nullptr && !reverse->empty();
    InflightExchange exch;
    exch.initiators = {node};
    exch.kind = "su";
    exch.fx = build_txop(node, peer, q, phy(), width, su_streams(node, peer), agg,
                         proto().piggyback, reverse_queued);
    start_exchange(std::move(exch), node, t);
  }

  void start_exchange(InflightExchange exch, int node, SimTime t) {
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    n.phase = MacPhase::Transmitting;

    Transmission tx;
    tx.id = next_tx_id++;
    tx.tx_node = node;
    tx.channels = exch.fx.phases.front().channels;
    tx.start = t;
    tx.end = t + exch.fx.total_airtime_ns;
    tx.total_power_dbm = nodes[static_cast<std::size_t>(node)].radio.tx_power_dbm;
    tx.pattern = nodes[static_cast<std::size_t>(node)].radio.pattern;
    tx.x = nodes[static_cast<std::size_t>(node)].x;
    tx.y = nodes[static_cast<std::size_t>(node)].y;
    for (const ExchangeLink& l : exch.fx.links) {
      if (std::find(tx.receivers.begin(), tx.receivers.end(), l.dst) ==
          tx.receivers.end())
        tx.receivers.push_back(l.dst);
    }

    exch.attempt_counted = !exch.sounding && in_window(t);
    if (exch.attempt_counted) {
      for (int ini : exch.initiators) {
        metrics.node[static_cast<std::size_t>(ini)].attempts += 1;
        metrics.wlan[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(ini)])]
            .attempts += 1;
      }
    }

    if (trace) {
      TraceEvent ev;
      ev.type = TraceEvent::Type::TxStart;
      ev.t = t;
      ev.node = node;
      ev.node_id = nodes[static_cast<std::size_t>(node)].id;
      ev.wlan_id = scen.wlans[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(node)])].id;
      ev.channels = tx.channels;
      ev.exchange = exch.kind;
      ev.control_bits = exch.fx.control_bits();
      ev.duration_ns = exch.fx.total_airtime_ns;
      trace(ev);
    }

    queue.schedule(tx.end, EventKind::TxEnd, tx.id);
    inflight.emplace(tx.id, std::move(exch));
    register_tx(tx);
  }

  // --- exchange resolution ----------------------------------------------

  void on_tx_end(int tx_id, SimTime t) {
    auto it = inflight.find(tx_id);
    if (it == inflight.end()) throw SimError("tx_end: unknown exchange");
    InflightExchange exch = std::move(it->second);
    inflight.erase(it);

    auto atx = std::find_if(active.begin(), active.end(),
                            [&](const Transmission& a) { return a.id == tx_id; });
    if (atx == active.end()) throw SimError("tx_end: transmission not active");
    const Transmission ended_tx = *atx;

    std::vector<Transmission> context;
    context.reserve(active.size() + recent.size());
    context.insert(context.end(), active.begin(), active.end());
    context.insert(context.end(), recent.begin(), recent.end());

    unregister_tx(tx_id, t);

    if (exch.sounding) {
      finish_sounding(exch, ended_tx, t);
      return;
    }

    const std::vector<Transmission> ended{ended_tx};
    const auto outcomes = resolve_receptions(ended, context, nodes, prop());
    auto rx_ok = [&](int dst) {
      for (const ReceptionOutcome& o : outcomes)
        if (o.rx_node == dst) return o.success;
      return false;
    };

    std::int64_t delivered = 0;
    bool all_ok = true;
    for (const ExchangeLink& l : exch.fx.links) {
      const bool ok = rx_ok(l.dst);
      all_ok = all_ok && ok;
      if (ok) {
        const int qi = queue_index(l.src, l.dst);
        if (qi >= 0)
          rt[static_cast<std::size_t>(l.src)].queues[static_cast<std::size_t>(qi)].consume(l.n_mpdus);
        if (exch.attempt_counted && in_window(t)) {
          metrics.node[static_cast<std::size_t>(l.src)].delivered_bits += l.payload_bits;
          metrics.wlan[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(l.src)])]
              .delivered_bits += l.payload_bits;
          metrics.exchange_delivered_bits += l.payload_bits;
          delivered += l.payload_bits;
        }
      }
    }

    // Piggybacking bookkeeping: when this exchange omitted its trailing ACK,
    // the receiver now owes one on its next reverse DATA.
    if (proto().piggyback && all_ok && !exch.fx.links.empty() &&
        exch.fx.phases.back().kind == FrameKind::Data) {
      const ExchangeLink& head = exch.fx.links.front();
      const int rev_qi = queue_index(head.dst, head.src);
      if (rev_qi >= 0)
        rt[static_cast<std::size_t>(head.dst)].queues[static_cast<std::size_t>(rev_qi)]
            .pending_piggyback_ack = true;
    }

    // Participating stations report uplink backlog in their headers; a
    // report can wake an otherwise idle AP to coordinate uplink MU-MIMO.
    if (all_ok) {
      for (const ExchangeLink& l : exch.fx.links) {
        for (int sta : {l.src, l.dst}) {
          if (nodes[static_cast<std::size_t>(sta)].role != Role::Sta) continue;
          const NodeRuntime& sn = rt[static_cast<std::size_t>(sta)];
          if (sn.queues.empty() || sn.queues[0].empty()) continue;
          const int ap = wlan_ap[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(sta)])];
          NodeRuntime& apn = rt[static_cast<std::size_t>(ap)];
          apn.ul_reported[sta] = t;
          if (proto().mumimo.has_value() && apn.phase == MacPhase::Idle &&
              std::find(exch.initiators.begin(), exch.initiators.end(), ap) ==
                  exch.initiators.end())
            enter_contention(ap, t);
        }
      }
    }

    for (int ini : exch.initiators) {
      NodeRuntime& n = rt[static_cast<std::size_t>(ini)];
      bool own_ok = true;
      for (const ExchangeLink& l : exch.fx.links)
        if (l.src == ini && !rx_ok(l.dst)) own_ok = false;
      if (own_ok) {
        n.retry = 0;
        record_success(n.bo, phy());
        if (exch.attempt_counted && in_window(t)) {
          metrics.node[static_cast<std::size_t>(ini)].successes += 1;
          metrics.wlan[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(ini)])]
              .successes += 1;
        }
      } else {
        n.retry += 1;
        if (exch.attempt_counted && in_window(t)) {
          metrics.node[static_cast<std::size_t>(ini)].collisions += 1;
          metrics.wlan[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(ini)])]
              .collisions += 1;
        }
        if (n.retry > proto().retry_limit) {
          // Drop the burst and start over.
          for (const ExchangeLink& l : exch.fx.links) {
            if (l.src != ini) continue;
            const int qi = queue_index(l.src, l.dst);
            if (qi >= 0)
              rt[static_cast<std::size_t>(l.src)].queues[static_cast<std::size_t>(qi)]
                  .consume(l.n_mpdus);
            if (in_window(t))
              metrics.node[static_cast<std::size_t>(ini)].drops += l.n_mpdus;
          }
          n.retry = 0;
          reset_after_drop(n.bo, phy());
          if (trace) {
            TraceEvent ev;
            ev.type = TraceEvent::Type::Drop;
            ev.t = t;
            ev.node = ini;
            ev.node_id = nodes[static_cast<std::size_t>(ini)].id;
            trace(ev);
          }
        } else {
          record_collision(n.bo, phy());
        }
      }
      // Airtime of a successful exchange is attributed to the exchange owner.
      if (own_ok && ini == exch.initiators.front()) {
        const SimTime span = clip_to_window(ended_tx.start, ended_tx.end);
        metrics.node[static_cast<std::size_t>(ini)].airtime_ns += span;
        metrics.wlan[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(ini)])]
            .airtime_ns += span;
      }
    }

    if (trace) {
      TraceEvent ev;
      ev.type = TraceEvent::Type::TxEnd;
      ev.t = t;
      ev.node = exch.initiators.front();
      ev.node_id = nodes[static_cast<std::size_t>(exch.initiators.front())].id;
      ev.wlan_id = scen.wlans[static_cast<std::size_t>(
          node_wlan[static_cast<std::size_t>(exch.initiators.front())])].id;
      ev.channels = ended_tx.channels;
      ev.exchange = exch.kind;
      ev.success = all_ok;
      ev.delivered_bits = delivered;
      trace(ev);
    }

    for (int ini : exch.initiators) enter_contention(ini, t);
  }

  void finish_sounding(const InflightExchange& exch, const Transmission& tx, SimTime t) {
    const int node = exch.initiators.front();
    NodeRuntime& n = rt[static_cast<std::size_t>(node)];
    n.last_sounding = t;
    for (CsiRecord& rec : n.csi) rec.sounded_at = t;
    if (trace) {
      TraceEvent ev;
      ev.type = TraceEvent::Type::TxEnd;
      ev.t = t;
      ev.node = node;
      ev.node_id = nodes[static_cast<std::size_t>(node)].id;
      ev.wlan_id = scen.wlans[static_cast<std::size_t>(node_wlan[static_cast<std::size_t>(node)])].id;
      ev.channels = tx.channels;
      ev.exchange = "sounding";
      ev.success = true;
      trace(ev);
    }
    enter_contention(node, t);
  }

  // --- main loop ----------------------------------------------------------

  bool started = false;

  MetricsRaw run_until(SimTime until) {
    if (until > scen.duration_ns)
      throw SimError("run_until: t_end exceeds the scenario duration");
    if (started) throw SimError("run_until: a Simulation runs exactly once");
    started = true;
    t_end = until;
    warmup = std::min(scen.warmup_ns(), t_end);
    metrics.measured_window_ns = t_end - warmup;

    for (std::size_t i = 0; i < nodes.size(); ++i) {
      NodeRuntime& n = rt[i];
      if (n.arrival_period > 0)
        queue.schedule(n.arrival_period, EventKind::TrafficArrival,
                       static_cast<int>(i));
      if (has_traffic(static_cast<int>(i)))
        enter_contention(static_cast<int>(i), 0);
    }

    while (auto ev = queue.pop_next(t_end)) {
      switch (ev->kind) {
        case EventKind::TimerExpiry:
          on_resume_boundary(ev->subject, ev->payload != 0, ev->time);
          break;
        case EventKind::SlotBoundary:
          on_slot_boundary(ev->subject, ev->time);
          break;
        case EventKind::TxStart:
          on_tx_start(ev->subject, ev->time);
          break;
        case EventKind::TxEnd:
          on_tx_end(ev->subject, ev->time);
          break;
        case EventKind::TrafficArrival:
          on_traffic_arrival(ev->subject, ev->time);
          break;
      }
    }

    // Close the occupancy accounting for transmissions still on the air.
    for (int ch = 0; ch < kMaxBasicChannels; ++ch) {
      if (occ_count[ch] > 0)
        metrics.channel_busy_ns[ch] += clip_to_window(occ_since[ch], t_end);
    }
    for (const Transmission& tx : active)
      metrics.unresolved_airtime_ns += clip_to_window(tx.start, tx.end);
    metrics.events_processed = queue.processed();
    return metrics;
  }
};

Simulation::Simulation(const Scenario& scenario, std::uint64_t seed, TraceSink trace)
    : impl_(std::make_unique<Impl>(scenario, seed, std::move(trace))) {}

Simulation::~Simulation() = default;

MetricsRaw Simulation::run_until(SimTime t_end) { return impl_->run_until(t_end); }

}  // namespace hewsim
