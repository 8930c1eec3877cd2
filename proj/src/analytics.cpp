// SPDX-License-Identifier: Apache-2.0
#include "hewsim/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "hewsim/mac.hpp"
#include "hewsim/sim.hpp"

namespace hewsim {

std::string MetricsRaw::summary_digest() const {
  std::ostringstream out;
  out << "window=" << measured_window_ns << " events=" << events_processed
      << " exchange_bits=" << exchange_delivered_bits
      << " unresolved=" << unresolved_airtime_ns << "\n";
  for (std::size_t i = 0; i < node.size(); ++i) {
    const NodeTally& n = node[i];
    out << "n" << i << " a=" << n.attempts << " c=" << n.collisions
        << " s=" << n.successes << " d=" << n.drops << " bits=" << n.delivered_bits
        << " air=" << n.airtime_ns << " slots=" << n.backoff_slots << "\n";
  }
  for (std::size_t i = 0; i < wlan.size(); ++i) {
    const WlanTally& w = wlan[i];
    out << "w" << i << " a=" << w.attempts << " c=" << w.collisions
        << " s=" << w.successes << " bits=" << w.delivered_bits
        << " air=" << w.airtime_ns << "\n";
  }
  for (SimTime b : channel_busy_ns) out << b << " ";
  out << "\n";
  return out.str();
}

double jain_index(std::span<const double> xs) {
  if (xs.empty()) return 1.0;
  double sum = 0.0, sq = 0.0;
  for (double x : xs) {
    sum += x;
    sq += x * x;
  }
  if (sq <= 0.0) return 1.0;  // all-zero: vacuously fair
  return (sum * sum) / (static_cast<double>(xs.size()) * sq);
}

Report reduce(const MetricsRaw& raw, const Scenario& s) {
  Report rep;
  rep.measured_window_ns = raw.measured_window_ns;
  const double window_s =
      static_cast<double>(raw.measured_window_ns) / static_cast<double>(kNsPerSec);

  std::size_t node_idx = 0;
  std::vector<double> wlan_thr;
  for (std::size_t w = 0; w < s.wlans.size(); ++w) {
    const Wlan& wl = s.wlans[w];
    const WlanTally& wt = raw.wlan[w];
    Report::PerWlan pw;
    pw.id = wl.id;
    pw.throughput_bps =
        window_s > 0.0 ? static_cast<double>(wt.delivered_bits) / window_s : 0.0;
    pw.collision_prob =
        wt.attempts > 0
            ? static_cast<double>(wt.collisions) / static_cast<double>(wt.attempts)
            : 0.0;
    pw.airtime_share = raw.measured_window_ns > 0
                           ? static_cast<double>(wt.airtime_ns) /
                                 static_cast<double>(raw.measured_window_ns)
                           : 0.0;
    wlan_thr.push_back(pw.throughput_bps);
    rep.wlans.push_back(std::move(pw));

    auto add_node = [&](const Node& n) {
      const NodeTally& nt = raw.node[node_idx++];
      Report::PerNode pn;
      pn.id = n.id;
      pn.wlan = wl.id;
      pn.throughput_bps =
          window_s > 0.0 ? static_cast<double>(nt.delivered_bits) / window_s : 0.0;
      pn.collision_prob =
          nt.attempts > 0
              ? static_cast<double>(nt.collisions) / static_cast<double>(nt.attempts)
              : 0.0;
      pn.airtime_share = raw.measured_window_ns > 0
                             ? static_cast<double>(nt.airtime_ns) /
                                   static_cast<double>(raw.measured_window_ns)
                             : 0.0;
      rep.nodes.push_back(std::move(pn));
    };
    add_node(wl.ap);
    for (const Node& sta : wl.stas) add_node(sta);
  }
  rep.jain = jain_index(wlan_thr);
  return rep;
}

double analytic_saturation_throughput(const PhyParams& phy, int width_channels,
                                      int streams, int aggregation,
                                      int n_contenders) {
  if (n_contenders != 1)
    throw ConfigError(
        "analytic oracle covers only the contention-free single-transmitter case");
  if (aggregation < 1) throw ConfigError("aggregation must be >= 1");
  if (streams < 1) throw ConfigError("streams must be >= 1");

  const SimTime t_rts = control_frame_ns(phy.rts_bits, phy);
  const SimTime t_cts = control_frame_ns(phy.cts_bits, phy);
  const SimTime t_ack = control_frame_ns(phy.ack_bits, phy);
  const std::int64_t bits = static_cast<std::int64_t>(aggregation) *
                            (phy.mac_header_bits + phy.mpdu_payload_bits);
  const SimTime t_data =
      phy.phy_header_ns +
      bits_duration_ns(bits, data_rate_bps(phy, width_channels, streams));
  const double mean_backoff_ns =
      static_cast<double>(phy.cw_min - 1) / 2.0 * static_cast<double>(phy.slot_ns);
  const double cycle_ns = static_cast<double>(phy.difs_ns) + mean_backoff_ns +
                          static_cast<double>(t_rts + 3 * phy.sifs_ns + t_cts +
                                              t_data + t_ack);
  const double payload =
      static_cast<double>(aggregation) * static_cast<double>(phy.mpdu_payload_bits);
  return payload * 1e9 / cycle_ns;
}

RunResult run(const Scenario& s, std::uint64_t seed, SimTime t_end,
              const TraceSink& trace) {
  const SimTime end = t_end == 0 ? s.duration_ns : t_end;
  Simulation sim(s, seed, trace);
  MetricsRaw raw = sim.run_until(end);
  return RunResult{reduce(raw, s), std::move(raw)};
}

namespace {

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

constexpr const char* kCsvHeader =
    "axis_value,seed,wlan_id,node_id,throughput_bps,collision_prob,airtime_share,jain\n";

void append_report_rows(std::ostringstream& out, const Report& rep,
                        std::string_view axis_value, const std::string& seed_text) {
  for (const Report::PerWlan& w : rep.wlans) {
    out << axis_value << "," << seed_text << "," << w.id << ",-,"
        << fmt(w.throughput_bps, 3) << "," << fmt(w.collision_prob, 6) << ","
        << fmt(w.airtime_share, 6) << "," << fmt(rep.jain, 6) << "\n";
  }
  for (const Report::PerNode& n : rep.nodes) {
    out << axis_value << "," << seed_text << "," << n.wlan << "," << n.id << ","
        << fmt(n.throughput_bps, 3) << "," << fmt(n.collision_prob, 6) << ","
        << fmt(n.airtime_share, 6) << "," << fmt(rep.jain, 6) << "\n";
  }
}

struct CellStats {
  double total_thr = 0.0;
  double coll_prob = 0.0;
  double airtime = 0.0;
  double jain = 1.0;
};

}  // namespace

std::string report_csv(const Report& report, std::string_view axis_value,
                       std::uint64_t seed, bool header) {
  std::ostringstream out;
  if (header) out << kCsvHeader;
  append_report_rows(out, report, axis_value, std::to_string(seed));
  return out.str();
}

void apply_axis(Scenario& s, std::string_view axis, std::string_view value) {
  std::string key(axis);
  std::string target;
  if (auto colon = key.find(':'); colon != std::string::npos) {
    target = key.substr(colon + 1);
    key = key.substr(0, colon);
  }
  auto for_wlans = [&](auto&& fn) {
    bool found = target.empty();
    for (Wlan& w : s.wlans) {
      if (!target.empty() && w.id != target) continue;
      found = true;
      fn(w);
    }
    if (!found) throw ConfigError("sweep axis targets unknown wlan '" + target + "'");
  };

  if (key == "ofdma") {
    s.protocol.ofdma = value == "off" ? 0 : static_cast<int>(std::stol(std::string(value)));
  } else if (key == "mumimo") {
    if (value == "off") s.protocol.mumimo.reset();
    else s.protocol.mumimo = MumimoConfig::parse(value);
  } else if (key == "aggregation") {
    s.protocol.aggregation = static_cast<int>(std::stol(std::string(value)));
  } else if (key == "cca_threshold") {
    const double dbm = std::stod(std::string(value));
    if (target.empty()) s.radio_defaults.cca_threshold_dbm = dbm;
    for_wlans([&](Wlan& w) {
      w.ap.radio.cca_threshold_dbm = dbm;
      for (Node& sta : w.stas) sta.radio.cca_threshold_dbm = dbm;
    });
  } else if (key == "tx_power") {
    const double dbm = std::stod(std::string(value));
    if (target.empty()) s.radio_defaults.tx_power_dbm = dbm;
    for_wlans([&](Wlan& w) {
      w.ap.radio.tx_power_dbm = dbm;
      for (Node& sta : w.stas) sta.radio.tx_power_dbm = dbm;
    });
  } else if (key == "n_stas") {
    const int k = static_cast<int>(std::stol(std::string(value)));
    if (k < 0) throw ConfigError("n_stas must be >= 0");
    for_wlans([&](Wlan& w) {
      const Node tmpl = w.stas.empty() ? Node{"", Role::Sta, w.ap.x + 2.0, w.ap.y,
                                              s.radio_defaults, 1, Traffic{}}
                                       : w.stas.front();
      w.stas.clear();
      for (int i = 0; i < k; ++i) {
        // Ring placement around the AP keeps regenerated stations in range.
        Node sta = tmpl;
        sta.id = w.id + ".sta" + std::to_string(i + 1);
        const double angle = 2.0 * M_PI * static_cast<double>(i) /
                             static_cast<double>(std::max(k, 1));
        sta.x = w.ap.x + 2.0 * std::cos(angle);
        sta.y = w.ap.y + 2.0 * std::sin(angle);
        w.stas.push_back(std::move(sta));
      }
    });
  } else {
    throw ConfigError("unknown sweep axis '" + key +
                      "' (expected ofdma, mumimo, aggregation, cca_threshold, "
                      "tx_power, n_stas)");
  }
}

std::string sweep_csv(const Scenario& base, std::string_view axis,
                      std::span<const std::string> values,
                      std::span<const std::uint64_t> seeds, SimTime duration) {
  if (values.empty()) throw ConfigError("sweep: at least one value required");
  if (seeds.empty()) throw ConfigError("sweep: at least one seed required");

  struct Cell {
    std::size_t value_idx;
    std::size_t seed_idx;
    std::string rows;
    CellStats stats;
  };
  std::vector<Cell> cells;
  for (std::size_t v = 0; v < values.size(); ++v)
    for (std::size_t k = 0; k < seeds.size(); ++k)
      cells.push_back(Cell{v, k, "", {}});

  // Validate every axis application up front so worker threads only see
  // well-formed scenarios.
  std::vector<Scenario> variants;
  for (const std::string& v : values) {
    Scenario s = base;
    apply_axis(s, axis, v);
    if (duration > 0) s.duration_ns = duration;
    auto violations = validate(s);
    if (!violations.empty())
      throw ConfigError("sweep value '" + v + "': " + violations.front());
    variants.push_back(std::move(s));
  }

  // Each cell owns an independent engine; rows are keyed by (value, seed)
  // and assembled in order, so concurrency cannot change the output.
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& cell = cells[i];
      const Scenario& s = variants[cell.value_idx];
      RunResult rr = run(s, seeds[cell.seed_idx]);
      std::ostringstream rows;
      append_report_rows(rows, rr.report, values[cell.value_idx],
                         std::to_string(seeds[cell.seed_idx]));
      cell.rows = rows.str();
      double attempts = 0.0, collisions = 0.0, airtime = 0.0;
      for (std::size_t w = 0; w < rr.raw.wlan.size(); ++w) {
        attempts += static_cast<double>(rr.raw.wlan[w].attempts);
        collisions += static_cast<double>(rr.raw.wlan[w].collisions);
      }
      for (const Report::PerWlan& w : rr.report.wlans) airtime += w.airtime_share;
      cell.stats.total_thr = rr.report.total_throughput_bps();
      cell.stats.coll_prob = attempts > 0.0 ? collisions / attempts : 0.0;
      cell.stats.airtime = airtime;
      cell.stats.jain = rr.report.jain;
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(cells.size(),
                            std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  std::ostringstream out;
  out << kCsvHeader;
  for (std::size_t v = 0; v < values.size(); ++v) {
    for (std::size_t k = 0; k < seeds.size(); ++k)
      out << cells[v * seeds.size() + k].rows;

    auto stat = [&](auto getter) {
      double mean = 0.0;
      for (std::size_t k = 0; k < seeds.size(); ++k)
        mean += getter(cells[v * seeds.size() + k].stats);
      mean /= static_cast<double>(seeds.size());
      double var = 0.0;
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const double d = getter(cells[v * seeds.size() + k].stats) - mean;
        var += d * d;
      }
      var /= static_cast<double>(seeds.size());
      return std::pair<double, double>(mean, std::sqrt(var));
    };
    const auto [thr_m, thr_s] = stat([](const CellStats& c) { return c.total_thr; });
    const auto [cp_m, cp_s] = stat([](const CellStats& c) { return c.coll_prob; });
    const auto [air_m, air_s] = stat([](const CellStats& c) { return c.airtime; });
    const auto [j_m, j_s] = stat([](const CellStats& c) { return c.jain; });
    out << values[v] << ",mean,-,-," << fmt(thr_m, 3) << "," << fmt(cp_m, 6) << ","
        << fmt(air_m, 6) << "," << fmt(j_m, 6) << "\n";
    out << values[v] << ",stddev,-,-," << fmt(thr_s, 3) << "," << fmt(cp_s, 6) << ","
        << fmt(air_s, 6) << "," << fmt(j_s, 6) << "\n";
  }
  return out.str();
}

}  // namespace hewsim
