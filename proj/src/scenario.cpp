// SPDX-License-Identifier: Apache-2.0
#include "hewsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "hewsim/engine.hpp"

namespace hewsim {

MumimoConfig MumimoConfig::parse(std::string_view text) {
  MumimoConfig cfg;
  int fields = std::sscanf(std::string(text).c_str(), "%d:%d:%d", &cfg.x, &cfg.y, &cfg.z);
  if (fields != 3 || cfg.x < 1 || cfg.y < 1 || cfg.z < 1)
    throw ConfigError("mumimo must have the form x:y:z with positive integers");
  if (cfg.x != cfg.y * cfg.z) throw ConfigError("mumimo: x must equal y*z");
  return cfg;
}

std::string MumimoConfig::to_string() const {
  return std::to_string(x) + ":" + std::to_string(y) + ":" + std::to_string(z);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct ParseCtx {
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
  }
};

double parse_double_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  const std::string s(trim(v));
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    ctx.fail("field '" + std::string(key) + "': expected a number, got '" + s + "'");
  return out;
}

std::int64_t parse_int_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  const std::string s(trim(v));
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    ctx.fail("field '" + std::string(key) + "': expected an integer, got '" + s + "'");
  return out;
}

std::uint64_t parse_u64_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  const std::string s(trim(v));
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    ctx.fail("field '" + std::string(key) + "': expected an unsigned integer");
  return out;
}

bool parse_bool_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  const std::string_view s = trim(v);
  if (s == "on" || s == "true") return true;
  if (s == "off" || s == "false") return false;
  ctx.fail("field '" + std::string(key) + "': expected on/off");
}

double parse_dbm_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  std::string_view s = trim(v);
  if (s.size() > 3 && s.substr(s.size() - 3) == "dBm") s = trim(s.substr(0, s.size() - 3));
  return parse_double_at(ctx, s, key);
}

SimTime parse_duration_at(const ParseCtx& ctx, std::string_view v, std::string_view key) {
  std::string_view s = trim(v);
  SimTime mult = 1;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "ns") {
    s = s.substr(0, s.size() - 2);
  } else if (s.size() >= 2 && s.substr(s.size() - 2) == "us") {
    mult = kNsPerUs;
    s = s.substr(0, s.size() - 2);
  } else if (s.size() >= 2 && s.substr(s.size() - 2) == "ms") {
    mult = kNsPerMs;
    s = s.substr(0, s.size() - 2);
  } else if (s.size() >= 1 && s.back() == 's') {
    mult = kNsPerSec;
    s = s.substr(0, s.size() - 1);
  }
  const double value = parse_double_at(ctx, trim(s), key);
  return static_cast<SimTime>(std::llround(value * static_cast<double>(mult)));
}

std::string parse_string_at(std::string_view v) {
  std::string_view s = trim(v);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

AntennaPattern parse_antenna_at(const ParseCtx& ctx, std::string_view v) {
  std::string s(trim(v));
  if (s == "omni") return AntennaPattern{};
  SectorPattern sp;
  if (std::sscanf(s.c_str(), "sector %lf %lf %lf %lf", &sp.center_deg, &sp.beamwidth_deg,
                  &sp.mainlobe_gain_db, &sp.backlobe_atten_db) != 4)
    ctx.fail("field 'antenna': expected 'omni' or 'sector CENTER BEAMWIDTH GAIN ATTEN'");
  return AntennaPattern{sp};
}

Traffic parse_traffic_at(const ParseCtx& ctx, std::string_view v) {
  const std::string_view s = trim(v);
  if (s == "saturated") return Traffic{true, 0.0};
  if (s == "none") return Traffic{false, 0.0};
  return Traffic{false, parse_double_at(ctx, s, "traffic")};
}

struct NodeDraft {
  Node node;
  bool has_tx_power = false;
  bool has_cca = false;
  bool has_antenna = false;
  bool has_str = false;
};

struct WlanDraft {
  std::string id;
  std::vector<int> channels;
  int primary = 0;
  bool has_primary = false;
  NodeDraft ap;
  bool has_ap = false;
  std::vector<NodeDraft> stas;
};

void apply_node_key(const ParseCtx& ctx, NodeDraft& d, std::string_view key,
                    std::string_view value) {
  if (key == "id") {
    d.node.id = parse_string_at(value);
  } else if (key == "x") {
    d.node.x = parse_double_at(ctx, value, key);
  } else if (key == "y") {
    d.node.y = parse_double_at(ctx, value, key);
  } else if (key == "antennas") {
    d.node.antennas = static_cast<int>(parse_int_at(ctx, value, key));
  } else if (key == "traffic") {
    d.node.traffic = parse_traffic_at(ctx, value);
  } else if (key == "tx_power") {
    d.node.radio.tx_power_dbm = parse_dbm_at(ctx, value, key);
    d.has_tx_power = true;
  } else if (key == "cca_threshold") {
    d.node.radio.cca_threshold_dbm = parse_dbm_at(ctx, value, key);
    d.has_cca = true;
  } else if (key == "antenna") {
    d.node.radio.pattern = parse_antenna_at(ctx, value);
    d.has_antenna = true;
  } else if (key == "str") {
    d.node.radio.str_capable = parse_bool_at(ctx, value, key);
    d.has_str = true;
  } else {
    ctx.fail("unknown key '" + std::string(key) + "' in a node section");
  }
}

Node finish_node(const NodeDraft& d, Role role, const RadioParams& defaults) {
  Node n = d.node;
  n.role = role;
  if (!d.has_tx_power) n.radio.tx_power_dbm = defaults.tx_power_dbm;
  if (!d.has_cca) n.radio.cca_threshold_dbm = defaults.cca_threshold_dbm;
  if (!d.has_antenna) n.radio.pattern = defaults.pattern;
  if (!d.has_str) n.radio.str_capable = defaults.str_capable;
  return n;
}

std::vector<int> parse_channel_list(const ParseCtx& ctx, std::string_view v) {
  std::vector<int> out;
  std::string s(trim(v));
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(parse_int_at(ctx, item, "channels")));
  }
  if (out.empty()) ctx.fail("field 'channels': expected a comma-separated list");
  return out;
}

}  // namespace

SimTime parse_duration_ns(std::string_view text) {
  ParseCtx ctx{0};
  return parse_duration_at(ctx, text, "duration");
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  s.wlans.clear();

  enum class Section { Top, Phy, Radio, Protocol, WlanTable, WlanAp, WlanSta };
  Section section = Section::Top;
  std::vector<WlanDraft> wlans;
  ParseCtx ctx;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++ctx.line;

    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    if (line.front() == '[') {
      if (line == "[phy]") {
        section = Section::Phy;
      } else if (line == "[radio]") {
        section = Section::Radio;
      } else if (line == "[protocol]") {
        section = Section::Protocol;
      } else if (line == "[[wlan]]") {
        wlans.emplace_back();
        section = Section::WlanTable;
      } else if (line == "[wlan.ap]") {
        if (wlans.empty()) ctx.fail("[wlan.ap] must follow a [[wlan]] section");
        wlans.back().has_ap = true;
        section = Section::WlanAp;
      } else if (line == "[[wlan.sta]]") {
        if (wlans.empty()) ctx.fail("[[wlan.sta]] must follow a [[wlan]] section");
        wlans.back().stas.emplace_back();
        section = Section::WlanSta;
      } else {
        ctx.fail("unknown section '" + std::string(line) + "'");
      }
      if (eol == text.size()) break;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ctx.fail("expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    switch (section) {
      case Section::Top:
        if (key == "name") s.name = parse_string_at(value);
        else if (key == "duration") s.duration_ns = parse_duration_at(ctx, value, key);
        else if (key == "seed") s.seed = parse_u64_at(ctx, value, key);
        else if (key == "warmup_fraction") s.warmup_fraction = parse_double_at(ctx, value, key);
        else ctx.fail("unknown top-level key '" + key + "'");
        break;

      case Section::Phy: {
        PhyParams& p = s.phy;
        PropagationModel& m = s.propagation;
        if (key == "slot") p.slot_ns = parse_duration_at(ctx, value, key);
        else if (key == "sifs") p.sifs_ns = parse_duration_at(ctx, value, key);
        else if (key == "difs") p.difs_ns = parse_duration_at(ctx, value, key);
        else if (key == "phy_header") p.phy_header_ns = parse_duration_at(ctx, value, key);
        else if (key == "control_rate") p.control_rate_bps = parse_int_at(ctx, value, key);
        else if (key == "base_rate") p.base_rate_20mhz_1ss_bps = parse_int_at(ctx, value, key);
        else if (key == "width_factor_20") p.width_factors[0] = parse_double_at(ctx, value, key);
        else if (key == "width_factor_40") p.width_factors[1] = parse_double_at(ctx, value, key);
        else if (key == "width_factor_80") p.width_factors[2] = parse_double_at(ctx, value, key);
        else if (key == "width_factor_160") p.width_factors[3] = parse_double_at(ctx, value, key);
        else if (key == "cw_min") p.cw_min = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "cw_max") p.cw_max = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "max_aggregation") p.max_aggregation = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "mac_header") p.mac_header_bits = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "mpdu_payload") p.mpdu_payload_bits = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "rts") p.rts_bits = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "cts") p.cts_bits = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "ack") p.ack_bits = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "pl0") m.pl0_db = parse_double_at(ctx, value, key);
        else if (key == "exponent") m.exponent = parse_double_at(ctx, value, key);
        else if (key == "noise_floor") m.noise_floor_dbm = parse_dbm_at(ctx, value, key);
        else if (key == "capture_threshold") {
          if (trim(value) == "off") m.capture_threshold_db.reset();
          else m.capture_threshold_db = parse_double_at(ctx, value, key);
        }
        else ctx.fail("unknown key '" + key + "' in [phy]");
        break;
      }

      case Section::Radio: {
        RadioParams& r = s.radio_defaults;
        if (key == "tx_power") r.tx_power_dbm = parse_dbm_at(ctx, value, key);
        else if (key == "cca_threshold") r.cca_threshold_dbm = parse_dbm_at(ctx, value, key);
        else if (key == "antenna") r.pattern = parse_antenna_at(ctx, value);
        else if (key == "str") r.str_capable = parse_bool_at(ctx, value, key);
        else ctx.fail("unknown key '" + key + "' in [radio]");
        break;
      }

      case Section::Protocol: {
        ProtocolConfig& c = s.protocol;
        if (key == "protocol") {
          const std::string_view v = trim(value);
          if (v == "csma-ca") c.protocol = Protocol::CsmaCa;
          else if (v == "csma-eca") c.protocol = Protocol::CsmaEca;
          else ctx.fail("field 'protocol': expected csma-ca or csma-eca");
        }
        else if (key == "str") c.str = parse_bool_at(ctx, value, key);
        else if (key == "aggregation") c.aggregation = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "piggyback") c.piggyback = parse_bool_at(ctx, value, key);
        else if (key == "retry_limit") c.retry_limit = static_cast<int>(parse_int_at(ctx, value, key));
        else if (key == "ofdma") {
          if (trim(value) == "off") c.ofdma = 0;
          else c.ofdma = static_cast<int>(parse_int_at(ctx, value, key));
        }
        else if (key == "mumimo") {
          if (trim(value) == "off") c.mumimo.reset();
          else c.mumimo = MumimoConfig::parse(trim(value));
        }
        else if (key == "sounding_interval") {
          if (trim(value) == "off") c.sounding_interval_ns = 0;
          else c.sounding_interval_ns = parse_duration_at(ctx, value, key);
        }
        else if (key == "sounding_interval_ms") {
          if (trim(value) == "off") c.sounding_interval_ns = 0;
          else c.sounding_interval_ns = static_cast<SimTime>(
              std::llround(parse_double_at(ctx, value, key) * kNsPerMs));
        }
        else if (key == "mu_stream_penalty") c.mu_stream_penalty = parse_double_at(ctx, value, key);
        else ctx.fail("unknown key '" + key + "' in [protocol]");
        break;
      }

      case Section::WlanTable: {
        WlanDraft& w = wlans.back();
        if (key == "id") w.id = parse_string_at(value);
        else if (key == "channels") w.channels = parse_channel_list(ctx, value);
        else if (key == "primary") { w.primary = static_cast<int>(parse_int_at(ctx, value, key)); w.has_primary = true; }
        else ctx.fail("unknown key '" + key + "' in [[wlan]]");
        break;
      }

      case Section::WlanAp:
        apply_node_key(ctx, wlans.back().ap, key, value);
        break;

      case Section::WlanSta:
        apply_node_key(ctx, wlans.back().stas.back(), key, value);
        break;
    }
    if (eol == text.size()) break;
  }

  if (wlans.empty()) throw ConfigError("scenario must define at least one [[wlan]]");
  for (WlanDraft& wd : wlans) {
    Wlan w;
    w.id = wd.id.empty() ? ("wlan" + std::to_string(&wd - wlans.data())) : wd.id;
    if (wd.channels.empty()) wd.channels = {0};
    if (!wd.has_primary) wd.primary = wd.channels.front();
    w.channels = ChannelSet::from_channels(wd.channels, wd.primary);
    if (!wd.has_ap) throw ConfigError("wlan '" + w.id + "' has no [wlan.ap]");
    w.ap = finish_node(wd.ap, Role::Ap, s.radio_defaults);
    if (w.ap.id.empty()) w.ap.id = w.id + ".ap";
    int sta_index = 0;
    for (const NodeDraft& sd : wd.stas) {
      Node sta = finish_node(sd, Role::Sta, s.radio_defaults);
      if (sta.id.empty()) sta.id = w.id + ".sta" + std::to_string(++sta_index);
      w.stas.push_back(std::move(sta));
    }
    s.wlans.push_back(std::move(w));
  }

  auto violations = validate(s);
  if (!violations.empty())
    throw ConfigError("invariant violation: " + violations.front());
  return s;
}

namespace {

void render_node(std::ostringstream& out, const Node& n) {
  out << "id = \"" << n.id << "\"\n";
  out << "x = " << fmt_double(n.x) << "\n";
  out << "y = " << fmt_double(n.y) << "\n";
  out << "antennas = " << n.antennas << "\n";
  if (n.traffic.saturated) out << "traffic = saturated\n";
  else if (n.traffic.offered_bps <= 0.0) out << "traffic = none\n";
  else out << "traffic = " << fmt_double(n.traffic.offered_bps) << "\n";
  out << "tx_power = " << fmt_double(n.radio.tx_power_dbm) << "dBm\n";
  out << "cca_threshold = " << fmt_double(n.radio.cca_threshold_dbm) << "dBm\n";
  if (n.radio.pattern.omni()) {
    out << "antenna = omni\n";
  } else {
    const SectorPattern& sp = *n.radio.pattern.sector;
    out << "antenna = sector " << fmt_double(sp.center_deg) << " "
        << fmt_double(sp.beamwidth_deg) << " " << fmt_double(sp.mainlobe_gain_db) << " "
        << fmt_double(sp.backlobe_atten_db) << "\n";
  }
  out << "str = " << (n.radio.str_capable ? "on" : "off") << "\n";
}

}  // namespace

std::string render_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "name = \"" << s.name << "\"\n";
  out << "duration = " << s.duration_ns << "ns\n";
  out << "seed = " << s.seed << "\n";
  out << "warmup_fraction = " << fmt_double(s.warmup_fraction) << "\n";

  out << "\n[phy]\n";
  const PhyParams& p = s.phy;
  out << "slot = " << p.slot_ns << "ns\n";
  out << "sifs = " << p.sifs_ns << "ns\n";
  out << "difs = " << p.difs_ns << "ns\n";
  out << "phy_header = " << p.phy_header_ns << "ns\n";
  out << "control_rate = " << p.control_rate_bps << "\n";
  out << "base_rate = " << p.base_rate_20mhz_1ss_bps << "\n";
  out << "width_factor_20 = " << fmt_double(p.width_factors[0]) << "\n";
  out << "width_factor_40 = " << fmt_double(p.width_factors[1]) << "\n";
  out << "width_factor_80 = " << fmt_double(p.width_factors[2]) << "\n";
  out << "width_factor_160 = " << fmt_double(p.width_factors[3]) << "\n";
  out << "cw_min = " << p.cw_min << "\n";
  out << "cw_max = " << p.cw_max << "\n";
  out << "max_aggregation = " << p.max_aggregation << "\n";
  out << "mac_header = " << p.mac_header_bits << "\n";
  out << "mpdu_payload = " << p.mpdu_payload_bits << "\n";
  out << "rts = " << p.rts_bits << "\n";
  out << "cts = " << p.cts_bits << "\n";
  out << "ack = " << p.ack_bits << "\n";
  const PropagationModel& m = s.propagation;
  out << "pl0 = " << fmt_double(m.pl0_db) << "\n";
  out << "exponent = " << fmt_double(m.exponent) << "\n";
  out << "noise_floor = " << fmt_double(m.noise_floor_dbm) << "dBm\n";
  if (m.capture_threshold_db.has_value())
    out << "capture_threshold = " << fmt_double(*m.capture_threshold_db) << "\n";
  else
    out << "capture_threshold = off\n";

  out << "\n[radio]\n";
  const RadioParams& r = s.radio_defaults;
  out << "tx_power = " << fmt_double(r.tx_power_dbm) << "dBm\n";
  out << "cca_threshold = " << fmt_double(r.cca_threshold_dbm) << "dBm\n";
  if (r.pattern.omni()) {
    out << "antenna = omni\n";
  } else {
    const SectorPattern& sp = *r.pattern.sector;
    out << "antenna = sector " << fmt_double(sp.center_deg) << " "
        << fmt_double(sp.beamwidth_deg) << " " << fmt_double(sp.mainlobe_gain_db) << " "
        << fmt_double(sp.backlobe_atten_db) << "\n";
  }
  out << "str = " << (r.str_capable ? "on" : "off") << "\n";

  out << "\n[protocol]\n";
  const ProtocolConfig& c = s.protocol;
  out << "protocol = " << (c.protocol == Protocol::CsmaCa ? "csma-ca" : "csma-eca") << "\n";
  out << "str = " << (c.str ? "on" : "off") << "\n";
  out << "aggregation = " << c.aggregation << "\n";
  out << "piggyback = " << (c.piggyback ? "on" : "off") << "\n";
  out << "retry_limit = " << c.retry_limit << "\n";
  if (c.ofdma > 0) out << "ofdma = " << c.ofdma << "\n";
  else out << "ofdma = off\n";
  if (c.mumimo.has_value()) out << "mumimo = " << c.mumimo->to_string() << "\n";
  else out << "mumimo = off\n";
  if (c.sounding_interval_ns > 0)
    out << "sounding_interval = " << c.sounding_interval_ns << "ns\n";
  else
    out << "sounding_interval = off\n";
  out << "mu_stream_penalty = " << fmt_double(c.mu_stream_penalty) << "\n";

  for (const Wlan& w : s.wlans) {
    out << "\n[[wlan]]\n";
    out << "id = \"" << w.id << "\"\n";
    out << "channels = ";
    for (int ch = w.channels.first; ch <= w.channels.last(); ++ch) {
      if (ch != w.channels.first) out << ",";
      out << ch;
    }
    out << "\n";
    out << "primary = " << w.channels.primary << "\n";
    out << "\n[wlan.ap]\n";
    render_node(out, w.ap);
    for (const Node& sta : w.stas) {
      out << "\n[[wlan.sta]]\n";
      render_node(out, sta);
    }
  }
  return out.str();
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  if (s.duration_ns <= 0) out.push_back("duration must be positive");
  if (s.warmup_fraction < 0.0 || s.warmup_fraction >= 1.0)
    out.push_back("warmup_fraction must lie in [0, 1)");
  if (s.wlans.empty()) out.push_back("scenario must contain at least one WLAN");

  const PhyParams& p = s.phy;
  auto power_of_two = [](int v) { return v > 0 && (v & (v - 1)) == 0; };
  if (!power_of_two(p.cw_min) || !power_of_two(p.cw_max))
    out.push_back("phy: cw_min and cw_max must be powers of two");
  if (p.cw_min > p.cw_max) out.push_back("phy: cw_min must be <= cw_max");
  if (p.slot_ns <= 0 || p.sifs_ns <= 0 || p.difs_ns <= 0 || p.phy_header_ns <= 0)
    out.push_back("phy: all durations must be positive");
  if (p.control_rate_bps <= 0 || p.base_rate_20mhz_1ss_bps <= 0)
    out.push_back("phy: rates must be positive");
  if (p.max_aggregation < 1) out.push_back("phy: max_aggregation must be >= 1");

  if (s.propagation.exponent < 2.0)
    out.push_back("propagation: exponent must be >= 2");
  if (s.propagation.pl0_db <= 0.0) out.push_back("propagation: pl0 must be positive");

  const ProtocolConfig& c = s.protocol;
  if (c.aggregation < 1 || c.aggregation > p.max_aggregation)
    out.push_back("protocol: aggregation must lie in 1..max_aggregation");
  if (c.retry_limit < 0) out.push_back("protocol: retry_limit must be >= 0");
  if (c.ofdma != 0 && c.ofdma != 1 && c.ofdma != 2 && c.ofdma != 4 && c.ofdma != 8)
    out.push_back("protocol: ofdma cap must be off or 1,2,4,8");
  if (c.mumimo.has_value() && c.mumimo->x != c.mumimo->y * c.mumimo->z)
    out.push_back("protocol: mumimo x must equal y*z");
  if (c.mu_stream_penalty <= 0.0)
    out.push_back("protocol: mu_stream_penalty must be positive");

  std::set<std::string> ids;
  auto check_node = [&](const Node& n, const Wlan& w, Role expected) {
    if (!ids.insert(n.id).second)
      out.push_back("node id " + n.id + " duplicated");
    if (n.role != expected)
      out.push_back("node " + n.id + ": role mismatch in wlan " + w.id);
    if (n.antennas < 1) out.push_back("node " + n.id + ": antennas must be >= 1");
    if (!n.traffic.saturated && n.traffic.offered_bps < 0.0)
      out.push_back("node " + n.id + ": offered load must be >= 0");
    if (!n.radio.pattern.omni()) {
      const SectorPattern& sp = *n.radio.pattern.sector;
      if (sp.beamwidth_deg <= 0.0 || sp.beamwidth_deg > 360.0)
        out.push_back("node " + n.id + ": beamwidth must lie in (0, 360]");
      if (sp.backlobe_atten_db < 0.0)
        out.push_back("node " + n.id + ": backlobe attenuation must be >= 0");
    }
  };

  for (const Wlan& w : s.wlans) {
    for (const std::string& v : w.channels.check())
      out.push_back("wlan " + w.id + ": " + v);
    check_node(w.ap, w, Role::Ap);
    for (const Node& sta : w.stas) check_node(sta, w, Role::Sta);
  }
  return out;
}

namespace {

Scenario fig2_overlap() {
  Scenario s;
  s.name = "fig2-overlap";
  s.duration_ns = 10 * kNsPerSec;
  s.seed = 1;

  // Three APs mutually inside carrier-sense range (10 m spacing, documented
  // in docs/): A and B use disjoint 40 MHz channels, C bonds all four.
  struct Spec {
    const char* id;
    double x, y;
    ChannelSet cs;
  };
  const Spec specs[] = {
      {"A", 0.0, 0.0, ChannelSet::make(0, 2, 0)},
      {"B", 10.0, 0.0, ChannelSet::make(2, 2, 2)},
      {"C", 5.0, 8.66, ChannelSet::make(0, 4, 1)},
  };
  for (const Spec& sp : specs) {
    Wlan w;
    w.id = sp.id;
    w.channels = sp.cs;
    w.ap =
        Node{std::string(sp.id) + ".ap", Role::Ap, sp.x, sp.y, s.radio_defaults, 1,
             Traffic{true, 0.0}};
    w.stas.push_back(Node{std::string(sp.id) + ".sta1", Role::Sta, sp.x + 2.0, sp.y,
                          s.radio_defaults, 1, Traffic{false, 0.0}});
    w.stas.push_back(Node{std::string(sp.id) + ".sta2", Role::Sta, sp.x - 2.0, sp.y,
                          s.radio_defaults, 1, Traffic{false, 0.0}});
    s.wlans.push_back(std::move(w));
  }
  return s;
}

// Scaled-down density toys: uniform random placement in a square region,
// stations associated with the nearest AP, single 20 MHz channels assigned
// round-robin. Scaling factors are a documented choice (docs/).
Scenario density_toy(const std::string& name, int n_aps, int n_stas, double area_m2) {
  Scenario s;
  s.name = name;
  s.duration_ns = 10 * kNsPerSec;
  s.seed = 1;

  const double side = std::sqrt(area_m2);
  RandomStream rng(s.seed, name, "placement");
  auto coord = [&]() { return rng.uniform_unit() * side; };

  struct P {
    double x, y;
  };
  std::vector<P> aps, stas;
  for (int i = 0; i < n_aps; ++i) aps.push_back({coord(), coord()});
  for (int i = 0; i < n_stas; ++i) stas.push_back({coord(), coord()});

  for (int i = 0; i < n_aps; ++i) {
    Wlan w;
    w.id = "w" + std::to_string(i);
    const int ch = i % kMaxBasicChannels;
    w.channels = ChannelSet::make(ch, 1, ch);
    w.ap = Node{w.id + ".ap", Role::Ap, aps[static_cast<std::size_t>(i)].x,
                aps[static_cast<std::size_t>(i)].y, s.radio_defaults, 1,
                Traffic{true, 0.0}};
    s.wlans.push_back(std::move(w));
  }
  for (int i = 0; i < n_stas; ++i) {
    const P& p = stas[static_cast<std::size_t>(i)];
    int best = 0;
    double best_d2 = 1e300;
    for (int a = 0; a < n_aps; ++a) {
      const double dx = p.x - aps[static_cast<std::size_t>(a)].x;
      const double dy = p.y - aps[static_cast<std::size_t>(a)].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = a;
      }
    }
    Wlan& w = s.wlans[static_cast<std::size_t>(best)];
    w.stas.push_back(Node{w.id + ".sta" + std::to_string(w.stas.size() + 1), Role::Sta,
                          p.x, p.y, s.radio_defaults, 1, Traffic{false, 0.0}});
  }
  return s;
}

}  // namespace

Scenario builtin_scenario(std::string_view name) {
  if (name == "fig2-overlap") return fig2_overlap();
  if (name == "stadium-toy") return density_toy("stadium-toy", 10, 100, 125.0);
  if (name == "train-toy") return density_toy("train-toy", 2, 220, 120.0);
  if (name == "apartment-toy") return density_toy("apartment-toy", 12, 46, 240.0);
  throw ConfigError("unknown builtin scenario '" + std::string(name) +
                    "' (expected fig2-overlap, stadium-toy, train-toy, apartment-toy)");
}

}  // namespace hewsim
