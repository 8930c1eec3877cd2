// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <string>

#include "hewsim/engine.hpp"
#include "hewsim/scenario.hpp"

using namespace hewsim;

namespace {

constexpr const char* kMinimalDoc = R"(
name = "minimal"
duration = 1s

[[wlan]]
id = "w"
channels = 0
primary = 0

[wlan.ap]
id = "ap"
traffic = saturated

[[wlan.sta]]
id = "sta"
)";

}  // namespace

TEST_CASE("minimal document parses to two nodes") {
  Scenario s = parse_scenario(kMinimalDoc);
  REQUIRE(s.wlans.size() == 1);
  CHECK(s.wlans[0].ap.id == "ap");
  REQUIRE(s.wlans[0].stas.size() == 1);
  CHECK(s.wlans[0].channels.width_mhz() == 20);
  CHECK(s.duration_ns == kNsPerSec);
  CHECK(validate(s).empty());
}

TEST_CASE("omitted radio fields inherit the radio defaults") {
  const std::string doc = std::string(kMinimalDoc) + R"(
[radio]
cca_threshold = -77dBm
tx_power = 17dBm
)";
  Scenario s = parse_scenario(doc);
  CHECK(s.wlans[0].stas[0].radio.cca_threshold_dbm == doctest::Approx(-77.0));
  CHECK(s.wlans[0].ap.radio.tx_power_dbm == doctest::Approx(17.0));
}

TEST_CASE("non-contiguous channel set is rejected by name") {
  const std::string doc = R"(
[[wlan]]
id = "w"
channels = 0,2
primary = 0
[wlan.ap]
id = "ap"
)";
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("channels not contiguous"),
                       ConfigError);
}

TEST_CASE("syntax errors carry the line number") {
  try {
    parse_scenario("name = \"x\"\nthis is not a key value line\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unknown keys are schema violations naming the field") {
  CHECK_THROWS_WITH_AS(parse_scenario("nonsense = 3\n"),
                       doctest::Contains("nonsense"), ConfigError);
  const std::string doc = std::string("[phy]\nslott = 9us\n") + kMinimalDoc;
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("slott"), ConfigError);
}

TEST_CASE("duration suffixes") {
  CHECK(parse_duration_ns("10s") == 10 * kNsPerSec);
  CHECK(parse_duration_ns("500ms") == 500 * kNsPerMs);
  CHECK(parse_duration_ns("9us") == 9 * kNsPerUs);
  CHECK(parse_duration_ns("123ns") == 123);
  CHECK(parse_duration_ns("42") == 42);
}

TEST_CASE("render/parse round trip on the builtins") {
  for (const char* name :
       {"fig2-overlap", "stadium-toy", "train-toy", "apartment-toy"}) {
    CAPTURE(name);
    Scenario s = builtin_scenario(name);
    Scenario again = parse_scenario(render_scenario(s));
    CHECK(again == s);
  }
}

TEST_CASE("render/parse round trip over randomized scenarios") {
  RandomStream rng(11, "roundtrip", "gen");
  for (int iter = 0; iter < 25; ++iter) {
    CAPTURE(iter);
    Scenario s;
    s.name = "rand" + std::to_string(iter);
    s.duration_ns = 1 + static_cast<SimTime>(rng.uniform(kNsPerSec));
    s.seed = rng.next_u64();
    s.warmup_fraction = 0.25 * rng.uniform_unit();
    s.protocol.protocol = rng.uniform(2) ? Protocol::CsmaEca : Protocol::CsmaCa;
    s.protocol.str = rng.uniform(2) == 1;
    s.protocol.piggyback = rng.uniform(2) == 1;
    s.protocol.aggregation = 1 + static_cast<int>(rng.uniform(64));
    const int caps[] = {0, 1, 2, 4, 8};
    s.protocol.ofdma = caps[rng.uniform(5)];
    if (rng.uniform(2)) s.protocol.mumimo = MumimoConfig{4, 2, 2};
    if (rng.uniform(2)) s.propagation.capture_threshold_db = 3.0 + rng.uniform_unit();
    const int widths[] = {1, 2, 4, 8};
    const int count = widths[rng.uniform(4)];
    const int first = static_cast<int>(rng.uniform(static_cast<std::uint64_t>(9 - count)));
    const int primary = first + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(count)));

    Wlan w;
    w.id = "w0";
    w.channels = ChannelSet::make(first, count, primary);
    w.ap = Node{"ap0", Role::Ap, rng.uniform_unit() * 10, rng.uniform_unit() * 10,
                s.radio_defaults, 1 + static_cast<int>(rng.uniform(16)),
                Traffic{true, 0.0}};
    if (rng.uniform(2))
      w.ap.radio.pattern = AntennaPattern{SectorPattern{
          rng.uniform_unit() * 360.0, 1.0 + rng.uniform_unit() * 359.0,
          rng.uniform_unit() * 10.0, rng.uniform_unit() * 30.0}};
    const int n_stas = static_cast<int>(rng.uniform(4));
    for (int i = 0; i < n_stas; ++i) {
      Node sta{"sta" + std::to_string(i), Role::Sta, rng.uniform_unit() * 10,
               rng.uniform_unit() * 10, s.radio_defaults,
               1 + static_cast<int>(rng.uniform(4)), Traffic{false, 0.0}};
      if (rng.uniform(2)) sta.traffic = Traffic{false, 1e6 * (1 + rng.uniform_unit())};
      if (rng.uniform(2)) sta.radio.str_capable = true;
      w.stas.push_back(std::move(sta));
    }
    s.wlans.push_back(std::move(w));
    REQUIRE(validate(s).empty());
    Scenario again = parse_scenario(render_scenario(s));
    CHECK(again == s);
  }
}

TEST_CASE("builtin scenarios are pure and valid") {
  for (const char* name :
       {"fig2-overlap", "stadium-toy", "train-toy", "apartment-toy"}) {
    CAPTURE(name);
    Scenario a = builtin_scenario(name);
    Scenario b = builtin_scenario(name);
    CHECK(a == b);
    CHECK(validate(a).empty());
  }
  CHECK_THROWS_AS(builtin_scenario("nope"), ConfigError);
}

TEST_CASE("fig2-overlap matches the overlap structure") {
  Scenario s = builtin_scenario("fig2-overlap");
  REQUIRE(s.wlans.size() == 3);
  const ChannelSet& a = s.wlans[0].channels;
  const ChannelSet& b = s.wlans[1].channels;
  const ChannelSet& c = s.wlans[2].channels;
  CHECK(c.width_mhz() == 80);
  CHECK(a.width_mhz() == 40);
  CHECK(b.width_mhz() == 40);
  CHECK_FALSE(a.intersects(b));
  CHECK(c.intersects(a));
  CHECK(c.intersects(b));
  // All APs saturated downlink.
  for (const Wlan& w : s.wlans) {
    CHECK(w.ap.traffic.saturated);
    CHECK(w.stas.size() == 2);
  }
}

TEST_CASE("density toys preserve the table ratios") {
  Scenario stadium = builtin_scenario("stadium-toy");
  CHECK(stadium.wlans.size() == 10);
  std::size_t stas = 0;
  for (const Wlan& w : stadium.wlans) stas += w.stas.size();
  CHECK(stas == 100);

  Scenario train = builtin_scenario("train-toy");
  std::size_t train_stas = 0;
  for (const Wlan& w : train.wlans) train_stas += w.stas.size();
  CHECK(train.wlans.size() * 100 < train_stas);  // AP count < STA count / 100

  Scenario apt = builtin_scenario("apartment-toy");
  CHECK(apt.wlans.size() == 12);
}

TEST_CASE("validate names duplicated node ids") {
  Scenario s = builtin_scenario("fig2-overlap");
  s.wlans[1].ap.id = "A.ap";
  auto v = validate(s);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().find("A.ap") != std::string::npos);
  CHECK(v.front().find("duplicated") != std::string::npos);
}

TEST_CASE("validate names the width invariant on a mutated scenario") {
  Scenario s = builtin_scenario("fig2-overlap");
  s.wlans[0].channels.count = 3;  // bypasses the factory on purpose
  bool found = false;
  for (const std::string& v : validate(s))
    if (v.find("width must be 1,2,4,8") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("channel set invariants") {
  CHECK_THROWS_AS(ChannelSet::make(0, 3, 0), ConfigError);
  CHECK_THROWS_AS(ChannelSet::make(0, 2, 5), ConfigError);
  CHECK_THROWS_AS(ChannelSet::make(6, 4, 6), ConfigError);
  CHECK_THROWS_AS(ChannelSet::from_channels({}, 0), ConfigError);
  const ChannelSet cs = ChannelSet::from_channels({3, 1, 2, 0}, 2);
  CHECK(cs == ChannelSet::make(0, 4, 2));
  CHECK(cs.width_mhz() == 80);
}

TEST_CASE("protocol section keys") {
  const std::string doc = std::string(kMinimalDoc) + R"(
[protocol]
protocol = csma-eca
str = on
aggregation = 16
piggyback = on
retry_limit = 4
ofdma = 4
mumimo = 4:2:2
sounding_interval_ms = 25
)";
  Scenario s = parse_scenario(doc);
  CHECK(s.protocol.protocol == Protocol::CsmaEca);
  CHECK(s.protocol.str);
  CHECK(s.protocol.aggregation == 16);
  CHECK(s.protocol.piggyback);
  CHECK(s.protocol.retry_limit == 4);
  CHECK(s.protocol.ofdma == 4);
  REQUIRE(s.protocol.mumimo.has_value());
  CHECK(s.protocol.mumimo->z == 2);
  CHECK(s.protocol.sounding_interval_ns == 25 * kNsPerMs);
}

TEST_CASE("mumimo config parsing") {
  const MumimoConfig cfg = MumimoConfig::parse("16:4:4");
  CHECK(cfg.x == 16);
  CHECK(cfg.y == 4);
  CHECK(cfg.z == 4);
  CHECK_THROWS_AS(MumimoConfig::parse("16:4:3"), ConfigError);
  CHECK_THROWS_AS(MumimoConfig::parse("banana"), ConfigError);
}
