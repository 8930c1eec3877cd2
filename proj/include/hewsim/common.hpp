// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hewsim {

// Simulation time is integer nanoseconds throughout; no floating-point clocks.
using SimTime = std::int64_t;

inline constexpr SimTime kNsPerUs = 1'000;
inline constexpr SimTime kNsPerMs = 1'000'000;
inline constexpr SimTime kNsPerSec = 1'000'000'000;

// Bad input: malformed scenario text, schema or invariant violations, unknown
// CLI keys. Mapped to exit code 2 by the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A protocol or engine invariant was violated at runtime. Mapped to exit
// code 3 by the CLI.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return (num + den - 1) / den;
}

// Transmitting `bits` at `rate_bps`, rounded up to whole nanoseconds.
inline SimTime bits_duration_ns(std::int64_t bits, std::int64_t rate_bps) {
  if (rate_bps <= 0) throw ConfigError("rate must be positive");
  return ceil_div(bits * kNsPerSec, rate_bps);
}

}  // namespace hewsim
