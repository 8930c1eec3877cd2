// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "hewsim/analytics.hpp"
#include "hewsim/scenario.hpp"
#include "hewsim/trace.hpp"

namespace hewsim {

// One deterministic discrete-event run of a scenario. Strictly
// single-threaded; independent instances may run concurrently.
class Simulation {
 public:
  Simulation(const Scenario& scenario, std::uint64_t seed, TraceSink trace = {});
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Run until t_end (<= scenario duration) and return the tallies. A second
  // run with the same scenario and seed yields a bit-identical MetricsRaw.
  MetricsRaw run_until(SimTime t_end);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hewsim
