// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hewsim/analytics.hpp"
#include "hewsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hewsim::ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hewsim::ConfigError("cannot write to '" + path + "'");
  out << content;
}

hewsim::Scenario load_scenario(const std::string& file, const std::string& builtin) {
  if (!file.empty() && !builtin.empty())
    throw hewsim::ConfigError("--scenario and --builtin are mutually exclusive");
  if (!file.empty()) return hewsim::parse_scenario(read_file(file));
  if (!builtin.empty()) return hewsim::builtin_scenario(builtin);
  throw hewsim::ConfigError("one of --scenario or --builtin is required");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void print_report(const hewsim::Report& rep) {
  std::printf("measured window: %.6f s\n",
              static_cast<double>(rep.measured_window_ns) / 1e9);
  std::printf("%-12s %14s %10s %10s\n", "wlan", "throughput", "coll.prob", "airtime");
  for (const auto& w : rep.wlans) {
    std::printf("%-12s %11.3f Mb/s %10.4f %10.4f\n", w.id.c_str(),
                w.throughput_bps / 1e6, w.collision_prob, w.airtime_share);
  }
  std::printf("%-12s %14s %10s %10s\n", "node", "throughput", "coll.prob", "airtime");
  for (const auto& n : rep.nodes) {
    std::printf("%-12s %11.3f Mb/s %10.4f %10.4f\n", n.id.c_str(),
                n.throughput_bps / 1e6, n.collision_prob, n.airtime_share);
  }
  std::printf("jain fairness (wlans): %.4f\n", rep.jain);
  std::printf("total throughput: %.3f Mb/s\n", rep.total_throughput_bps() / 1e6);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hewsim: dense-WLAN MAC simulator (contention, bonding, OFDMA, "
               "MU-MIMO, full duplex)"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "simulate one scenario and report");
  std::string run_file, run_builtin, run_duration, run_trace, run_csv;
  std::uint64_t run_seed = 0;
  bool run_seed_set = false;
  run_cmd->add_option("--scenario", run_file, "scenario file");
  run_cmd->add_option("--builtin", run_builtin,
                      "fig2-overlap|stadium-toy|train-toy|apartment-toy");
  run_cmd->add_option("--seed", run_seed, "random seed (default: scenario seed)")
      ->each([&](const std::string&) { run_seed_set = true; });
  run_cmd->add_option("--duration", run_duration, "override duration (e.g. 10s, 500ms)");
  run_cmd->add_option("--trace", run_trace, "write the event trace to this path");
  run_cmd->add_option("--csv", run_csv, "write the report as CSV to this path");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep one parameter over seeds");
  std::string sw_file, sw_builtin, sw_axis, sw_values, sw_seeds, sw_csv, sw_duration;
  sweep_cmd->add_option("--scenario", sw_file, "scenario file");
  sweep_cmd->add_option("--builtin", sw_builtin, "builtin scenario name");
  sweep_cmd->add_option("--axis", sw_axis,
                        "ofdma|mumimo|aggregation|cca_threshold[:WLAN]|tx_power[:WLAN]|n_stas[:WLAN]")
      ->required();
  sweep_cmd->add_option("--values", sw_values, "comma-separated axis values")->required();
  sweep_cmd->add_option("--seeds", sw_seeds, "comma-separated seeds")->required();
  sweep_cmd->add_option("--csv", sw_csv, "output CSV path (default: stdout)");
  sweep_cmd->add_option("--duration", sw_duration, "override duration per run");

  // oracle
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "closed-form contention-free saturation throughput");
  int or_width = 20, or_streams = 1, or_agg = 1;
  oracle_cmd->add_option("--width", or_width, "channel width in MHz (20/40/80/160)");
  oracle_cmd->add_option("--streams", or_streams, "spatial streams");
  oracle_cmd->add_option("--agg", or_agg, "aggregated MPDUs per TXOP");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      hewsim::Scenario s = load_scenario(run_file, run_builtin);
      if (!run_duration.empty()) s.duration_ns = hewsim::parse_duration_ns(run_duration);
      const std::uint64_t seed = run_seed_set ? run_seed : s.seed;

      std::ofstream trace_out;
      hewsim::TraceSink sink;
      if (!run_trace.empty()) {
        trace_out.open(run_trace, std::ios::binary);
        if (!trace_out)
          throw hewsim::ConfigError("cannot write trace to '" + run_trace + "'");
        sink = [&trace_out](const hewsim::TraceEvent& ev) {
          trace_out << ev.format() << "\n";
        };
      }
      const auto result = hewsim::run(s, seed, 0, sink);
      print_report(result.report);
      if (!run_csv.empty())
        write_file(run_csv, hewsim::report_csv(result.report, "-", seed, true));
      return kExitOk;
    }

    if (*sweep_cmd) {
      hewsim::Scenario s = load_scenario(sw_file, sw_builtin);
      hewsim::SimTime duration = 0;
      if (!sw_duration.empty()) duration = hewsim::parse_duration_ns(sw_duration);
      const std::vector<std::string> values = split_list(sw_values);
      std::vector<std::uint64_t> seeds;
      for (const std::string& k : split_list(sw_seeds))
        seeds.push_back(std::stoull(k));
      const std::string csv = hewsim::sweep_csv(s, sw_axis, values, seeds, duration);
      if (sw_csv.empty())
        std::cout << csv;
      else
        write_file(sw_csv, csv);
      return kExitOk;
    }

    if (*oracle_cmd) {
      if (or_width % 20 != 0)
        throw hewsim::ConfigError("--width must be one of 20, 40, 80, 160");
      hewsim::PhyParams phy;
      const double thr = hewsim::analytic_saturation_throughput(
          phy, or_width / 20, or_streams, or_agg);
      std::printf("%.0f bits/s (%.3f Mb/s)\n", thr, thr / 1e6);
      return kExitOk;
    }
  } catch (const hewsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const hewsim::SimError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
