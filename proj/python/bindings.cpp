// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "hewsim/analytics.hpp"
#include "hewsim/channel.hpp"
#include "hewsim/multiuser.hpp"
#include "hewsim/scenario.hpp"

namespace py = pybind11;
using namespace hewsim;

namespace {

py::dict report_to_dict(const Report& rep) {
  py::dict out;
  out["jain"] = rep.jain;
  out["measured_window_ns"] = rep.measured_window_ns;
  out["total_throughput_bps"] = rep.total_throughput_bps();
  py::list wlans;
  for (const auto& w : rep.wlans) {
    py::dict d;
    d["id"] = w.id;
    d["throughput_bps"] = w.throughput_bps;
    d["collision_prob"] = w.collision_prob;
    d["airtime_share"] = w.airtime_share;
    wlans.append(d);
  }
  out["wlans"] = wlans;
  py::list nodes;
  for (const auto& n : rep.nodes) {
    py::dict d;
    d["id"] = n.id;
    d["wlan"] = n.wlan;
    d["throughput_bps"] = n.throughput_bps;
    d["collision_prob"] = n.collision_prob;
    d["airtime_share"] = n.airtime_share;
    nodes.append(d);
  }
  out["nodes"] = nodes;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dense-WLAN MAC simulator: CSMA/CA vs CSMA/ECA contention, dynamic "
            "channel bonding, OFDMA, MU-MIMO and full-duplex exchanges.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimError>(m, "SimError", PyExc_RuntimeError);

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("name", [](const Scenario& s) { return s.name; })
      .def_property(
          "seed", [](const Scenario& s) { return s.seed; },
          [](Scenario& s, std::uint64_t v) { s.seed = v; })
      .def_property(
          "duration_ns", [](const Scenario& s) { return s.duration_ns; },
          [](Scenario& s, SimTime v) { s.duration_ns = v; })
      .def_property_readonly("wlan_ids",
                             [](const Scenario& s) {
                               std::vector<std::string> ids;
                               for (const auto& w : s.wlans) ids.push_back(w.id);
                               return ids;
                             })
      .def_property_readonly("node_count",
                             [](const Scenario& s) {
                               std::size_t n = 0;
                               for (const auto& w : s.wlans) n += 1 + w.stas.size();
                               return n;
                             })
      .def("validate", [](const Scenario& s) { return validate(s); })
      .def("render", [](const Scenario& s) { return render_scenario(s); })
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario '" + s.name + "', " + std::to_string(s.wlans.size()) +
               " wlan(s)>";
      });

  m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); },
        py::arg("text"), "Parse a scenario document (see docs/scenario-format.md).");
  m.def("builtin_scenario", [](const std::string& name) { return builtin_scenario(name); },
        py::arg("name"),
        "fig2-overlap, stadium-toy, train-toy or apartment-toy.");
  m.def("apply_axis",
        [](Scenario& s, const std::string& axis, const std::string& value) {
          apply_axis(s, axis, value);
        },
        py::arg("scenario"), py::arg("axis"), py::arg("value"),
        "Apply one sweep-axis setting in place (ofdma, mumimo, aggregation, "
        "cca_threshold[:wlan], tx_power[:wlan], n_stas[:wlan]).");

  m.def(
      "run",
      [](const Scenario& s, py::object seed, SimTime duration_ns,
         py::object trace_path) {
        const std::uint64_t sd =
            seed.is_none() ? s.seed : seed.cast<std::uint64_t>();
        TraceSink sink;
        std::shared_ptr<std::ofstream> out;
        if (!trace_path.is_none()) {
          out = std::make_shared<std::ofstream>(trace_path.cast<std::string>(),
                                                std::ios::binary);
          if (!*out) throw ConfigError("cannot open trace path for writing");
          sink = [out](const TraceEvent& ev) { (*out) << ev.format() << "\n"; };
        }
        RunResult rr;
        {
          py::gil_scoped_release release;
          rr = hewsim::run(s, sd, duration_ns, sink);
        }
        return report_to_dict(rr.report);
      },
      py::arg("scenario"), py::arg("seed") = py::none(), py::arg("duration_ns") = 0,
      py::arg("trace_path") = py::none(),
      "Simulate and reduce to per-WLAN/per-node throughput, collision "
      "probability, airtime share and Jain fairness.");

  m.def(
      "sweep_csv",
      [](const Scenario& s, const std::string& axis,
         const std::vector<std::string>& values,
         const std::vector<std::uint64_t>& seeds, SimTime duration_ns) {
        py::gil_scoped_release release;
        return hewsim::sweep_csv(s, axis, values, seeds, duration_ns);
      },
      py::arg("scenario"), py::arg("axis"), py::arg("values"), py::arg("seeds"),
      py::arg("duration_ns") = 0,
      "Sweep one axis over seeds; returns the CSV text (deterministic).");

  m.def(
      "analytic_saturation_throughput",
      [](int width_mhz, int streams, int aggregation) {
        if (width_mhz % 20 != 0)
          throw ConfigError("width_mhz must be one of 20, 40, 80, 160");
        PhyParams phy;
        return analytic_saturation_throughput(phy, width_mhz / 20, streams,
                                              aggregation);
      },
      py::arg("width_mhz") = 20, py::arg("streams") = 1, py::arg("aggregation") = 1,
      "Closed-form contention-free saturation throughput with default PHY "
      "parameters, in bits/s.");

  m.def("rts_prime_bits", &rts_prime_bits, py::arg("n_tx"),
        "Size of the extended RTS announcing n_tx OFDMA subchannels.");
  m.def(
      "path_loss_db",
      [](double distance_m, double pl0, double exponent) {
        PropagationModel model;
        model.pl0_db = pl0;
        model.exponent = exponent;
        return path_loss_db(distance_m, model);
      },
      py::arg("distance_m"), py::arg("pl0") = 40.0, py::arg("exponent") = 3.5,
      "Log-distance path loss in dB, clamped at 1 m.");
  m.def("jain_index",
        [](const std::vector<double>& xs) {
          return jain_index(std::span<const double>(xs.data(), xs.size()));
        },
        py::arg("values"));
}
