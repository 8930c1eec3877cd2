# SPDX-License-Identifier: Apache-2.0
"""Dense-WLAN MAC simulator bindings.

The heavy lifting lives in the C++ core; this package exposes scenario
parsing, the built-in topologies, single runs, parameter sweeps and the
closed-form saturation oracle.
"""

from hewsim._core import (  # noqa: F401
    ConfigError,
    Scenario,
    SimError,
    analytic_saturation_throughput,
    apply_axis,
    builtin_scenario,
    jain_index,
    parse_scenario,
    path_loss_db,
    rts_prime_bits,
    run,
    sweep_csv,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "SimError",
    "analytic_saturation_throughput",
    "apply_axis",
    "builtin_scenario",
    "jain_index",
    "parse_scenario",
    "path_loss_db",
    "rts_prime_bits",
    "run",
    "sweep_csv",
]

__version__ = "0.1.0"
