"""Python access to the chain accelerator model (scheduler, simulator, reports)."""

import json

from ._core import (
    CapacityError,
    ConfigError,
    InvariantError,
    SimulationFault,
    golden_conv,
    partition_chain,
    peak_gops,
    report_json,
    simulate,
    synth_layer,
    validate_schedule,
)


def report(network="alexnet", batch=128, num_pes=576, overhead_cycles=0):
    """Performance report as a dict (parsed from the JSON the CLI writes)."""
    return json.loads(report_json(network, batch, num_pes, overhead_cycles))


__all__ = [
    "CapacityError",
    "ConfigError",
    "InvariantError",
    "SimulationFault",
    "golden_conv",
    "partition_chain",
    "peak_gops",
    "report",
    "report_json",
    "simulate",
    "synth_layer",
    "validate_schedule",
]
