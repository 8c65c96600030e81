"""Deterministic simulator for randomized local fast-rerouting protocols.

Build a topology, pick an adversary, construct a protocol instance from a
seed, and route traffic; see the README for the CLI and the experiment
harness.
"""

from .engine import (
    DemandMatrix,
    FlowStatus,
    FlowTrace,
    LoadReport,
    all_to_all,
    all_to_one,
    gravity_demands,
    route_flow,
)
from .experiments import RunConfig, build_protocol, calibrate, run_single, run_sweep
from .protocols_complete import PacketHeader, params_for
from .topology import (
    FailureScenario,
    NodeInfo,
    Role,
    Topology,
    TopologyKind,
    build_clos,
    build_complete,
    fail_destination_edges,
    fail_interval_targeted,
    fail_random_fraction,
    validate_budget,
)

__version__ = "0.1.0"

__all__ = [
    "DemandMatrix",
    "FailureScenario",
    "FlowStatus",
    "FlowTrace",
    "LoadReport",
    "NodeInfo",
    "PacketHeader",
    "Role",
    "RunConfig",
    "Topology",
    "TopologyKind",
    "all_to_all",
    "all_to_one",
    "build_clos",
    "build_complete",
    "build_protocol",
    "calibrate",
    "fail_destination_edges",
    "fail_interval_targeted",
    "fail_random_fraction",
    "gravity_demands",
    "params_for",
    "route_flow",
    "run_single",
    "run_sweep",
    "validate_budget",
]
