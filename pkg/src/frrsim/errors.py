"""Exception hierarchy shared across the simulator.

Configuration and construction problems raise eagerly; per-flow routing
failures are raised by forwarding functions and converted to a FlowTrace
status by the routing engine, never crashing a run.
"""

from __future__ import annotations


class FrrsimError(Exception):
    """Base class for all simulator errors."""


class InvalidParameterError(FrrsimError, ValueError):
    """A build parameter is out of its documented range."""


class BudgetError(FrrsimError, ValueError):
    """An adversary was asked for more failures than its target supports."""


class TopologyTooSmallError(FrrsimError, ValueError):
    """The topology is too small for the requested protocol structure."""


class PackingError(FrrsimError, RuntimeError):
    """Arborescence packing could not produce a verified set."""


class InsufficientConnectivityError(FrrsimError, ValueError):
    """Fewer edge-disjoint paths exist than were requested."""


class RoutingError(FrrsimError, RuntimeError):
    """Base for per-flow forwarding failures (recorded, not fatal)."""


class StrandedError(RoutingError):
    """No live candidate remains at the current node."""


class IntervalDisconnectedError(RoutingError):
    """All edges into the successor interval are failed."""


class HopOverflowError(RoutingError):
    """The packet exceeded the protocol's hop-field capacity."""
