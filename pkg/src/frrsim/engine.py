"""Flow routing and load accounting over a failed topology.

A flow is one deterministic path produced by iterating a protocol's step
function against the scenario's live-edge oracle. Load bookkeeping uses
integer micro-units (weights quantized to 2^-20) so that the conservation
identity sum(edge loads) == sum(weight * hops) holds exactly even for
demand-weighted traffic, and repeated runs aggregate bit-identically.

Node load counts every visited node including the source and excluding the
destination (configurable); edge load counts every traversal, backtracks
and loop hops included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import HopOverflowError, IntervalDisconnectedError, StrandedError
from .seeding import substream
from .topology import FailureScenario, Topology, TopologyKind, edge_key

LOAD_SCALE = 1 << 20


class FlowStatus(str, Enum):
    DELIVERED = "delivered"
    HOP_LIMIT = "hop-limit"
    STRANDED = "stranded"
    INTERVAL_DISCONNECTED = "interval-disconnected"


@dataclass(frozen=True)
class FlowTrace:
    """One flow's routed path and outcome."""

    src: int
    dst: int
    path: tuple[int, ...]
    status: FlowStatus
    weight: float = 1.0

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    @property
    def delivered(self) -> bool:
        return self.status is FlowStatus.DELIVERED

    @property
    def revisits_node(self) -> bool:
        return len(set(self.path)) < len(self.path)


@dataclass
class LoadReport:
    """Accumulated per-node and per-edge load plus hop statistics."""

    node_load: dict[int, float]
    edge_load: dict[tuple[int, int], float]
    max_node_load: float
    max_edge_load: float
    hop_mean: Optional[float]
    hop_max: int
    flow_count: int
    undelivered: int
    loop_events: int
    status_counts: dict[str, int] = field(default_factory=dict)

    @property
    def interval_disconnected(self) -> int:
        return self.status_counts.get(FlowStatus.INTERVAL_DISCONNECTED.value, 0)


def route_flow(
    topology: Topology,
    scenario: FailureScenario,
    instance,
    src: int,
    dst: int,
    hop_limit: int,
    weight: float = 1.0,
) -> FlowTrace:
    """Route one flow; abnormal terminations become trace statuses."""
    if src == dst:
        raise ValueError("flow source equals destination")
    if hop_limit < 1:
        raise ValueError("hop_limit must be >= 1")
    failed = scenario.failed
    state = instance.start(src, dst)
    path = [src]
    v = src
    status = FlowStatus.HOP_LIMIT
    for _ in range(hop_limit):
        live = _live_oracle(topology, failed, v)
        try:
            nxt, state = instance.step(v, dst, state, live)
        except IntervalDisconnectedError:
            status = FlowStatus.INTERVAL_DISCONNECTED
            break
        except HopOverflowError:
            status = FlowStatus.HOP_LIMIT
            break
        except StrandedError:
            status = FlowStatus.STRANDED
            break
        if not topology.has_edge(v, nxt) or edge_key(v, nxt) in failed:
            raise RuntimeError(
                f"protocol {getattr(instance, 'protocol_id', '?')} forwarded over "
                f"a failed or missing edge ({v}, {nxt})"
            )
        path.append(nxt)
        v = nxt
        if v == dst:
            status = FlowStatus.DELIVERED
            break
    return FlowTrace(src=src, dst=dst, path=tuple(path), status=status, weight=weight)


def _live_oracle(topology: Topology, failed: frozenset, v: int):
    if topology.kind is TopologyKind.COMPLETE:
        n = topology.n
        return lambda u: u != v and 0 <= u < n and (
            (v, u) if v < u else (u, v)) not in failed
    adj = topology._adj[v]
    return lambda u: u in adj and ((v, u) if v < u else (u, v)) not in failed


def default_hop_limit(topology: Topology, instance) -> int:
    """Protocol-aware hop budget, an order of magnitude above guarantees."""
    pid = getattr(instance, "protocol_id", "")
    if topology.kind is TopologyKind.COMPLETE:
        base = 20 * math.ceil(math.log2(max(topology.n, 2)))
        params = getattr(instance, "params", None)
        if pid == "threep" and params is not None:
            # delivery can legitimately take up to 3*C1 hops
            return max(base, 4 * params.c1)
        return base
    k = topology.k
    ell = getattr(instance, "ell", k // 2)
    if pid == "square1":
        return 2 * ell * (4 + 2)
    if pid.startswith("a-"):
        return 12 * math.ceil(math.log2(k)) * ell
    return 20 * math.ceil(math.log2(max(topology.n, 2)))


def all_to_one(
    topology: Topology,
    scenario: FailureScenario,
    instance,
    d: int,
    hop_limit: Optional[int] = None,
    sources: Optional[Iterable[int]] = None,
    count_source: bool = True,
) -> LoadReport:
    """Route one unit flow from every source (default: all other nodes) to d."""
    if hop_limit is None:
        hop_limit = default_hop_limit(topology, instance)
    if sources is None:
        if topology.kind is TopologyKind.CLOS:
            sources = [v for v in topology.bottom_nodes() if v != d]
        else:
            sources = [v for v in range(topology.n) if v != d]
    traces = [
        route_flow(topology, scenario, instance, src, d, hop_limit)
        for src in sorted(sources)
    ]
    _check_shared_perm_collisions(instance, scenario, traces)
    return aggregate(traces, count_source=count_source)


@dataclass(frozen=True)
class DemandMatrix:
    """Gravity demands: D(s, t) proportional to node weight products."""

    nodes: tuple[int, ...]
    weights: dict[int, float]

    def demand(self, s: int, t: int) -> float:
        if s == t:
            return 0.0
        return self.weights[s] * self.weights[t]

    def pairs(self):
        for s in self.nodes:
            for t in self.nodes:
                if s != t:
                    yield s, t, self.demand(s, t)


def gravity_demands(nodes: Iterable[int], seed: Optional[int]) -> DemandMatrix:
    """Unit-mean gravity model; seed None degenerates to all-ones weights."""
    nodes = tuple(sorted(nodes))
    if seed is None:
        weights = {v: 1.0 for v in nodes}
    else:
        rng = substream("gravity", seed)
        weights = {v: rng.expovariate(1.0) for v in nodes}
    return DemandMatrix(nodes=nodes, weights=weights)


def all_to_all(
    topology: Topology,
    scenario: FailureScenario,
    instance,
    demands: DemandMatrix,
    hop_limit: Optional[int] = None,
    count_source: bool = True,
) -> LoadReport:
    """Route one demand-weighted flow per ordered pair of demand nodes."""
    if hop_limit is None:
        hop_limit = default_hop_limit(topology, instance)
    traces = []
    for s, t, w in demands.pairs():
        if w == 0.0:
            continue
        traces.append(route_flow(topology, scenario, instance, s, t, hop_limit, weight=w))
    return aggregate(traces, count_source=count_source)


def aggregate(traces: list[FlowTrace], count_source: bool = True) -> LoadReport:
    """Fold traces into a LoadReport; exact in integer micro-units."""
    node_acc: dict[int, int] = {}
    edge_acc: dict[tuple[int, int], int] = {}
    weighted_hops = 0
    hop_max = 0
    hop_sum = 0
    delivered = 0
    loop_events = 0
    status_counts: dict[str, int] = {}
    for tr in traces:
        w = round(tr.weight * LOAD_SCALE)
        nodes = tr.path[:-1] if tr.path[-1] == tr.dst else tr.path
        if not count_source:
            nodes = nodes[1:]
        for v in nodes:
            node_acc[v] = node_acc.get(v, 0) + w
        for u, v in zip(tr.path, tr.path[1:]):
            e = edge_key(u, v)
            edge_acc[e] = edge_acc.get(e, 0) + w
        weighted_hops += w * tr.hops
        status_counts[tr.status.value] = status_counts.get(tr.status.value, 0) + 1
        if tr.delivered:
            delivered += 1
            hop_sum += tr.hops
        hop_max = max(hop_max, tr.hops)
        if tr.revisits_node:
            loop_events += 1
    if sum(edge_acc.values()) != weighted_hops:
        raise RuntimeError("load conservation violated: sum(edge load) != sum(weight * hops)")
    return LoadReport(
        node_load={v: x / LOAD_SCALE for v, x in node_acc.items()},
        edge_load={e: x / LOAD_SCALE for e, x in edge_acc.items()},
        max_node_load=max(node_acc.values()) / LOAD_SCALE if node_acc else 0.0,
        max_edge_load=max(edge_acc.values()) / LOAD_SCALE if edge_acc else 0.0,
        hop_mean=hop_sum / delivered if delivered else None,
        hop_max=hop_max,
        flow_count=len(traces),
        undelivered=len(traces) - delivered,
        loop_events=loop_events,
        status_counts=status_counts,
    )


def _check_shared_perm_collisions(instance, scenario: FailureScenario, traces: list[FlowTrace]) -> None:
    """Global-phase invariant: with no inner failures, no node hosts two
    flows at the same hop value below E2 (destination visits excluded)."""
    if getattr(instance, "protocol_id", "") != "sharedperm":
        return
    if scenario.destination is None or scenario.counts()[1] != 0:
        return
    e2 = instance.params.e2
    seen: set[tuple[int, int]] = set()
    for tr in traces:
        for h, v in enumerate(tr.path):
            if h >= e2 or v == tr.dst:
                continue
            key = (v, h)
            if key in seen:
                raise RuntimeError(
                    f"shared-perm collision: node {v} hosts two flows at hop {h}"
                )
            seen.add(key)
