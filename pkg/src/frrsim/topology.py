"""Topology construction and adversarial failure scenarios.

Two topology kinds are supported: the complete graph on n nodes and the
three-layer Clos fat-tree parameterized by an even port count k. Complete
graphs keep their edge set implicit (membership and sampling are computed
from the triangular index), so large instances stay cheap; Clos graphs
materialize adjacency.

Failure scenarios are immutable sets of failed undirected edges produced
by oblivious adversary selectors: selectors may use their own seed stream
but never read protocol state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional

from .errors import BudgetError, InvalidParameterError
from .seeding import substream


class TopologyKind(str, Enum):
    COMPLETE = "complete"
    CLOS = "clos"


class Role(str, Enum):
    PLAIN = "plain"
    BOTTOM = "bottom"
    TOP = "top"
    BLOCK = "block"


@dataclass(frozen=True)
class NodeInfo:
    """Role and coordinates of one node. Pod/block/index are 1-based."""

    id: int
    role: Role
    pod: Optional[int] = None
    block: Optional[int] = None
    index_in_group: Optional[int] = None


def edge_key(u: int, v: int) -> tuple[int, int]:
    """Canonical unordered edge representation (u < v)."""
    return (u, v) if u < v else (v, u)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _tri_cum(n: int, u: int) -> int:
    # number of edges (a, b), a < b, with a < u in lexicographic order
    return u * (2 * n - u - 1) // 2


def _edge_from_index(n: int, idx: int) -> tuple[int, int]:
    """Decode the idx-th edge of K_n in lexicographic (u, v) order."""
    t = 2 * n - 1
    u = (t - math.isqrt(t * t - 8 * idx)) // 2
    while _tri_cum(n, u + 1) <= idx:
        u += 1
    while _tri_cum(n, u) > idx:
        u -= 1
    v = u + 1 + (idx - _tri_cum(n, u))
    return (u, v)


class Topology:
    """Immutable node/edge structure; safe to share across workers."""

    def __init__(
        self,
        kind: TopologyKind,
        nodes: tuple[NodeInfo, ...],
        k: Optional[int] = None,
        adjacency: Optional[dict[int, frozenset[int]]] = None,
    ):
        self.kind = kind
        self.nodes = nodes
        self.n = len(nodes)
        self.k = k
        self._adj = adjacency
        self._edge_list: Optional[list[tuple[int, int]]] = None

    # -- edge set ---------------------------------------------------------

    @property
    def edge_count(self) -> int:
        if self.kind is TopologyKind.COMPLETE:
            return self.n * (self.n - 1) // 2
        return sum(len(s) for s in self._adj.values()) // 2

    def has_edge(self, u: int, v: int) -> bool:
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            return False
        if self.kind is TopologyKind.COMPLETE:
            return True
        return v in self._adj[u]

    def neighbors(self, v: int) -> list[int]:
        if self.kind is TopologyKind.COMPLETE:
            return [u for u in range(self.n) if u != v]
        return sorted(self._adj[v])

    def degree(self, v: int) -> int:
        if self.kind is TopologyKind.COMPLETE:
            return self.n - 1
        return len(self._adj[v])

    def iter_edges(self) -> Iterator[tuple[int, int]]:
        if self.kind is TopologyKind.COMPLETE:
            for u in range(self.n):
                for v in range(u + 1, self.n):
                    yield (u, v)
        else:
            for u in range(self.n):
                for v in self._adj[u]:
                    if u < v:
                        yield (u, v)

    def sorted_edges(self) -> list[tuple[int, int]]:
        if self._edge_list is None:
            self._edge_list = sorted(self.iter_edges())
        return self._edge_list

    # -- Clos accessors ---------------------------------------------------

    def bottom_nodes(self) -> list[int]:
        if self.kind is TopologyKind.COMPLETE:
            return list(range(self.n))
        return [ni.id for ni in self.nodes if ni.role is Role.BOTTOM]

    def top_node(self, pod: int, index: int) -> int:
        """Id of the index-th top node of `pod` (both 1-based)."""
        k = self.k
        return k * k // 4 + (pod - 1) * k + (index - 1)

    def bottom_node(self, pod: int, index: int) -> int:
        k = self.k
        return k * k // 4 + (pod - 1) * k + k // 2 + (index - 1)

    def block_node(self, block: int, index: int) -> int:
        k = self.k
        return (block - 1) * (k // 2) + (index - 1)

    def info(self, v: int) -> NodeInfo:
        return self.nodes[v]


def build_complete(n: int) -> Topology:
    """Complete graph K_n; every pair of distinct nodes is connected."""
    if n < 2:
        raise InvalidParameterError(f"complete graph needs n >= 2, got {n}")
    nodes = tuple(NodeInfo(id=i, role=Role.PLAIN) for i in range(n))
    return Topology(TopologyKind.COMPLETE, nodes)


def build_clos(k: int) -> Topology:
    """Three-layer Clos fat-tree with k pods and k/2 blocks of k/2 nodes.

    Node ids are assigned block-major first (all block nodes), then per pod
    the top nodes followed by the bottom nodes; this fixed layout keeps
    interval partitions reproducible. Top/bottom nodes of one pod form a
    complete bipartite graph and the i-th top node of every pod is adjacent
    to all k/2 nodes of block i.
    """
    if k < 4 or k % 2 != 0:
        raise InvalidParameterError(f"clos needs even k >= 4, got {k}")
    half = k // 2
    nodes: list[NodeInfo] = []
    for b in range(1, half + 1):
        for m in range(1, half + 1):
            nodes.append(NodeInfo(id=len(nodes), role=Role.BLOCK, block=b, index_in_group=m))
    for p in range(1, k + 1):
        for i in range(1, half + 1):
            nodes.append(NodeInfo(id=len(nodes), role=Role.TOP, pod=p, index_in_group=i))
        for i in range(1, half + 1):
            nodes.append(NodeInfo(id=len(nodes), role=Role.BOTTOM, pod=p, index_in_group=i))

    adj: dict[int, set[int]] = {ni.id: set() for ni in nodes}
    block_base = half * half

    def top_id(p: int, i: int) -> int:
        return block_base + (p - 1) * k + (i - 1)

    def bottom_id(p: int, i: int) -> int:
        return block_base + (p - 1) * k + half + (i - 1)

    def block_id(b: int, m: int) -> int:
        return (b - 1) * half + (m - 1)

    for p in range(1, k + 1):
        for i in range(1, half + 1):
            t = top_id(p, i)
            for j in range(1, half + 1):
                u = bottom_id(p, j)
                adj[t].add(u)
                adj[u].add(t)
            for m in range(1, half + 1):
                u = block_id(i, m)
                adj[t].add(u)
                adj[u].add(t)

    frozen = {v: frozenset(s) for v, s in adj.items()}
    return Topology(TopologyKind.CLOS, tuple(nodes), k=k, adjacency=frozen)


@dataclass(frozen=True)
class FailureScenario:
    """A set of failed undirected edges plus adversary budget metadata."""

    failed: frozenset[tuple[int, int]]
    destination: Optional[int] = None
    alpha: Optional[float] = None

    def counts(self) -> tuple[int, int]:
        """(|F_dest|, |F_inner|) relative to the scenario destination."""
        if self.destination is None:
            return (0, len(self.failed))
        d = self.destination
        n_dest = sum(1 for u, v in self.failed if u == d or v == d)
        return (n_dest, len(self.failed) - n_dest)

    def is_failed(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self.failed


def fail_random_fraction(topology: Topology, p: float, seed: int) -> FailureScenario:
    """Fail exactly round(p * |E|) distinct edges chosen uniformly at random.

    Rounding is half-up. Deterministic for a given seed.
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"fraction p must be in [0, 1], got {p}")
    total = topology.edge_count
    count = min(_round_half_up(p * total), total)
    rng = substream("adv-random", seed)
    if topology.kind is TopologyKind.COMPLETE:
        idxs = rng.sample(range(total), count)
        failed = frozenset(_edge_from_index(topology.n, i) for i in idxs)
    else:
        failed = frozenset(rng.sample(topology.sorted_edges(), count))
    return FailureScenario(failed=failed)


def fail_destination_edges(
    topology: Topology,
    d: int,
    count: int,
    selector: str = "lowest",
    seed: int = 0,
    alpha: Optional[float] = None,
) -> FailureScenario:
    """Fail `count` edges incident to destination d.

    selector "lowest" takes the neighbors with smallest ids; "seeded" draws
    them from the adversary seed stream. Selection never depends on
    protocol seeds (oblivious adversary).
    """
    neighbors = topology.neighbors(d)
    if count > len(neighbors):
        raise BudgetError(f"cannot fail {count} destination edges, degree({d}) = {len(neighbors)}")
    victims = _select(neighbors, count, selector, ("adv-dest", seed, d))
    failed = frozenset(edge_key(v, d) for v in victims)
    return FailureScenario(failed=failed, destination=d, alpha=alpha)


def fail_interval_targeted(
    topology: Topology,
    d: int,
    interval_index: int,
    partition,
    budget: int,
    selector: str = "lowest",
    seed: int = 0,
    alpha: Optional[float] = None,
) -> FailureScenario:
    """Fail destination edges (v, d) for `budget` nodes v inside one interval.

    `partition` is an IntervalPartition over the node ids; all failed edges
    have their non-d endpoint in interval `interval_index`.
    """
    members = [v for v in partition.interval_nodes(interval_index) if v != d and topology.has_edge(v, d)]
    if budget > len(members):
        raise BudgetError(
            f"budget {budget} exceeds interval {interval_index} candidate count {len(members)}"
        )
    victims = _select(members, budget, selector, ("adv-interval", seed, d, interval_index))
    failed = frozenset(edge_key(v, d) for v in victims)
    return FailureScenario(failed=failed, destination=d, alpha=alpha)


def _select(candidates: list[int], count: int, selector: str, labels: tuple) -> list[int]:
    if selector == "lowest":
        return sorted(candidates)[:count]
    if selector == "seeded":
        return substream(*labels).sample(sorted(candidates), count)
    raise InvalidParameterError(f"unknown selector {selector!r}")


class BudgetMode(str, Enum):
    GLOBAL_ALPHA_N = "global-alpha-n"
    PER_INTERVAL_ALPHA_I = "per-interval-alpha-i"


def validate_budget(
    scenario: FailureScenario,
    mode: BudgetMode,
    alpha: float,
    n: Optional[int] = None,
    partition=None,
) -> tuple[bool, tuple[int, int]]:
    """Check the scenario against an adversary budget.

    GLOBAL_ALPHA_N allows up to alpha * n failures; PER_INTERVAL_ALPHA_I
    allows up to alpha * I where I is the (nominal) interval size of the
    supplied partition. Returns (ok, (|F_dest|, |F_inner|)). Only hard
    violations flip `ok`; alpha itself is validated as 0 < alpha < 1.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    mode = BudgetMode(mode)
    if mode is BudgetMode.GLOBAL_ALPHA_N:
        if n is None:
            raise InvalidParameterError("global budget mode requires n")
        limit = alpha * n
    else:
        if partition is None:
            raise InvalidParameterError("per-interval budget mode requires a partition")
        limit = alpha * (partition.n / partition.k_int)
    ok = len(scenario.failed) <= limit + 1e-9
    return ok, scenario.counts()


# -- line-oriented serialization (golden-test format) ----------------------


def serialize_scenario(topology: Topology, scenario: FailureScenario) -> str:
    """Header `kind n k` then one `u v` line per failed edge, sorted."""
    k = topology.k if topology.k is not None else "-"
    lines = [f"{topology.kind.value} {topology.n} {k}"]
    lines.extend(f"{u} {v}" for u, v in sorted(scenario.failed))
    return "\n".join(lines) + "\n"


def parse_scenario(text: str) -> tuple[Topology, FailureScenario]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InvalidParameterError("empty scenario text")
    kind_s, n_s, k_s = lines[0].split()
    if kind_s == TopologyKind.COMPLETE.value:
        topology = build_complete(int(n_s))
    elif kind_s == TopologyKind.CLOS.value:
        topology = build_clos(int(k_s))
        if topology.n != int(n_s):
            raise InvalidParameterError(f"clos k={k_s} implies n={topology.n}, header says {n_s}")
    else:
        raise InvalidParameterError(f"unknown topology kind {kind_s!r}")
    failed = set()
    for ln in lines[1:]:
        u, v = (int(x) for x in ln.split())
        if not topology.has_edge(u, v):
            raise InvalidParameterError(f"failed edge ({u}, {v}) is not a topology edge")
        failed.add(edge_key(u, v))
    return topology, FailureScenario(failed=frozenset(failed))
