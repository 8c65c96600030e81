"""Clos fat-tree adaptations of the interval and three-permutation protocols.

Forwarding rules depend on the role of the current node:

* bottom (pod p, interval j): up to a random top node of p inside interval j.
* top (pod p, i-th top, interval j): straight to the destination when it
  lives in p and the edge is up, otherwise down to a random bottom node of
  p in interval (j+1) mod K; for remote destinations, to a random node in
  interval j of block i.
* block (block b, interval j): over the direct link to the b-th top node
  of the destination's pod when up, otherwise to a random top node in
  vertical interval (j+1) mod K of block b.

The three-permutation variant is the same skeleton with K = 1 (whole
groups) and six hop-windowed stores per context. The -ID variants key
every store additionally by the packet's inport, so flows arriving over
different links follow independent permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import IntervalDisconnectedError, InvalidParameterError
from .permstore import ExplicitDomain, TruncatedPermStore, store_seed
from .protocols_complete import PacketHeader
from .topology import Role, Topology, TopologyKind

LOCAL_INPORT = -1


def _balanced_split(items: list[int], parts: int) -> list[tuple[int, ...]]:
    """Split into `parts` consecutive pieces whose sizes differ by <= 1."""
    base, rem = divmod(len(items), parts)
    out = []
    start = 0
    for i in range(parts):
        size = base + (1 if i < rem else 0)
        out.append(tuple(items[start:start + size]))
        start += size
    return out


@dataclass(frozen=True)
class ClosPartition:
    """Interval structure of one Clos topology.

    Bottom, top and block groups hold k/2 nodes each and are split into
    k_intervals consecutive pieces; the vertical group of block b holds the
    b-th top node of every pod (k nodes) and is split the same way.
    """

    k: int
    k_intervals: int
    bottom_intervals: dict[int, list[tuple[int, ...]]]
    top_intervals: dict[int, list[tuple[int, ...]]]
    block_intervals: dict[int, list[tuple[int, ...]]]
    vertical_intervals: dict[int, list[tuple[int, ...]]]
    interval_of: dict[int, int]


def build_clos_partition(k: int, k_intervals: int | None = None) -> ClosPartition:
    """Partition the Clos(k) node groups into K = floor(log2 k) intervals."""
    if k < 4 or k % 2 != 0:
        raise InvalidParameterError(f"clos partition needs even k >= 4, got {k}")
    K = int(math.floor(math.log2(k))) if k_intervals is None else k_intervals
    half = k // 2
    block_base = half * half

    def top_id(p: int, i: int) -> int:
        return block_base + (p - 1) * k + (i - 1)

    def bottom_id(p: int, i: int) -> int:
        return block_base + (p - 1) * k + half + (i - 1)

    def block_id(b: int, m: int) -> int:
        return (b - 1) * half + (m - 1)

    bottom_intervals: dict[int, list[tuple[int, ...]]] = {}
    top_intervals: dict[int, list[tuple[int, ...]]] = {}
    block_intervals: dict[int, list[tuple[int, ...]]] = {}
    vertical_intervals: dict[int, list[tuple[int, ...]]] = {}
    interval_of: dict[int, int] = {}

    for p in range(1, k + 1):
        tops = [top_id(p, i) for i in range(1, half + 1)]
        bottoms = [bottom_id(p, i) for i in range(1, half + 1)]
        top_intervals[p] = _balanced_split(tops, K)
        bottom_intervals[p] = _balanced_split(bottoms, K)
        for j, part in enumerate(top_intervals[p]):
            for v in part:
                interval_of[v] = j
        for j, part in enumerate(bottom_intervals[p]):
            for v in part:
                interval_of[v] = j
    for b in range(1, half + 1):
        members = [block_id(b, m) for m in range(1, half + 1)]
        block_intervals[b] = _balanced_split(members, K)
        for j, part in enumerate(block_intervals[b]):
            for v in part:
                interval_of[v] = j
        vertical = [top_id(p, b) for p in range(1, k + 1)]
        vertical_intervals[b] = _balanced_split(vertical, K)

    return ClosPartition(
        k=k,
        k_intervals=K,
        bottom_intervals=bottom_intervals,
        top_intervals=top_intervals,
        block_intervals=block_intervals,
        vertical_intervals=vertical_intervals,
        interval_of=interval_of,
    )


class ClosPermInstance:
    """Interval-D/ID and ThreeP-D/ID forwarding state on a Clos topology.

    mode "interval" uses K = floor(log2 k) intervals and one store per
    context; mode "threep" uses K = 1 and six stores selected by hop
    window (window i covers hops [(i-1)*floor(log2 k), i*floor(log2 k)),
    window 6 covers everything beyond). Stores are generated lazily from
    seed substreams, so -ID instances never materialize unused inports.
    """

    def __init__(self, topology: Topology, seed: int, mode: str, inport_keyed: bool):
        if topology.kind is not TopologyKind.CLOS:
            raise InvalidParameterError("clos protocols need a clos topology")
        if mode not in ("interval", "threep"):
            raise InvalidParameterError(f"unknown clos protocol mode {mode!r}")
        self.topology = topology
        self.seed = seed
        self.mode = mode
        self.inport_keyed = inport_keyed
        self.window_width = max(1, int(math.floor(math.log2(topology.k))))
        self.partition = build_clos_partition(
            topology.k, k_intervals=1 if mode == "threep" else None
        )
        self._stores: dict[tuple, TruncatedPermStore] = {}
        self.protocol_id = ("threep-" if mode == "threep" else "interval-") + (
            "id" if inport_keyed else "d"
        )

    def window_for_hop(self, hop: int) -> int:
        if self.mode != "threep":
            return 0
        return min(hop // self.window_width + 1, 6)

    def _store(self, v: int, dst: int, window: int, inport: int, domain: tuple[int, ...]) -> TruncatedPermStore:
        key = (v, dst, window, inport if self.inport_keyed else LOCAL_INPORT)
        st = self._stores.get(key)
        if st is None:
            seed = store_seed(self.seed, self.protocol_id, *key)
            st = TruncatedPermStore(v, ExplicitDomain(domain), seed, len(domain))
            self._stores[key] = st
        return st

    def _candidate_domain(self, v: int, dst: int, live) -> tuple[int, ...] | int:
        """Either the direct next hop (int) or the store domain (tuple)."""
        topo = self.topology
        info = topo.info(v)
        part = self.partition
        K = part.k_intervals
        if info.role is Role.BOTTOM:
            j = part.interval_of[v]
            return part.top_intervals[info.pod][j]
        if info.role is Role.TOP:
            j = part.interval_of[v]
            if topo.info(dst).pod == info.pod:
                if live(dst):
                    return dst
                return part.bottom_intervals[info.pod][(j + 1) % K]
            return part.block_intervals[info.index_in_group][j]
        # block node: direct link to the b-th top node of the destination pod
        j = part.interval_of[v]
        b = info.block
        direct = self.topology.top_node(topo.info(dst).pod, b)
        if live(direct):
            return direct
        return part.vertical_intervals[b][(j + 1) % K]

    def start(self, src: int, dst: int):
        return (0, LOCAL_INPORT)

    def step(self, v: int, dst: int, state, live: Callable[[int], bool]):
        hop, inport = state
        got = self._candidate_domain(v, dst, live)
        if isinstance(got, int):
            return got, (hop + 1, v)
        window = self.window_for_hop(hop)
        nxt = self._store(v, dst, window, inport, got).first_live(live, exclude=(dst, v))
        if nxt is None:
            raise IntervalDisconnectedError(
                f"node {v} lost all edges into its candidate interval toward {dst}"
            )
        return nxt, (hop + 1, v)


def build_interval_clos(topology: Topology, seed: int, inport_keyed: bool = False) -> ClosPermInstance:
    return ClosPermInstance(topology, seed, mode="interval", inport_keyed=inport_keyed)


def build_threep_clos(topology: Topology, seed: int, inport_keyed: bool = False) -> ClosPermInstance:
    return ClosPermInstance(topology, seed, mode="threep", inport_keyed=inport_keyed)


def forward_interval_d(
    instance: ClosPermInstance,
    v: int,
    hdr: PacketHeader,
    inport: int,
    live: Callable[[int], bool],
    variant: str = "d",
) -> int:
    """Next hop of the Interval-D/ID rule; caller updates hop and inport."""
    if (variant == "id") != instance.inport_keyed:
        raise InvalidParameterError("variant does not match the instance keying")
    nxt, _ = instance.step(v, hdr.dst, (hdr.hop, inport), live)
    return nxt


def forward_threep_clos(
    instance: ClosPermInstance,
    v: int,
    hdr: PacketHeader,
    inport: int,
    live: Callable[[int], bool],
    variant: str = "d",
) -> int:
    """Next hop of the ThreeP-D/ID rule; caller updates hop and inport."""
    if (variant == "id") != instance.inport_keyed:
        raise InvalidParameterError("variant does not match the instance keying")
    nxt, _ = instance.step(v, hdr.dst, (hdr.hop, inport), live)
    return nxt
