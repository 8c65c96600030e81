"""The three randomized failover protocols on complete graphs.

All three share the same skeleton: try the direct edge to the destination
first, otherwise consult a seeded permutation store and forward to the
first live candidate. They differ in how stores are organized:

* three-perm: three hop-windowed permutations per node; packets trapped in
  a temporary cycle escape when the hop counter crosses into the next
  window.
* intervals: node ids are partitioned into consecutive intervals and each
  node's store only contains the successor interval, which rules out
  cycles structurally (the last interval wraps to the first).
* shared-perm: nodes agree on one global permutation per hop value (drawn
  from a shared seed unknown to the adversary) and fall back to local
  stores once an inner-edge failure bumps the hop field to E2.

Instances are deterministic functions of (topology, alpha, seeds) and are
never mutated after construction apart from internal lazy caches, which
are pure memoization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import (
    HopOverflowError,
    IntervalDisconnectedError,
    InvalidParameterError,
    StrandedError,
    TopologyTooSmallError,
)
from .permstore import ExplicitDomain, RangeExcluding, TruncatedPermStore, store_seed
from .seeding import substream
from .topology import Topology, TopologyKind


@dataclass
class PacketHeader:
    """Mutable per-packet header: source, destination, hop counter."""

    src: int
    dst: int
    hop: int = 0


def log_inv_alpha(n: int, alpha: float) -> float:
    """log base 1/alpha of n."""
    return math.log(n) / math.log(1.0 / alpha)


def _ceil_snapped(x: float) -> int:
    # values like 16 * log2(1024) must come out as exactly 160; snap
    # near-integers before ceiling so float noise cannot inflate constants
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return int(math.ceil(x))


def _round_nearest(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class ProtocolParams:
    """Derived constants for one protocol at (n, alpha)."""

    n: int
    alpha: float
    protocol: str
    c1: Optional[int] = None
    c2: Optional[int] = None
    e2: Optional[int] = None
    interval_size: Optional[float] = None
    k_int: Optional[int] = None
    num_perms: int = 0
    prefix_len: int = 0


def params_for(n: int, alpha: float, protocol: str) -> ProtocolParams:
    """Compute every derived constant for `protocol` in {threep, intervals, sharedperm}."""
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 4:
        raise InvalidParameterError(f"protocol parameters need n >= 4, got {n}")
    log_n = log_inv_alpha(n, alpha)
    prefix_len = max(1, _ceil_snapped(3 * log_n))
    if protocol == "threep":
        c1 = _ceil_snapped(16 * log_n)
        return ProtocolParams(
            n=n, alpha=alpha, protocol=protocol,
            c1=c1, e2=c1 + 1, num_perms=3, prefix_len=prefix_len,
        )
    if protocol == "intervals":
        k_int = max(1, _round_nearest(4 * log_n))
        return ProtocolParams(
            n=n, alpha=alpha, protocol=protocol,
            k_int=k_int, interval_size=n / k_int,
            num_perms=1, prefix_len=prefix_len,
        )
    if protocol == "sharedperm":
        c = _ceil_snapped(5 * log_n)
        return ProtocolParams(
            n=n, alpha=alpha, protocol=protocol,
            c1=c, c2=c, e2=c + 1,
            num_perms=(c + 1) + (c + 2), prefix_len=prefix_len,
        )
    raise InvalidParameterError(f"unknown protocol {protocol!r}")


@dataclass(frozen=True)
class IntervalPartition:
    """Balanced split of ids 0..n-1 into k_int consecutive intervals.

    The first (n mod k_int) intervals hold one extra node, so sizes differ
    by at most one.
    """

    n: int
    k_int: int

    @property
    def base_size(self) -> int:
        return self.n // self.k_int

    @property
    def remainder(self) -> int:
        return self.n % self.k_int

    def bounds(self) -> list[tuple[int, int]]:
        out = []
        start = 0
        for i in range(self.k_int):
            size = self.base_size + (1 if i < self.remainder else 0)
            out.append((start, start + size - 1))
            start += size
        return out

    def interval_of(self, node: int) -> int:
        big = self.base_size + 1
        split = self.remainder * big
        if node < split:
            return node // big
        return self.remainder + (node - split) // self.base_size

    def interval_nodes(self, i: int) -> range:
        lo, hi = self.bounds()[i]
        return range(lo, hi + 1)

    def size(self, i: int) -> int:
        lo, hi = self.bounds()[i]
        return hi - lo + 1


def _require_complete(topology: Topology, protocol: str) -> None:
    if topology.kind is not TopologyKind.COMPLETE:
        raise InvalidParameterError(f"{protocol} runs on complete topologies only")


class ThreePermInstance:
    """Per-node stores for the three hop-windowed permutations.

    By default the three permutations are destination independent (the
    memory optimization): one base store per (node, slot), with the
    destination filtered out at lookup time. `per_destination=True`
    switches to fully independent per-destination permutations for A/B
    comparisons.
    """

    protocol_id = "threep"

    def __init__(self, topology: Topology, alpha: float, seed: int, per_destination: bool = False):
        _require_complete(topology, "three-perm")
        self.topology = topology
        self.params = params_for(topology.n, alpha, "threep")
        self.seed = seed
        self.per_destination = per_destination
        self._stores: dict[tuple, TruncatedPermStore] = {}

    def store(self, v: int, slot: int, dst: int) -> TruncatedPermStore:
        n = self.topology.n
        if self.per_destination:
            key = (v, slot, dst)
            domain: RangeExcluding = RangeExcluding(n, (v, dst))
        else:
            key = (v, slot)
            domain = RangeExcluding(n, (v,))
        st = self._stores.get(key)
        if st is None:
            st = TruncatedPermStore(v, domain, store_seed(self.seed, "threep", *key), self.params.prefix_len)
            self._stores[key] = st
        return st

    def slot_for_hop(self, hop: int) -> int:
        c1 = self.params.c1
        if hop < c1:
            return 1
        if hop < 2 * c1:
            return 2
        return 3

    def start(self, src: int, dst: int):
        return 0

    def step(self, v: int, dst: int, hop: int, live: Callable[[int], bool]):
        if live(dst):
            return dst, hop + 1
        slot = self.slot_for_hop(hop)
        nxt = self.store(v, slot, dst).first_live(live, exclude=(dst, v))
        if nxt is None:
            raise StrandedError(f"node {v} has no live neighbor toward {dst}")
        return nxt, hop + 1


class IntervalsInstance:
    """Purely destination-based protocol over an interval partition."""

    protocol_id = "intervals"

    def __init__(self, topology: Topology, alpha: float, seed: int, per_destination: bool = False):
        _require_complete(topology, "intervals")
        self.topology = topology
        self.params = params_for(topology.n, alpha, "intervals")
        k_int = self.params.k_int
        if k_int < 2 or topology.n // k_int < 2:
            raise TopologyTooSmallError(
                f"intervals needs I >= 2 and at least two intervals; n={topology.n}, K={k_int}"
            )
        self.partition = IntervalPartition(topology.n, k_int)
        self.seed = seed
        self.per_destination = per_destination
        self._domains = [
            ExplicitDomain(tuple(self.partition.interval_nodes((i + 1) % k_int)))
            for i in range(k_int)
        ]
        self._stores: dict[tuple, TruncatedPermStore] = {}

    def store(self, v: int, dst: int) -> TruncatedPermStore:
        key = (v, dst) if self.per_destination else (v,)
        st = self._stores.get(key)
        if st is None:
            domain = self._domains[self.partition.interval_of(v)]
            st = TruncatedPermStore(v, domain, store_seed(self.seed, "intervals", *key), self.params.prefix_len)
            self._stores[key] = st
        return st

    def start(self, src: int, dst: int):
        return 0

    def step(self, v: int, dst: int, hop: int, live: Callable[[int], bool]):
        if live(dst):
            return dst, hop + 1
        nxt = self.store(v, dst).first_live(live, exclude=(dst, v))
        if nxt is None:
            raise IntervalDisconnectedError(
                f"node {v} is disconnected from its successor interval"
            )
        return nxt, hop + 1


class SharedPermInstance:
    """Globally shared hop-indexed permutations plus local fallback stores."""

    protocol_id = "sharedperm"

    def __init__(self, topology: Topology, alpha: float, global_seed: int, local_seed: int):
        _require_complete(topology, "shared-perm")
        self.topology = topology
        self.params = params_for(topology.n, alpha, "sharedperm")
        self.global_seed = global_seed
        self.local_seed = local_seed
        self._succ: dict[tuple[int, int], dict[int, int]] = {}
        self._local: dict[tuple, TruncatedPermStore] = {}

    def global_permutation(self, dst: int, h: int) -> list[int]:
        perm = [u for u in range(self.topology.n) if u != dst]
        substream(self.global_seed, "global", dst, h).shuffle(perm)
        return perm

    def _successors(self, dst: int, h: int) -> dict[int, int]:
        key = (dst, h)
        succ = self._succ.get(key)
        if succ is None:
            perm = self.global_permutation(dst, h)
            succ = {perm[i]: perm[(i + 1) % len(perm)] for i in range(len(perm))}
            self._succ[key] = succ
        return succ

    def global_successor(self, dst: int, h: int, v: int) -> int:
        """Cyclic successor of v in the shared permutation for hop h."""
        return self._successors(dst, h)[v]

    def local_store(self, v: int, h: int, dst: int) -> TruncatedPermStore:
        key = (v, h, dst)
        st = self._local.get(key)
        if st is None:
            domain = RangeExcluding(self.topology.n, (v, dst))
            st = TruncatedPermStore(v, domain, store_seed(self.local_seed, "local", *key), self.params.prefix_len)
            self._local[key] = st
        return st

    def start(self, src: int, dst: int):
        return 0

    def step(self, v: int, dst: int, hop: int, live: Callable[[int], bool]):
        e2 = self.params.e2
        if live(dst):
            return dst, hop + 1
        if hop < e2:
            nxt = self.global_successor(dst, hop, v)
            if live(nxt):
                return nxt, hop + 1
            hop = e2
        if hop > e2 + self.params.c2 + 1:
            raise HopOverflowError(f"hop field exceeded {e2 + self.params.c2 + 1}")
        nxt = self.local_store(v, hop, dst).first_live(live, exclude=(dst, v))
        if nxt is None:
            raise StrandedError(f"node {v} has no live neighbor toward {dst}")
        return nxt, hop + 1


# -- build/forward operations ----------------------------------------------


def build_three_perm(
    topology: Topology, alpha: float, seed: int, per_destination: bool = False
) -> ThreePermInstance:
    return ThreePermInstance(topology, alpha, seed, per_destination=per_destination)


def build_intervals(
    topology: Topology, alpha: float, seed: int, per_destination: bool = False
) -> IntervalsInstance:
    return IntervalsInstance(topology, alpha, seed, per_destination=per_destination)


def build_shared_perm(
    topology: Topology, alpha: float, global_seed: int, local_seed: int
) -> SharedPermInstance:
    return SharedPermInstance(topology, alpha, global_seed, local_seed)


def forward_three_perm(
    instance: ThreePermInstance, v: int, hdr: PacketHeader, live: Callable[[int], bool]
) -> int:
    """Next hop under three-perm; the caller increments hdr.hop afterwards."""
    nxt, _ = instance.step(v, hdr.dst, hdr.hop, live)
    return nxt


def forward_intervals(
    instance: IntervalsInstance, v: int, hdr: PacketHeader, live: Callable[[int], bool]
) -> int:
    """Next hop under intervals; the caller increments hdr.hop afterwards."""
    nxt, _ = instance.step(v, hdr.dst, hdr.hop, live)
    return nxt


def forward_shared_perm(
    instance: SharedPermInstance, v: int, hdr: PacketHeader, live: Callable[[int], bool]
) -> tuple[int, int]:
    """(next hop, new hop value); the hop may jump to E2 on inner failures."""
    return instance.step(v, hdr.dst, hdr.hop, live)
