"""Edge-disjoint shortest paths and the backtracking failover protocol.

Paths are found by successive shortest augmentation on the unit-capacity
digraph (each undirected edge contributes two opposite arcs; pushing flow
over one cancels residual flow on the other), then decomposed into simple
node sequences and sorted by length with an id-lexicographic tie-break.

The backtracking protocol walks the shortest path first; on hitting a
failed edge it retraces its steps all the way back to the source (every
backtrack hop counts) and continues with the next path in the set.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable

from .errors import InsufficientConnectivityError, StrandedError
from .topology import Topology

FORWARD = 1
BACKWARD = -1


@dataclass(frozen=True)
class DisjointPathSet:
    """Pairwise edge-disjoint simple s->d paths, shortest first."""

    src: int
    dst: int
    paths: tuple[tuple[int, ...], ...]

    def to_text(self) -> str:
        lines = [f"src {self.src} dst {self.dst} count {len(self.paths)}"]
        lines.extend(" ".join(str(v) for v in path) for path in self.paths)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DisjointPathSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        _, src_s, _, dst_s, _, count_s = lines[0].split()
        paths = tuple(tuple(int(v) for v in ln.split()) for ln in lines[1:])
        if len(paths) != int(count_s):
            raise ValueError(f"expected {count_s} paths, found {len(paths)}")
        return cls(src=int(src_s), dst=int(dst_s), paths=paths)


def edge_disjoint_shortest_paths(topology: Topology, s: int, d: int, ell: int) -> DisjointPathSet:
    """ell edge-disjoint simple paths from s to d via shortest augmentation."""
    if s == d:
        raise InsufficientConnectivityError("source equals destination")
    flow: set[tuple[int, int]] = set()
    for _ in range(ell):
        path = _bfs_augment(topology, s, d, flow)
        if path is None:
            raise InsufficientConnectivityError(
                f"fewer than {ell} edge-disjoint paths between {s} and {d}"
            )
        for u, v in zip(path, path[1:]):
            if (v, u) in flow:
                flow.discard((v, u))
            else:
                flow.add((u, v))
    paths = _decompose(flow, s, d, ell)
    paths.sort(key=lambda p: (len(p), p))
    return DisjointPathSet(src=s, dst=d, paths=tuple(paths))


def _bfs_augment(topology: Topology, s: int, d: int, flow: set) -> list[int] | None:
    # residual arc (u, v) exists unless already carrying flow; traversing
    # against an existing flow arc cancels it
    prev = {s: None}
    q = deque([s])
    while q:
        u = q.popleft()
        if u == d:
            break
        for v in topology.neighbors(u):
            if v in prev or (u, v) in flow:
                continue
            prev[v] = u
            q.append(v)
    if d not in prev:
        return None
    path = [d]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def _decompose(flow: set, s: int, d: int, ell: int) -> list[tuple[int, ...]]:
    out_arcs: dict[int, list[int]] = {}
    for u, v in flow:
        out_arcs.setdefault(u, []).append(v)
    for u in out_arcs:
        out_arcs[u].sort()
    paths = []
    for _ in range(ell):
        path = [s]
        while path[-1] != d:
            u = path[-1]
            v = out_arcs[u].pop(0)
            if v in path:
                # erase a flow cycle: consumed arcs stay consumed
                path = path[: path.index(v) + 1]
            else:
                path.append(v)
        paths.append(tuple(path))
    return paths


def forward_square_one(
    pathset: DisjointPathSet,
    v: int,
    state: tuple[int, int, int],
    live: Callable[[int], bool],
) -> tuple[int, tuple[int, int, int]]:
    """One hop of the backtracking protocol.

    state is (path index, position on that path, direction). Backtrack
    hops walk previously traversed (hence live) edges; switching to the
    next path happens at the source and costs no hop on its own.
    """
    i, pos, direction = state
    paths = pathset.paths
    if direction == BACKWARD:
        if pos > 0:
            return paths[i][pos - 1], (i, pos - 1, BACKWARD)
        i, pos, direction = i + 1, 0, FORWARD
    while i < len(paths):
        path = paths[i]
        nxt = path[pos + 1]
        if live(nxt):
            return nxt, (i, pos + 1, FORWARD)
        if pos == 0:
            i += 1
            continue
        return path[pos - 1], (i, pos - 1, BACKWARD)
    raise StrandedError(f"all {len(paths)} paths from {pathset.src} exhausted")


# path sets depend only on the graph structure, never on seeds, so they
# are shared across instances of structurally identical topologies
_path_cache: dict[tuple, DisjointPathSet] = {}


class SquareOneInstance:
    """Backtracking failover over per-pair disjoint path sets."""

    protocol_id = "square1"

    def __init__(self, topology: Topology, ell: int):
        self.topology = topology
        self.ell = ell

    def paths_for(self, src: int, dst: int) -> DisjointPathSet:
        key = (self.topology.kind.value, self.topology.n, self.topology.k, self.ell, src, dst)
        ps = _path_cache.get(key)
        if ps is None:
            ps = edge_disjoint_shortest_paths(self.topology, src, dst, self.ell)
            _path_cache[key] = ps
        return ps

    def start(self, src: int, dst: int):
        return (self.paths_for(src, dst), 0, 0, FORWARD)

    def step(self, v: int, dst: int, state, live: Callable[[int], bool]):
        pathset, i, pos, direction = state
        nxt, (i, pos, direction) = forward_square_one(pathset, v, (i, pos, direction), live)
        return nxt, (pathset, i, pos, direction)
