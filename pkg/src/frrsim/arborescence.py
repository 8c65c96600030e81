"""Arc-disjoint spanning arborescence packing and arborescence-based failover.

An arborescence set for root d holds ell spanning trees whose arcs all
point toward d and which share no directed edge. Failover protocols route
along one tree and hop to another whenever the current parent arc is
failed; the three baseline protocols differ only in the switching rule
(deterministic round-robin, uniform random, or a balanced design matrix).

Two packing methods are provided. The structured method exploits the Clos
layout: each tree claims one top node of the destination pod as its
gateway, which both guarantees arc-disjointness and keeps every
bottom-to-bottom tree path at graph distance. The greedy method grows all
trees round-robin with a local arc-swap repair step and works on any
sufficiently connected graph. Every produced set passes a hard
verification gate before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import InvalidParameterError, PackingError, StrandedError
from .seeding import stable_hash, substream
from .topology import Role, Topology, TopologyKind


@dataclass(frozen=True)
class ArborescenceSet:
    """ell arc-disjoint spanning arborescences rooted at `root`."""

    root: int
    count: int
    parents: tuple[dict[int, int], ...]

    def parent(self, tree: int, v: int) -> int:
        return self.parents[tree][v]

    def to_text(self) -> str:
        lines = [f"root {self.root} count {self.count}"]
        for i, par in enumerate(self.parents):
            for v in sorted(par):
                lines.append(f"{i} {v} {par[v]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ArborescenceSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        _, root_s, _, count_s = lines[0].split()
        parents: list[dict[int, int]] = [dict() for _ in range(int(count_s))]
        for ln in lines[1:]:
            i, v, p = (int(x) for x in ln.split())
            parents[i][v] = p
        return cls(root=int(root_s), count=int(count_s), parents=tuple(parents))


def verify_arborescence_set(topology: Topology, arbs: ArborescenceSet) -> None:
    """Raise PackingError unless the set is spanning, rooted and arc-disjoint."""
    n = topology.n
    all_arcs: set[tuple[int, int]] = set()
    for idx, par in enumerate(arbs.parents):
        if arbs.root in par:
            raise PackingError(f"tree {idx}: root has a parent")
        if len(par) != n - 1:
            raise PackingError(f"tree {idx}: {len(par)} arcs, expected {n - 1}")
        depth: dict[int, int] = {arbs.root: 0}
        for v in par:
            chain = []
            u = v
            while u not in depth:
                chain.append(u)
                if u not in par:
                    raise PackingError(f"tree {idx}: node {u} has no parent")
                u = par[u]
                if len(chain) > n:
                    raise PackingError(f"tree {idx}: cycle through {v}")
            base = depth[u]
            for off, w in enumerate(reversed(chain), start=1):
                depth[w] = base + off
        for v, p in par.items():
            if not topology.has_edge(v, p):
                raise PackingError(f"tree {idx}: arc ({v}, {p}) is not a topology edge")
            all_arcs.add((v, p))
    expected = arbs.count * (n - 1)
    if len(all_arcs) != expected:
        raise PackingError(f"trees share arcs: {len(all_arcs)} distinct of {expected}")


def compute_arborescences(
    topology: Topology,
    d: int,
    ell: int,
    seed: int = 0,
    method: str = "auto",
) -> ArborescenceSet:
    """Pack ell arc-disjoint spanning arborescences rooted at d.

    method "auto" uses the structured construction on Clos topologies with
    a bottom-node root and greedy growth elsewhere. The result is verified
    before it is returned; a failed packing raises, never returns a
    partial set.
    """
    if ell < 1:
        raise InvalidParameterError(f"need ell >= 1, got {ell}")
    if method == "auto":
        structured_ok = (
            topology.kind is TopologyKind.CLOS
            and topology.info(d).role is Role.BOTTOM
            and ell <= topology.k // 2
        )
        method = "structured" if structured_ok else "greedy"
    if method == "structured":
        arbs = _structured_clos_packing(topology, d, ell, seed)
    elif method == "greedy":
        arbs = _greedy_packing(topology, d, ell, seed)
    else:
        raise InvalidParameterError(f"unknown packing method {method!r}")
    verify_arborescence_set(topology, arbs)
    return arbs


def _structured_clos_packing(topology: Topology, d: int, ell: int, seed: int) -> ArborescenceSet:
    """Gateway-per-tree packing on Clos(k) with bottom-node root d.

    Tree i funnels everything through gateway g_i, the (i+1)-th top node of
    d's pod: the only arc into d that tree i uses. Every bottom node
    parents to the tree's designated top of its pod, so bottom-to-bottom
    tree paths have length 2 inside d's pod and 4 across pods, matching
    graph distance. Rotations derived from the seed vary the balanced
    assignments without affecting validity.
    """
    k = topology.k
    half = k // 2
    info = topology.info(d)
    if info.role is not Role.BOTTOM or ell > half:
        raise PackingError("structured packing needs a bottom root and ell <= k/2")
    p0 = info.pod
    d_idx = info.index_in_group
    rot = substream(seed, "arb-rot", d).randrange(1 << 16)
    other_pods = [p for p in range(1, k + 1) if p != p0]
    other_bottom_idx = [x for x in range(1, half + 1) if x != d_idx]

    def rank_excluding(i: int, skip: int, size: int) -> int:
        # position of tree index i inside {0..size-1} minus {skip}
        return i - (1 if i > skip else 0)

    parents_list = []
    for i in range(ell):
        gi = i + 1
        g = topology.top_node(p0, gi)
        par: dict[int, int] = {g: d}
        for m in range(1, half + 1):
            par[topology.block_node(gi, m)] = g
        for idx in range(1, half + 1):
            if idx != d_idx:
                par[topology.bottom_node(p0, idx)] = g
        for p in other_pods:
            m = (p + i + rot) % half + 1
            par[topology.top_node(p, gi)] = topology.block_node(gi, m)
            for idx in range(1, half + 1):
                par[topology.bottom_node(p, idx)] = topology.top_node(p, gi)
            for a in range(1, half + 1):
                if a == gi:
                    continue
                r = rank_excluding(i, a - 1, half)
                y = (r + a * 3 + p + rot) % half + 1
                par[topology.top_node(p, a)] = topology.bottom_node(p, y)
        for a in range(1, half + 1):
            if a == gi:
                continue
            r = rank_excluding(i, a - 1, half)
            x = other_bottom_idx[(r + a + rot) % (half - 1)]
            par[topology.top_node(p0, a)] = topology.bottom_node(p0, x)
        for b in range(1, half + 1):
            if b == gi:
                continue
            r = rank_excluding(i, b - 1, half)
            for m in range(1, half + 1):
                p = other_pods[(r + m * 5 + b + rot) % (k - 1)]
                par[topology.block_node(b, m)] = topology.top_node(p, b)
        parents_list.append(par)
    return ArborescenceSet(root=d, count=ell, parents=tuple(parents_list))


def _greedy_packing(topology: Topology, d: int, ell: int, seed: int, attempts: int = 40) -> ArborescenceSet:
    """Round-robin greedy growth with a local arc-swap repair step.

    Trees take turns attaching one new node via an unused arc into their
    current body. A stuck tree tries to free an arc by rewiring the owning
    tree's node to an alternative parent. Failed attempts restart with a
    derived seed; exhaustion raises PackingError.
    """
    n = topology.n
    for attempt in range(attempts):
        rng = substream(seed, "arb-greedy", d, attempt)
        parents: list[dict[int, int]] = [dict() for _ in range(ell)]
        members: list[set[int]] = [{d} for _ in range(ell)]
        used: set[tuple[int, int]] = set()

        def try_grow(i: int) -> bool:
            body = members[i]
            candidates = []
            for w in body:
                for u in topology.neighbors(w):
                    if u not in body and (u, w) not in used:
                        candidates.append((u, w))
            if candidates:
                u, w = rng.choice(candidates)
                parents[i][u] = w
                body.add(u)
                used.add((u, w))
                return True
            return _try_swap(i)

        def _in_subtree(tree: int, node: int, maybe_ancestor: int) -> bool:
            u = node
            while u != d:
                if u == maybe_ancestor:
                    return True
                u = parents[tree][u]
            return False

        def _try_swap(i: int) -> bool:
            body = members[i]
            outside = [u for u in range(n) if u not in body]
            rng.shuffle(outside)
            for u in outside:
                for w in topology.neighbors(u):
                    if w not in body:
                        continue
                    # arc (u, w) must be owned by some other tree j
                    owner = next(
                        (j for j in range(ell) if parents[j].get(u) == w), None
                    )
                    if owner is None or owner == i:
                        continue
                    for w2 in topology.neighbors(u):
                        if w2 == w or (u, w2) in used or w2 not in members[owner]:
                            continue
                        if _in_subtree(owner, w2, u):
                            continue
                        parents[owner][u] = w2
                        used.discard((u, w))
                        used.add((u, w2))
                        parents[i][u] = w
                        members[i].add(u)
                        used.add((u, w))
                        return True
            return False

        done = False
        while not done:
            progress = False
            done = True
            for i in range(ell):
                if len(members[i]) < n:
                    done = False
                    if try_grow(i):
                        progress = True
            if done:
                break
            if not progress:
                break
        if done:
            arbs = ArborescenceSet(root=d, count=ell, parents=tuple(dict(p) for p in parents))
            try:
                verify_arborescence_set(topology, arbs)
            except PackingError:
                continue
            return arbs
    raise PackingError(f"greedy packing failed for root {d} after {attempts} attempts")


# -- switching rules ---------------------------------------------------------


class DetSwitch:
    """Deterministic round-robin: next tree is (i + 1) mod ell."""

    def next(self, i: int, ell: int) -> int:
        return (i + 1) % ell


class PrnbSwitch:
    """Uniformly random other tree, drawn from a per-flow stream."""

    def __init__(self, rng):
        self.rng = rng

    def next(self, i: int, ell: int) -> int:
        j = self.rng.randrange(ell - 1)
        return j if j < i else j + 1


class CasaSwitch:
    """Next untried entry of the design-matrix row for the current tree."""

    def __init__(self, matrix: "BibdMatrix"):
        self.matrix = matrix
        self.pointers = [0] * matrix.order

    def next(self, i: int, ell: int) -> int:
        row = self.matrix.rows[i]
        j = row[self.pointers[i] % len(row)]
        self.pointers[i] += 1
        return j


def next_arborescence(mode, i: int, ell: int) -> int:
    """Pick the tree to continue on after a failure event on tree i."""
    return mode.next(i, ell)


# -- balanced incomplete block design matrix ---------------------------------


@dataclass(frozen=True)
class BibdMatrix:
    """Row i is an ordered permutation of {0..order-1} minus {i}.

    Rows are built by adding the nonzero elements of a finite field, in
    primitive-power order, to the row index; any two rows therefore agree
    in no position at all.
    """

    order: int
    rows: tuple[tuple[int, ...], ...]


_GF2_POLY = {2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101}


def _gf2_mul(a: int, b: int, m: int) -> int:
    poly = _GF2_POLY[m]
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return out


def build_bibd_matrix(ell: int) -> BibdMatrix:
    """Design matrix of order ell; ell must be prime or a power of two."""
    if ell < 2:
        raise InvalidParameterError("design matrix needs ell >= 2")
    if ell & (ell - 1) == 0:
        m = ell.bit_length() - 1
        if m == 1:
            offsets = [1]
        else:
            if m not in _GF2_POLY:
                raise InvalidParameterError(f"no field table for ell = 2^{m}")
            offsets = _powers_of(lambda a: _gf2_mul(a, 2, m), ell)
        rows = tuple(tuple(i ^ off for off in offsets) for i in range(ell))
        return BibdMatrix(order=ell, rows=rows)
    if _is_prime(ell):
        g = _primitive_root(ell)
        offsets = []
        x = 1
        for _ in range(ell - 1):
            offsets.append(x)
            x = (x * g) % ell
        rows = tuple(tuple((i + off) % ell for off in offsets) for i in range(ell))
        return BibdMatrix(order=ell, rows=rows)
    raise InvalidParameterError(
        f"ell = {ell} is neither prime nor a power of two; choose k so that k/2 is a prime power"
    )


def _powers_of(step: Callable[[int], int], ell: int) -> list[int]:
    out = []
    x = 1
    for _ in range(ell - 1):
        out.append(x)
        x = step(x)
    return out


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    f = 2
    while f * f <= x:
        if x % f == 0:
            return False
        f += 1
    return True


def _primitive_root(p: int) -> int:
    factors = set()
    q, f = p - 1, 2
    while f * f <= q:
        while q % f == 0:
            factors.add(f)
            q //= f
        f += 1
    if q > 1:
        factors.add(q)
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in factors):
            return g
    raise InvalidParameterError(f"no primitive root for {p}")


# -- forwarding ---------------------------------------------------------------


class ArborescenceInstance:
    """A-Det / A-PRNB / A-CASA failover over a shared arborescence set."""

    def __init__(self, topology: Topology, ell: int, seed: int, switch: str):
        if switch not in ("det", "prnb", "casa"):
            raise InvalidParameterError(f"unknown switch rule {switch!r}")
        self.topology = topology
        self.ell = ell
        self.seed = seed
        self.switch = switch
        self.protocol_id = f"a-{switch}"
        self.matrix = build_bibd_matrix(ell) if switch == "casa" else None
        self._arbs: dict[int, ArborescenceSet] = {}

    def arborescences_for(self, dst: int) -> ArborescenceSet:
        arbs = self._arbs.get(dst)
        if arbs is None:
            arbs = compute_arborescences(
                self.topology, dst, self.ell, seed=stable_hash(self.seed, "arb", dst)
            )
            self._arbs[dst] = arbs
        return arbs

    def _make_switch(self, src: int, dst: int):
        if self.switch == "det":
            return DetSwitch()
        if self.switch == "prnb":
            return PrnbSwitch(substream(self.seed, "prnb", src, dst))
        return CasaSwitch(self.matrix)

    def start(self, src: int, dst: int):
        return (0, self._make_switch(src, dst))

    def step(self, v: int, dst: int, state, live: Callable[[int], bool]):
        i, switch = state
        arbs = self.arborescences_for(dst)
        if not any(live(par[v]) for par in arbs.parents):
            raise StrandedError(f"all {self.ell} parent arcs of node {v} are failed")
        guard = 0
        while not live(arbs.parent(i, v)):
            i = next_arborescence(switch, i, self.ell)
            guard += 1
            if guard > 64 * self.ell:
                # randomized switching is overwhelmingly unlikely to need
                # this many bounces once a live parent exists
                i = next(j for j in range(self.ell) if live(arbs.parent(j, v)))
        return arbs.parent(i, v), (i, switch)


def build_arborescence_protocol(topology: Topology, ell: int, seed: int, switch: str) -> ArborescenceInstance:
    return ArborescenceInstance(topology, ell, seed, switch)


def forward_arborescence(instance: ArborescenceInstance, v: int, dst: int, state, live):
    """(next hop, new state); state carries the current tree index and switch."""
    return instance.step(v, dst, state, live)
