"""Truncated random-permutation stores.

A store holds the first L entries of a uniformly random permutation of its
candidate domain. Lookups scan the prefix for the first live candidate; if
the whole prefix is dead, further candidates are drawn without replacement
from a dedicated extension stream until the domain is exhausted. Prefix
and extension together realize one uniform permutation, so truncation is
purely a memory optimization.

Domains are kept implicit for complete-graph stores (all nodes minus a few
exclusions) so that instances over thousands of nodes stay small.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from .seeding import stable_hash, substream


class Domain:
    """Ordered candidate universe of a store."""

    def size(self) -> int:
        raise NotImplementedError

    def nth(self, i: int) -> int:
        raise NotImplementedError

    def items(self) -> list[int]:
        return [self.nth(i) for i in range(self.size())]


class ExplicitDomain(Domain):
    def __init__(self, items: Sequence[int]):
        self._items = tuple(items)

    def size(self) -> int:
        return len(self._items)

    def nth(self, i: int) -> int:
        return self._items[i]

    def items(self) -> list[int]:
        return list(self._items)


class RangeExcluding(Domain):
    """All ids 0..n-1 except a small sorted exclusion set."""

    def __init__(self, n: int, excluded: Sequence[int] = ()):
        self.n = n
        self.excluded = tuple(sorted(set(excluded)))

    def size(self) -> int:
        return self.n - len(self.excluded)

    def nth(self, i: int) -> int:
        # shift i past every excluded id at or below the running value
        v = i
        for e in self.excluded:
            if e <= v:
                v += 1
            else:
                break
        return v

    def items(self) -> list[int]:
        ex = set(self.excluded)
        return [v for v in range(self.n) if v not in ex]


class TruncatedPermStore:
    """Prefix of a seeded uniform permutation over `domain`, owner-aware.

    `first_live` returns the first candidate accepted by the live oracle,
    walking prefix first and then the deterministic extension. Lookups are
    pure; the extension is recomputed on demand (it is the rare path).
    """

    __slots__ = ("owner", "domain", "prefix", "_seed")

    def __init__(self, owner: int, domain: Domain, seed: int, prefix_len: int):
        self.owner = owner
        self.domain = domain
        self._seed = seed
        size = domain.size()
        take = min(prefix_len, size)
        rng = substream(seed, "prefix")
        idxs = rng.sample(range(size), take)
        self.prefix: tuple[int, ...] = tuple(domain.nth(i) for i in idxs)

    def first_live(
        self,
        live: Callable[[int], bool],
        exclude: Sequence[int] = (),
    ) -> Optional[int]:
        for u in self.prefix:
            if u not in exclude and live(u):
                return u
        if len(self.prefix) == self.domain.size():
            return None
        for u in self._extension():
            if u not in exclude and live(u):
                return u
        return None

    def _extension(self) -> list[int]:
        seen = set(self.prefix)
        rest = [u for u in self.domain.items() if u not in seen]
        substream(self._seed, "extension").shuffle(rest)
        return rest

    def full_order(self) -> list[int]:
        """Prefix followed by the extension: the complete permutation."""
        return list(self.prefix) + self._extension()


def store_seed(instance_seed: int, *labels: object) -> int:
    """Seed of one store inside an instance's label space."""
    return stable_hash(instance_seed, *labels)
