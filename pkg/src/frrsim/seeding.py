"""Stable seed derivation for deterministic, reproducible experiments.

Every source of randomness in the simulator is a `random.Random` seeded
through `substream`, so rebuilding any structure from the same arguments
yields identical results regardless of construction order or platform.
Adversary selectors and protocol builders draw from disjoint label
streams, which keeps failure selection oblivious to protocol randomness.
"""

from __future__ import annotations

import hashlib
import random


def stable_hash(*parts: object) -> int:
    """Map a label tuple to a 63-bit integer via SHA-256. Stable forever."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def substream(*parts: object) -> random.Random:
    """Return a fresh PRNG for the given label tuple."""
    return random.Random(stable_hash(*parts))
