"""Deterministic seed derivation.

Every randomized routine takes a 64-bit master seed and derives labeled
sub-seeds from it, so that identical (params, seed) always reproduce the
same instance byte for byte, independent of call order.  Labels split into
"public" (shared randomness in the communication-game sense: colorings,
permutations, coin fills) and "private" (per-player noise); the split is
purely a naming convention, both derive the same way.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *labels) -> int:
    """Derive a stable 64-bit sub-seed from ``seed`` and a label path."""
    h = hashlib.sha256()
    h.update(int(seed & _MASK64).to_bytes(8, "little"))
    for label in labels:
        part = str(label).encode()
        h.update(len(part).to_bytes(4, "little"))
        h.update(part)
    return int.from_bytes(h.digest()[:8], "little")


def rng_for(seed: int, *labels) -> np.random.Generator:
    """A fresh generator for the derived sub-seed (cheap PCG64 init)."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *labels)))
