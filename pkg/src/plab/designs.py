"""Edge-disjoint clique packings and biclique grid partitions.

The clique packing is a transversal design with linear blocks over GF(m)
for a prime m: vertex (i, j) with i in [0, k) and j in [0, m) is the integer
i*m + j, and block B(a, b) = {(i, (a*i + b) mod m)} for a, b in [0, m).  Any
two distinct blocks share at most one vertex, and every cross-group pair
among the k*m used vertices is covered by exactly one block.  Blocks are
emitted in (a, b) lexicographic order and the vertex map is fixed row-major,
so designs are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .errors import ParameterError


def largest_prime_leq(x: int) -> int:
    """Largest prime p <= x (x >= 2); by Bertrand's postulate p > x/2."""
    if x < 2:
        raise ParameterError(f"largest_prime_leq requires x >= 2, got {x}")
    for p in range(int(x), 1, -1):
        if _is_prime(p):
            return p
    raise AssertionError("unreachable: 2 is prime")


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass
class CliqueDesign:
    """Family of k-subsets of [0, n) pairwise intersecting in <= 1 vertex.

    ``kind`` records the construction: "transversal" designs have m^2 blocks
    over a k x m grid with exactly-once cross-group pair coverage; "greedy"
    packings (the k > sqrt(n) regime, where no transversal design exists)
    only promise size-k blocks covering every pair at most once, with m = 0.
    """

    n: int
    k: int
    m: int
    blocks: List[Tuple[int, ...]]
    kind: str = "transversal"
    _block_arr: np.ndarray = field(default=None, repr=False)

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def used_vertices(self) -> int:
        return self.k * self.m

    def block_array(self) -> np.ndarray:
        """All blocks as an (m^2, k) int array (cached)."""
        if self._block_arr is None:
            self._block_arr = np.array(self.blocks, dtype=np.int64)
        return self._block_arr

    def block_pairs(self, index: int) -> np.ndarray:
        """The C(k,2) vertex pairs of one block, as an (p, 2) array i<j."""
        verts = np.sort(self.block_array()[index])
        ii, jj = np.triu_indices(self.k, 1)
        return np.stack([verts[ii], verts[jj]], axis=1)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "m": self.m, "kind": self.kind,
                "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_json(cls, obj: dict) -> "CliqueDesign":
        return cls(n=obj["n"], k=obj["k"], m=obj["m"],
                   kind=obj.get("kind", "transversal"),
                   blocks=[tuple(b) for b in obj["blocks"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "CliqueDesign":
        return cls.from_json(json.loads(text))


def clique_partition(n: int, k: int) -> CliqueDesign:
    """Build the transversal-design clique packing on [0, n).

    Requires k >= 2 and m = largest_prime_leq(n // k) >= k, so that every
    block slope difference is invertible mod m (this is the k <= sqrt(n),
    up to rounding, regime: k*k <= k*m <= n).
    """
    if k < 2:
        raise ParameterError(f"clique_partition requires k >= 2, got k={k}")
    if n // k < 2:
        raise ParameterError(
            f"clique_partition requires n//k >= 2, got n={n}, k={k}")
    m = largest_prime_leq(n // k)
    if m < k:
        raise ParameterError(
            f"clique_partition requires largest_prime_leq(n//k) >= k for "
            f"exactly-once pair coverage; got m={m} < k={k} at n={n}")
    i = np.arange(k, dtype=np.int64)
    blocks = []
    for a in range(m):
        cols = (a * i) % m
        for b in range(m):
            verts = i * m + (cols + b) % m
            blocks.append(tuple(int(v) for v in verts))
    return CliqueDesign(n=n, k=k, m=m, blocks=blocks)


def clique_packing_greedy(n: int, k: int, seed: int = 0,
                          max_failures: int = 400) -> CliqueDesign:
    """Randomized maximal packing of size-k blocks with pairwise overlap <= 1.

    Used where the transversal design does not exist (k > sqrt(n), up to
    rounding): blocks are grown greedily over random vertex orders, never
    reusing a covered pair, until ``max_failures`` consecutive attempts fail.
    Pairwise intersection <= 1 holds by construction.
    """
    if k < 2 or k > n:
        raise ParameterError(f"need 2 <= k <= n, got n={n}, k={k}")
    rng = np.random.Generator(np.random.PCG64(seed))
    covered = np.zeros((n, n), dtype=bool)
    blocks: List[Tuple[int, ...]] = []
    failures = 0
    while failures < max_failures:
        order = rng.permutation(n)
        members: List[int] = []
        for v in order:
            if not members or not covered[v, members].any():
                members.append(int(v))
                if len(members) == k:
                    break
        if len(members) < k:
            failures += 1
            continue
        failures = 0
        arr = np.array(members)
        covered[arr[:, None], arr[None, :]] = True
        blocks.append(tuple(sorted(members)))
    if not blocks:
        raise ParameterError(f"could not pack any size-{k} block into [0,{n})")
    return CliqueDesign(n=n, k=k, m=0, blocks=blocks, kind="greedy")


def covered_pair_counts(design: CliqueDesign) -> np.ndarray:
    """How many blocks cover each unordered vertex pair (n x n, upper used).

    Exhaustive accounting over all blocks; the basis for the pairwise
    intersection check (two blocks sharing >= 2 vertices would cover some
    pair twice).
    """
    n = design.n
    counts = np.zeros(n * n, dtype=np.int64)
    arr = design.block_array()
    ii, jj = np.triu_indices(design.k, 1)
    rows = np.minimum(arr[:, ii], arr[:, jj]).ravel()
    cols = np.maximum(arr[:, ii], arr[:, jj]).ravel()
    np.add.at(counts, rows * n + cols, 1)
    return counts.reshape(n, n)


def verify_clique_design(design: CliqueDesign) -> dict:
    """Exhaustively verify all CliqueDesign invariants.

    Returns a report dict with ``passed`` and, on failure, the offending
    blocks/pair.  Pair coverage <= 1 everywhere is exactly equivalent to
    pairwise block intersection <= 1 vertex.
    """
    n, k, m = design.n, design.k, design.m
    report = {"passed": True, "n": n, "k": k, "m": m, "kind": design.kind,
              "num_blocks": design.num_blocks}
    arr = design.block_array()
    if design.kind == "transversal" and arr.shape[0] != m * m:
        return _fail(report, f"expected {m * m} blocks, found {arr.shape[0]}")
    if arr.shape[1] != k or any(len(set(b)) != k for b in design.blocks):
        return _fail(report, "some block does not have exactly k distinct vertices")
    if arr.min() < 0 or arr.max() >= n:
        return _fail(report, "block vertex out of range")

    counts = covered_pair_counts(design)
    over = np.argwhere(counts > 1)
    if len(over):
        i, j = map(int, over[0])
        culprits = [b for b, blk in enumerate(design.blocks)
                    if i in blk and j in blk]
        report["counterexample"] = {"pair": [i, j], "blocks": culprits}
        return _fail(report, f"pair ({i},{j}) covered {int(counts[i, j])} times "
                             f"by blocks {culprits}")

    if design.kind == "transversal":
        # Every cross-group pair among used vertices covered exactly once.
        used = k * m
        group = np.arange(used) // m
        iu, ju = np.triu_indices(used, 1)
        cross = group[iu] != group[ju]
        cov = counts[iu, ju]
        if not np.all(cov[cross] == 1):
            miss = np.argwhere(cross & (cov == 0))
            idx = int(miss[0])
            return _fail(report, f"cross-group pair ({int(iu[idx])},"
                                 f"{int(ju[idx])}) uncovered")
        if np.any(cov[~cross] != 0):
            return _fail(report, "a within-group pair is covered")

    report["covered_pairs"] = int((counts == 1).sum())
    return report


def _fail(report: dict, reason: str) -> dict:
    report["passed"] = False
    report["reason"] = reason
    return report


@dataclass
class BicliqueDesign:
    """Grid partition of the n x n complete bipartite graph into bicliques."""

    n: int
    r: int
    s: int
    blocks: List[Tuple[Tuple[int, ...], Tuple[int, ...]]]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def full_blocks(self) -> list:
        """Indices of the blocks of full size r x s."""
        return [i for i, (rows, cols) in enumerate(self.blocks)
                if len(rows) == self.r and len(cols) == self.s]


def biclique_partition(n: int, r: int, s: int) -> BicliqueDesign:
    """Partition all n^2 bipartite pairs into ceil(n/r)*ceil(n/s) blocks."""
    if not (1 <= r <= n and 1 <= s <= n):
        raise ParameterError(
            f"biclique_partition requires 1 <= r, s <= n; got n={n}, r={r}, s={s}")
    row_groups = [tuple(range(a, min(a + r, n))) for a in range(0, n, r)]
    col_groups = [tuple(range(b, min(b + s, n))) for b in range(0, n, s)]
    blocks = [(rows, cols) for rows in row_groups for cols in col_groups]
    return BicliqueDesign(n=n, r=r, s=s, blocks=blocks)


def verify_biclique_design(design: BicliqueDesign) -> dict:
    """Check that blocks tile all n^2 bipartite pairs exactly once."""
    n = design.n
    report = {"passed": True, "n": n, "r": design.r, "s": design.s,
              "num_blocks": design.num_blocks}
    counts = np.zeros((n, n), dtype=np.int64)
    for rows, cols in design.blocks:
        counts[np.ix_(rows, cols)] += 1
    if not np.all(counts == 1):
        bad = np.argwhere(counts != 1)[0]
        return _fail(report, f"bipartite pair {tuple(map(int, bad))} covered "
                             f"{int(counts[tuple(bad)])} times")
    expected = -(-n // design.r) * -(-n // design.s)
    if design.num_blocks != expected:
        return _fail(report, f"expected {expected} blocks, found {design.num_blocks}")
    report["full_blocks"] = len(design.full_blocks())
    return report
