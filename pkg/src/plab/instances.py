"""Seeded generators for every hypothesis pair, with ground truth.

Each generator is a pure function of (params, seed): identical arguments
reproduce the identical instance byte for byte.  Planted structure is always
returned alongside the instance as a PlantedTruth.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Tuple

import numpy as np

from .designs import CliqueDesign
from .errors import ContractViolationError, ParameterError
from .matrices import BitMatrix, PlantedTruth, RealMatrix
from .seeds import rng_for

Hypothesis = str  # "h0" | "h1"


def _check_hypothesis(hypothesis: str) -> str:
    h = hypothesis.lower()
    if h not in ("h0", "h1"):
        raise ParameterError(f"hypothesis must be 'h0' or 'h1', got {hypothesis!r}")
    return h


def _sym_bernoulli(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric zero-diagonal 0/1 matrix, each edge Bernoulli(p)."""
    if p == 0.5:
        raw = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
    else:
        raw = (rng.random((n, n)) < p).astype(np.uint8)
    upper = np.triu(raw, 1)
    return upper + upper.T


def gen_er(n: int, p: float, seed: int) -> BitMatrix:
    """Erdos-Renyi G(n, p) adjacency matrix."""
    if not 0 <= p <= 1:
        raise ParameterError(f"edge probability must be in [0,1], got {p}")
    rng = rng_for(seed, "er", n, p)
    return BitMatrix(_sym_bernoulli(n, p, rng), symmetric=True)


def gen_planted_clique(n: int, k: int, seed: int) -> Tuple[BitMatrix, PlantedTruth]:
    """G(n, 1/2, k): uniform k-subset R forced into a clique over G(n, 1/2)."""
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got n={n}, k={k}")
    rng = rng_for(seed, "pc", n, k)
    a = _sym_bernoulli(n, 0.5, rng)
    r = np.sort(rng.choice(n, size=k, replace=False))
    a[np.ix_(r, r)] = 1
    np.fill_diagonal(a, 0)
    truth = PlantedTruth(kind="clique", clique=[int(v) for v in r])
    return BitMatrix(a, symmetric=True), truth


def gen_bpc(n: int, r: int, s: int, seed: int) -> Tuple[BitMatrix, PlantedTruth]:
    """Bipartite n x n matrix with a planted all-ones r x s block."""
    if not (1 <= r <= n and 1 <= s <= n):
        raise ParameterError(f"need 1 <= r, s <= n; got n={n}, r={r}, s={s}")
    rng = rng_for(seed, "bpc", n, r, s)
    a = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
    rows = np.sort(rng.choice(n, size=r, replace=False))
    cols = np.sort(rng.choice(n, size=s, replace=False))
    a[np.ix_(rows, cols)] = 1
    truth = PlantedTruth(kind="biclique",
                         biclique_rows=[int(v) for v in rows],
                         biclique_cols=[int(v) for v in cols])
    return BitMatrix(a), truth


def gen_bpc_null(n: int, seed: int) -> BitMatrix:
    """All-Bernoulli(1/2) bipartite matrix (BPC H0)."""
    rng = rng_for(seed, "bpc0", n)
    return BitMatrix(rng.integers(0, 2, size=(n, n), dtype=np.uint8))


# -- semi-random (sandwich) planted clique ------------------------------------

AdversaryFn = Callable[[np.ndarray, np.ndarray, np.random.Generator], np.ndarray]


def adversary_identity(g_max, g_min, rng):
    return g_max


def adversary_delete_all(g_max, g_min, rng):
    return g_min


def adversary_half_thinning(g_max, g_min, rng):
    """Remove each removable (non-plant) edge independently w.p. 1/2."""
    n = g_max.shape[0]
    coins = _sym_bernoulli(n, 0.5, rng)
    return g_min | (g_max & ~g_min.astype(bool) & coins.astype(bool)).astype(np.uint8)


def adversary_degree_masking(g_max, g_min, rng):
    """Thin non-plant edges at clique vertices until degrees hit the H0 mean."""
    g = g_max.copy()
    n = g.shape[0]
    target = round((n - 1) / 2)
    clique_vertices = np.flatnonzero(g_min.sum(axis=1) > 0)
    for v in clique_vertices:
        excess = int(g[v].sum()) - target
        if excess <= 0:
            continue
        removable = np.flatnonzero((g[v] == 1) & (g_min[v] == 0))
        if removable.size == 0:
            continue
        drop = rng.choice(removable, size=min(excess, removable.size),
                          replace=False)
        g[v, drop] = 0
        g[drop, v] = 0
    return g


ADVERSARIES = {
    "identity": adversary_identity,
    "delete-all": adversary_delete_all,
    "half-thinning": adversary_half_thinning,
    "degree-masking": adversary_degree_masking,
}


def gen_srpc(n: int, k: int, hypothesis: str, adversary, seed: int
             ) -> Tuple[BitMatrix, PlantedTruth]:
    """Sandwich semi-random instance: adversary picks G* with
    G_min <= G* <= G_max; the output is checked against the sandwich.
    """
    h = _check_hypothesis(hypothesis)
    if isinstance(adversary, str):
        if adversary not in ADVERSARIES:
            raise ParameterError(f"unknown adversary {adversary!r}; "
                                 f"choose from {sorted(ADVERSARIES)}")
        adversary_fn = ADVERSARIES[adversary]
    else:
        adversary_fn = adversary
    if h == "h0":
        g_max = gen_er(n, 0.5, seed).data
        g_min = np.zeros_like(g_max)
        truth = PlantedTruth(kind="none")
    else:
        planted, truth = gen_planted_clique(n, k, seed)
        g_max = planted.data
        g_min = np.zeros_like(g_max)
        r = truth.clique
        g_min[np.ix_(r, r)] = 1
        np.fill_diagonal(g_min, 0)
    g_star = np.asarray(adversary_fn(g_max, g_min, rng_for(seed, "srpc-adv")),
                        dtype=np.uint8)
    if g_star.shape != g_max.shape or np.any(g_star > 1):
        raise ContractViolationError("adversary returned a malformed matrix")
    if np.any(g_star < g_min) or np.any(g_star > g_max):
        raise ContractViolationError(
            "adversary output violates the sandwich G_min <= G* <= G_max")
    return BitMatrix(g_star, symmetric=True), truth


def gen_ppc(n: int, k: int, design: CliqueDesign, hypothesis: str, seed: int
            ) -> Tuple[BitMatrix, PlantedTruth]:
    """Promise variant: the H1 clique lands on a uniform design block."""
    h = _check_hypothesis(hypothesis)
    if design.n != n or design.k != k:
        raise ParameterError(
            f"design dims ({design.n},{design.k}) do not match ({n},{k})")
    rng = rng_for(seed, "ppc", n, k)
    a = _sym_bernoulli(n, 0.5, rng)
    if h == "h0":
        return BitMatrix(a, symmetric=True), PlantedTruth(kind="none")
    idx = int(rng.integers(design.num_blocks))
    block = list(design.blocks[idx])
    a[np.ix_(block, block)] = 1
    np.fill_diagonal(a, 0)
    truth = PlantedTruth(kind="clique", clique=sorted(block),
                         extra={"block_index": idx})
    return BitMatrix(a, symmetric=True), truth


def gen_hidden_hubs(n: int, k: int, sigma0: float, sigma1: float,
                    hypothesis: str, seed: int) -> Tuple[RealMatrix, PlantedTruth]:
    """Hidden hubs H(n, k, sigma0, sigma1) or the all-noise null."""
    if sigma0 <= 0 or sigma1 <= 0:
        raise ParameterError("sigma0 and sigma1 must be positive")
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    h = _check_hypothesis(hypothesis)
    rng = rng_for(seed, "hh", n, k, sigma0, sigma1)
    a = sigma0 * rng.standard_normal((n, n))
    if h == "h0":
        return RealMatrix(a), PlantedTruth(kind="none")
    hub_rows = np.sort(rng.choice(n, size=k, replace=False))
    entries = {}
    for row in hub_rows:
        cols = np.sort(rng.choice(n, size=k, replace=False))
        a[row, cols] = sigma1 * rng.standard_normal(k)
        entries[int(row)] = [int(c) for c in cols]
    truth = PlantedTruth(kind="hub-rows",
                         hub_rows=[int(r) for r in hub_rows],
                         hub_entries=entries)
    return RealMatrix(a), truth


def gen_scdc_null(d: int, t: int, seed: int) -> RealMatrix:
    """t i.i.d. standard Gaussian columns in R^d."""
    rng = rng_for(seed, "scdc0", d, t)
    return RealMatrix(rng.standard_normal((d, t)))


def gen_scdc_spiked(d: int, t: int, k: int, theta: float, seed: int
                    ) -> Tuple[RealMatrix, PlantedTruth]:
    """Spiked N(0, I + theta*u*u^T) columns, u a k-sparse +-1/sqrt(k) vector."""
    if not 1 <= k <= d:
        raise ParameterError(f"need 1 <= k <= d, got d={d}, k={k}")
    if theta < 0:
        raise ParameterError(f"theta must be nonnegative, got {theta}")
    rng = rng_for(seed, "scdc1", d, t, k, theta)
    support = np.sort(rng.choice(d, size=k, replace=False))
    signs = rng.choice([-1.0, 1.0], size=k)
    u = np.zeros(d)
    u[support] = signs / math.sqrt(k)
    g = rng.standard_normal((d, t))
    x = g + (math.sqrt(1.0 + theta) - 1.0) * np.outer(u, u @ g)
    truth = PlantedTruth(kind="spike", spike=[float(v) for v in u],
                         extra={"support": [int(i) for i in support]})
    return RealMatrix(x), truth


def empirical_variance(x, v) -> float:
    """(1/t) sum_i (v^T X_i)^2 for unit v (columns X_i of a d x t matrix)."""
    data = x.data if isinstance(x, RealMatrix) else np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (data.shape[0],):
        raise ParameterError(f"direction must have length {data.shape[0]}")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
        raise ParameterError("direction must be unit-norm within 1e-9")
    t = data.shape[1]
    return float(np.sum((v @ data) ** 2) / t)


def scdc_d0_bound(d: int, zeta: float) -> float:
    """Null-side deviation width (natural logs)."""
    _check_zeta(zeta)
    lg = math.log(2.0 / zeta)
    return 4.0 * math.sqrt(lg / d) + 4.0 * lg / d


def scdc_d1_bound(d: int, k: int, theta: float, zeta: float) -> float:
    """Spiked-side deviation width (natural logs)."""
    _check_zeta(zeta)
    lg = math.log(2.0 / zeta)
    return 2.0 * math.sqrt(theta * k * lg / d) + 4.0 * lg / d


def _check_zeta(zeta: float):
    if not 0 < zeta < 1:
        raise ParameterError(f"zeta must be in (0,1), got {zeta}")


def gen_pe(n_players: int, m_coords: int, b: int, seed: int
           ) -> Tuple[BitMatrix, Optional[int]]:
    """Parameter-estimation game inputs (players x coords bit matrix).

    b=0: all entries fair coins.  b=1: one uniformly chosen coordinate
    (column) is all ones; returns that column index alongside.
    """
    if m_coords < 1 or n_players < 1:
        raise ParameterError("need n_players >= 1 and m_coords >= 1")
    if b not in (0, 1):
        raise ParameterError(f"B must be 0 or 1, got {b}")
    rng = rng_for(seed, "pe", n_players, m_coords, b)
    bits = rng.integers(0, 2, size=(n_players, m_coords), dtype=np.uint8)
    planted = None
    if b == 1:
        planted = int(rng.integers(m_coords))
        bits[:, planted] = 1
    return BitMatrix(bits), planted


def gen_pe_gaussian(n_players: int, m_coords: int, b: int, sigma0: float,
                    sigma1: float, seed: int) -> Tuple[RealMatrix, Optional[int]]:
    """Gaussian variant of the PE inputs: N(0, s0^2) vs one N(0, s1^2) column."""
    if m_coords < 1 or n_players < 1:
        raise ParameterError("need n_players >= 1 and m_coords >= 1")
    if b not in (0, 1):
        raise ParameterError(f"B must be 0 or 1, got {b}")
    rng = rng_for(seed, "pe-gauss", n_players, m_coords, b, sigma0, sigma1)
    vals = sigma0 * rng.standard_normal((n_players, m_coords))
    planted = None
    if b == 1:
        planted = int(rng.integers(m_coords))
        vals[:, planted] = sigma1 * rng.standard_normal(n_players)
    return RealMatrix(vals), planted


def gen_ud(length: int, intersecting: bool, seed: int
           ) -> Tuple[np.ndarray, np.ndarray, Optional[int]]:
    """Unique-disjointness instance (x, y, witness-or-None).

    Non-witness coordinates are uniform over {(0,0), (0,1), (1,0)}; when
    intersecting, a uniform witness coordinate is forced to (1,1).
    """
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    rng = rng_for(seed, "ud", length, bool(intersecting))
    combo = rng.integers(0, 3, size=length)
    x = (combo == 2).astype(np.uint8)
    y = (combo == 1).astype(np.uint8)
    witness = None
    if intersecting:
        witness = int(rng.integers(length))
        x[witness] = 1
        y[witness] = 1
    return x, y, witness


def to_symmetric_bipartite(m: BitMatrix) -> BitMatrix:
    """Embed an r x c bipartite matrix as the (r+c) symmetric graph adjacency.

    Left vertices are 0..r-1, right vertices r..r+c-1; an Mv column read at a
    right index returns its left neighborhood and vice versa, which is how
    the Mv find algorithm reads both sides of the bipartition.
    """
    r, c = m.rows, m.cols
    sym = np.zeros((r + c, r + c), dtype=np.uint8)
    sym[:r, r:] = m.data
    sym[r:, :r] = m.data.T
    return BitMatrix(sym, symmetric=True)
