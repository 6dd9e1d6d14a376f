"""Executable distribution-preserving reductions.

Each construction turns communication-game inputs into graph/matrix
instances whose combination is distributed exactly per the target
hypothesis; the stats module and tests verify the distributional contracts.
All randomness is labeled public (colorings, permutations, coin fills) or
private and derives from the given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .designs import BicliqueDesign, CliqueDesign, biclique_partition
from .errors import ParameterError
from .matrices import BitMatrix, PlantedTruth, RealMatrix
from .seeds import rng_for
from .transforms import (AffineCol, InsertRow, SelectCols, SelectRows,
                         TransformStack, materialize)

_COLOR_G1 = {0: (1, 3), 1: (1, 2)}
_COLOR_G2 = {0: (1, 4), 1: (3, 4)}


@dataclass
class PlayerShares:
    """Per-player matrices for a union/XOR communication game."""

    players: List
    mode: str                         # "union" | "xor"
    masks: Optional[List[np.ndarray]] = None   # real-share support masks
    public_record: dict = field(default_factory=dict)


@dataclass
class XorPairOutput:
    g1: BitMatrix
    g2: BitMatrix
    truth: PlantedTruth
    permutation: np.ndarray

    def xor(self) -> BitMatrix:
        data = np.bitwise_xor(self.g1.data, self.g2.data)
        return BitMatrix(data, symmetric=self.g1.symmetric)


@dataclass
class SrpcOutput:
    shares: PlayerShares
    g_max: BitMatrix
    g_min: BitMatrix
    truth: PlantedTruth
    permutation: np.ndarray

    def union(self) -> BitMatrix:
        return reconstruct(self.shares)


def _check_ud(x, y, length: int):
    x = np.asarray(x, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    if x.shape != (length,) or y.shape != (length,):
        raise ParameterError(f"UD strings must have length {length}")
    if x.max(initial=0) > 1 or y.max(initial=0) > 1:
        raise ParameterError("UD strings must be bits")
    common = np.flatnonzero(x & y)
    if len(common) > 1:
        raise ParameterError(
            f"invalid UD instance: {len(common)} common ones (promise is <= 1)")
    witness = int(common[0]) if len(common) == 1 else None
    return x, y, witness


_pair_cache: dict = {}


def _design_pairs(design: CliqueDesign):
    """(num_blocks, C(k,2)) row/col arrays plus the uncovered upper pairs."""
    key = (id(design), design.n, design.k, design.m)
    cached = _pair_cache.get(key)
    if cached is not None:
        return cached
    arr = np.sort(design.block_array(), axis=1)
    ii, jj = np.triu_indices(design.k, 1)
    rows, cols = arr[:, ii], arr[:, jj]
    covered = np.zeros((design.n, design.n), dtype=bool)
    covered[rows.reshape(-1), cols.reshape(-1)] = True
    iu, ju = np.triu_indices(design.n, 1)
    free = ~covered[iu, ju]
    out = (rows, cols, iu[free], ju[free])
    if len(_pair_cache) > 8:
        _pair_cache.clear()
    _pair_cache[key] = out
    return out


def _permute_sym(a: np.ndarray, perm: np.ndarray) -> np.ndarray:
    inv = np.argsort(perm)
    return np.ascontiguousarray(a[np.ix_(inv, inv)])


def xor_ud_to_pc(x, y, n: int, k: int, design: CliqueDesign, seed: int
                 ) -> XorPairOutput:
    """Two-party XOR encoding of unique disjointness as planted clique.

    Per block, edges are 4-colored with public randomness; Alice keeps
    colors {1,3} or {1,2} by her bit, Bob keeps {1,4} or {3,4} by his.
    A (1,1) coordinate makes every color land in exactly one side, so the
    block is complete in G1 xor G2; every other case yields fair coins.
    Uncovered pairs are filled with fair coins on Alice's side and vertex
    labels are randomly permuted.
    """
    if design.n != n or design.k != k:
        raise ParameterError("design dims do not match (n, k)")
    x, y, witness = _check_ud(x, y, design.num_blocks)
    rng = rng_for(seed, "xor-pc")
    perm = rng.permutation(n)
    rows, cols, free_i, free_j = _design_pairs(design)
    colors = rng.integers(1, 5, size=rows.shape)
    in_g1 = np.where(x[:, None] == 1,
                     (colors == 1) | (colors == 2),
                     (colors == 1) | (colors == 3))
    in_g2 = np.where(y[:, None] == 1,
                     (colors == 3) | (colors == 4),
                     (colors == 1) | (colors == 4))
    g1 = np.zeros((n, n), dtype=np.uint8)
    g2 = np.zeros((n, n), dtype=np.uint8)
    g1[rows[in_g1], cols[in_g1]] = 1
    g2[rows[in_g2], cols[in_g2]] = 1
    coins = rng.integers(0, 2, size=len(free_i), dtype=np.uint8)
    g1[free_i, free_j] = coins
    g1 = _symmetrize(g1, perm)
    g2 = _symmetrize(g2, perm)
    truth = PlantedTruth(kind="none")
    if witness is not None:
        block = sorted(int(perm[v]) for v in design.blocks[witness])
        truth = PlantedTruth(kind="clique", clique=block,
                             extra={"block_index": witness})
    return XorPairOutput(BitMatrix(g1, symmetric=True),
                         BitMatrix(g2, symmetric=True), truth, perm)


def _symmetrize(upper: np.ndarray, perm: np.ndarray) -> np.ndarray:
    full = upper | upper.T
    np.fill_diagonal(full, 0)
    return _permute_sym(full, perm)


def ud_to_srpc(x, y, n: int, k: int, design: CliqueDesign, seed: int
               ) -> SrpcOutput:
    """Two-player union game for the sandwich model.

    Block edges are colored red or blue with equal probability; Alice's
    share holds the red edges of her 1-blocks, Bob's the blue edges of his.
    The returned G_max extends the union with fresh coins on (0,0) blocks so
    that (G_min, union, G_max) realizes the sandwich of the matching
    hypothesis.
    """
    if design.n != n or design.k != k:
        raise ParameterError("design dims do not match (n, k)")
    x, y, witness = _check_ud(x, y, design.num_blocks)
    rng = rng_for(seed, "ud-srpc")
    perm = rng.permutation(n)
    rows, cols, free_i, free_j = _design_pairs(design)
    red = rng.integers(0, 2, size=rows.shape, dtype=np.uint8).astype(bool)
    alice = np.zeros((n, n), dtype=np.uint8)
    bob = np.zeros((n, n), dtype=np.uint8)
    a_take = red & (x[:, None] == 1)
    b_take = ~red & (y[:, None] == 1)
    alice[rows[a_take], cols[a_take]] = 1
    bob[rows[b_take], cols[b_take]] = 1
    coins = rng.integers(0, 2, size=len(free_i), dtype=np.uint8)
    alice[free_i, free_j] = coins

    # sandwich realization: (0,0) blocks gain fresh coins in G_max
    zero_blocks = (x == 0) & (y == 0)
    ext_coins = rng.integers(0, 2, size=rows.shape, dtype=np.uint8).astype(bool)
    extend = ext_coins & zero_blocks[:, None]
    g_max = alice | bob
    g_max = g_max.copy()
    g_max[rows[extend], cols[extend]] = 1
    g_min = np.zeros((n, n), dtype=np.uint8)
    truth = PlantedTruth(kind="none")
    if witness is not None:
        block = list(design.blocks[witness])
        g_min[np.ix_(block, block)] = 1
        np.fill_diagonal(g_min, 0)
        truth = PlantedTruth(kind="clique",
                             clique=sorted(int(perm[v]) for v in block),
                             extra={"block_index": witness})
    alice_m = BitMatrix(_symmetrize(alice, perm), symmetric=True)
    bob_m = BitMatrix(_symmetrize(bob, perm), symmetric=True)
    shares = PlayerShares([alice_m, bob_m], mode="union",
                          public_record={"seed_label": "ud-srpc"})
    return SrpcOutput(shares, BitMatrix(_symmetrize(g_max, perm), symmetric=True),
                      BitMatrix(_symmetrize(np.triu(g_min, 1), perm), symmetric=True),
                      truth, perm)


def xor_ud_to_bpc(x, y, n: int, r: int, s: int, seed: int) -> XorPairOutput:
    """XOR encoding over the biclique grid's full-size blocks."""
    design = biclique_partition(n, r, s)
    full = design.full_blocks()
    x, y, witness = _check_ud(x, y, len(full))
    rng = rng_for(seed, "xor-bpc")
    row_perm = rng.permutation(n)
    col_perm = rng.permutation(n)
    g1 = np.zeros((n, n), dtype=np.uint8)
    g2 = np.zeros((n, n), dtype=np.uint8)
    covered = np.zeros((n, n), dtype=bool)
    for pos, bi in enumerate(full):
        block_rows, block_cols = design.blocks[bi]
        rr = np.repeat(block_rows, len(block_cols))
        cc = np.tile(block_cols, len(block_rows))
        covered[rr, cc] = True
        colors = rng.integers(1, 5, size=len(rr))
        a_set = _COLOR_G1[int(x[pos])]
        b_set = _COLOR_G2[int(y[pos])]
        in1 = (colors == a_set[0]) | (colors == a_set[1])
        in2 = (colors == b_set[0]) | (colors == b_set[1])
        g1[rr[in1], cc[in1]] = 1
        g2[rr[in2], cc[in2]] = 1
    free_r, free_c = np.nonzero(~covered)
    g1[free_r, free_c] = rng.integers(0, 2, size=len(free_r), dtype=np.uint8)
    inv_r, inv_c = np.argsort(row_perm), np.argsort(col_perm)
    g1 = np.ascontiguousarray(g1[np.ix_(inv_r, inv_c)])
    g2 = np.ascontiguousarray(g2[np.ix_(inv_r, inv_c)])
    truth = PlantedTruth(kind="none")
    if witness is not None:
        block_rows, block_cols = design.blocks[full[witness]]
        truth = PlantedTruth(
            kind="biclique",
            biclique_rows=sorted(int(row_perm[v]) for v in block_rows),
            biclique_cols=sorted(int(col_perm[v]) for v in block_cols),
            extra={"block_index": full[witness]})
    return XorPairOutput(BitMatrix(g1), BitMatrix(g2), truth,
                         np.stack([row_perm, col_perm]))


def pe_to_pc(pe_inputs: BitMatrix, n: int, k: int, design: CliqueDesign,
             seed: int, planted_coord: Optional[int] = None
             ) -> Tuple[PlayerShares, PlantedTruth, np.ndarray]:
    """C(k,2)-player encoding: player p owns edge-slot p of every block.

    Blocks' vertex pairs are taken in lexicographic order, giving the fixed
    player-to-edge bijection.  Uncovered pairs go to player 0 as public
    coins; all shares are relabeled by one public vertex permutation.
    """
    players = k * (k - 1) // 2
    if design.n != n or design.k != k:
        raise ParameterError("design dims do not match (n, k)")
    if pe_inputs.rows != players or pe_inputs.cols != design.num_blocks:
        raise ParameterError(
            f"PE inputs must be {players} x {design.num_blocks}, got "
            f"{pe_inputs.rows} x {pe_inputs.cols}")
    rng = rng_for(seed, "pe-pc")
    perm = rng.permutation(n)
    rows, cols, free_i, free_j = _design_pairs(design)
    bits = pe_inputs.data
    shares = []
    for p in range(players):
        share = np.zeros((n, n), dtype=np.uint8)
        on = bits[p] == 1
        share[rows[on, p], cols[on, p]] = 1
        if p == 0:
            coins = rng.integers(0, 2, size=len(free_i), dtype=np.uint8)
            share[free_i, free_j] = coins
        shares.append(BitMatrix(_symmetrize(share, perm), symmetric=True))
    truth = PlantedTruth(kind="none")
    if planted_coord is not None:
        block = sorted(int(perm[v]) for v in design.blocks[planted_coord])
        truth = PlantedTruth(kind="clique", clique=block,
                             extra={"block_index": int(planted_coord)})
    return (PlayerShares(shares, mode="union",
                         public_record={"players": players}),
            truth, perm)


def pe_to_hh(pe_inputs: RealMatrix, n: int, k: int, sigma0: float,
             sigma1: float, seed: int, planted_coord: Optional[int] = None
             ) -> Tuple[PlayerShares, PlantedTruth, dict]:
    """k^2-player Gaussian encoding of hidden hubs.

    Rows are grouped into w = n//k sets of k; each used row's entries are
    grouped into w sets of k, and cell U_ij unions group i's rows with their
    j-th entry sets.  Coordinate (i, j) of the Gaussian game populates cell
    U_ij; player (alpha, beta) holds one entry per cell.  Entries outside
    the cells are N(0, sigma0^2) noise on player 0's share.
    """
    w = n // k
    if w < 1:
        raise ParameterError("need k <= n")
    if pe_inputs.rows != k * k or pe_inputs.cols != w * w:
        raise ParameterError(
            f"PE inputs must be {k * k} x {w * w}, got "
            f"{pe_inputs.rows} x {pe_inputs.cols}")
    rng = rng_for(seed, "pe-hh")
    used_rows = rng.permutation(n)[:w * k].reshape(w, k)
    col_sets = np.empty((n, w, k), dtype=np.int64)
    for row in used_rows.reshape(-1):
        col_sets[row] = rng.permutation(n)[:w * k].reshape(w, k)

    shares = [np.zeros((n, n)) for _ in range(k * k)]
    masks = [np.zeros((n, n), dtype=bool) for _ in range(k * k)]
    vals = pe_inputs.data
    for alpha in range(k):
        for beta in range(k):
            p = alpha * k + beta
            for i in range(w):
                row = used_rows[i, alpha]
                cols = col_sets[row, :, beta]       # one entry per cell column
                coords = i * w + np.arange(w)
                shares[p][row, cols] = vals[p, coords]
                masks[p][row, cols] = True
    assigned = np.logical_or.reduce(masks)
    noise = sigma0 * rng.standard_normal((n, n))
    shares[0] = np.where(assigned, shares[0], noise)
    masks[0] = masks[0] | ~assigned

    truth = PlantedTruth(kind="none")
    if planted_coord is not None:
        i_star, j_star = divmod(int(planted_coord), w)
        hub_rows = sorted(int(v) for v in used_rows[i_star])
        entries = {int(row): sorted(int(c) for c in col_sets[row, j_star])
                   for row in used_rows[i_star]}
        truth = PlantedTruth(kind="hub-rows", hub_rows=hub_rows,
                             hub_entries=entries,
                             extra={"coord": int(planted_coord)})
    players = PlayerShares([RealMatrix(sh) for sh in shares], mode="union",
                           masks=masks, public_record={"w": w})
    return players, truth, {"used_rows": used_rows, "col_sets": col_sets}


def findpe_to_findbpc(fpe_inputs: BitMatrix, n: int, r: int, s: int, seed: int
                      ) -> Tuple[BitMatrix, np.ndarray, PlantedTruth]:
    """Embed an r-player FindPE instance as a FindBPC instance.

    Plants s-1 all-ones columns on r special rows, fills the other rows with
    public coins, and embeds the FindPE bits in the r x (n-s+1) unset cells.
    Everything except those cells is publicly known (the returned mask).
    """
    if not (3 * math.log2(n) <= r <= s <= n / 2):
        raise ParameterError(
            f"findpe_to_findbpc requires 3*log2(n) <= r <= s <= n/2; "
            f"got n={n}, r={r}, s={s}")
    if fpe_inputs.rows != r or fpe_inputs.cols != n - s + 1:
        raise ParameterError(
            f"FindPE inputs must be {r} x {n - s + 1}, got "
            f"{fpe_inputs.rows} x {fpe_inputs.cols}")
    all_ones = np.flatnonzero(fpe_inputs.data.all(axis=0))
    if len(all_ones) != 1:
        raise ParameterError(
            f"FindPE promise violated: {len(all_ones)} all-ones columns")
    rng = rng_for(seed, "findpe-bpc")
    special_rows = np.sort(rng.choice(n, size=r, replace=False))
    planted_cols = np.sort(rng.choice(n, size=s - 1, replace=False))
    a = rng.integers(0, 2, size=(n, n), dtype=np.uint8)
    a[special_rows[:, None], planted_cols[None, :]] = 1
    open_cols = np.setdiff1d(np.arange(n), planted_cols)
    a[special_rows[:, None], open_cols[None, :]] = fpe_inputs.data
    known = np.ones((n, n), dtype=bool)
    known[special_rows[:, None], open_cols[None, :]] = False
    witness_col = int(open_cols[int(all_ones[0])])
    truth = PlantedTruth(
        kind="biclique",
        biclique_rows=[int(v) for v in special_rows],
        biclique_cols=sorted([int(c) for c in planted_cols] + [witness_col]),
        extra={"witness_col": witness_col})
    return BitMatrix(a), known, truth


# -- sparse-component reduction --------------------------------------------------

@dataclass
class BlReduction:
    """Recorded randomized reduction from a 2m-vertex graph to d x t samples."""

    d: int
    t: int
    k: int
    m: int
    kappa: int
    delta: float
    stack: TransformStack
    eta: np.ndarray
    v_left: np.ndarray              # source vertices used as rows, in row order
    v_right: np.ndarray             # source vertices used as columns, in order
    row_of_left_vertex: dict        # source vertex -> derived row index
    col_of_right_vertex: dict

    def materialize(self, g: BitMatrix) -> RealMatrix:
        return RealMatrix(materialize(self.stack, g.data).astype(np.float64))


def bl_r0_check(d: int, t: int, k: int, delta: float,
                sampling_constant: float = 2.0, gamma: float = 0.25) -> None:
    """Assert (d, t, k) lies in the reduction's admissible region.

    The leading sampling constant is configurable (asymptotic in the source
    analysis; the desk-scale default is 2).  Violations name the failed
    inequality.
    """
    if not 0 < delta < 1 / 3:
        raise ParameterError(f"delta must be in (0, 1/3), got {delta}")
    if k > d ** 0.49:
        raise ParameterError(f"region violation: k <= d^0.49 fails "
                             f"(k={k}, d^0.49={d ** 0.49:.2f})")
    lhs = sampling_constant * math.sqrt(
        k * math.log(6 * math.e * d / delta) / t)
    if lhs > 1:
        raise ParameterError(
            f"region violation: C*sqrt(k*log(6ed/delta)/t) <= 1 fails "
            f"(C={sampling_constant}, value={lhs:.3f})")
    if k < t ** gamma:
        raise ParameterError(f"region violation: k >= t^gamma fails "
                             f"(k={k}, t^{gamma}={t ** gamma:.2f})")
    if not t < d:
        raise ParameterError(f"region violation: t < d fails (t={t}, d={d})")


def bl_build(g: BitMatrix, d: int, t: int, k: int, m: int, kappa: int,
             delta: float, seed: int, sampling_constant: float = 2.0,
             gamma: float = 0.25) -> BlReduction:
    """Record the bl reduction as a TransformStack over the source graph.

    Steps: sample m left and t right vertices (disjoint), restrict to the
    bipartite block, insert d-m fresh coin rows at random positions, and
    apply the per-column sign map x -> eta*(2x - 1).  Any query against the
    produced d x t matrix routes through the stack to one query against G.
    """
    bl_r0_check(d, t, k, delta, sampling_constant, gamma)
    if not t <= m < d:
        raise ParameterError(f"region violation: t <= m < d fails "
                             f"(t={t}, m={m}, d={d})")
    if not k <= kappa <= m:
        raise ParameterError(f"region violation: k <= kappa <= m fails "
                             f"(k={k}, kappa={kappa}, m={m})")
    if g.rows != 2 * m or not g.symmetric:
        raise ParameterError(f"source graph must be symmetric on 2m={2 * m} "
                             f"vertices, got {g.rows}x{g.cols}")
    rng = rng_for(seed, "bl")
    verts = rng.permutation(2 * m)
    v_left = verts[:m]                       # already in random order
    v_right = rng.permutation(verts[m:])[:t]
    new_positions = np.sort(rng.choice(d, size=d - m, replace=False))
    old_positions = np.setdiff1d(np.arange(d), new_positions)
    eta = rng.choice(np.array([-1, 1], dtype=np.int64), size=t)

    ops = [SelectRows(tuple(int(v) for v in v_left)),
           SelectCols(tuple(int(v) for v in v_right))]
    for pos in new_positions:
        coin_row = rng.integers(0, 2, size=t, dtype=np.int64)
        ops.append(InsertRow(int(pos), tuple(int(b) for b in coin_row)))
    for j in range(t):
        ops.append(AffineCol(j, int(2 * eta[j]), int(-eta[j])))
    stack = TransformStack((2 * m, 2 * m), ops)

    row_of = {int(v): int(old_positions[i]) for i, v in enumerate(v_left)}
    col_of = {int(v): int(j) for j, v in enumerate(v_right)}
    return BlReduction(d=d, t=t, k=k, m=m, kappa=kappa, delta=delta,
                       stack=stack, eta=eta, v_left=v_left, v_right=v_right,
                       row_of_left_vertex=row_of, col_of_right_vertex=col_of)


# -- share reconstruction ----------------------------------------------------------

def reconstruct(shares: PlayerShares, mode: Optional[str] = None):
    """Fold player shares into one instance (union asserts disjointness)."""
    mode = mode or shares.mode
    players = shares.players
    if not players:
        raise ParameterError("no shares to reconstruct")
    if isinstance(players[0], RealMatrix):
        if mode != "union":
            raise ParameterError("real shares only reconstruct by union")
        if shares.masks is None:
            raise ParameterError("real shares need support masks")
        total_mask = np.zeros_like(shares.masks[0], dtype=np.int64)
        for msk in shares.masks:
            total_mask += msk
        if total_mask.max() > 1:
            raise ParameterError("real share supports overlap")
        out = np.zeros_like(players[0].data)
        for sh, msk in zip(players, shares.masks):
            out[msk] = sh.data[msk]
        return RealMatrix(out)
    if mode == "xor":
        acc = np.zeros_like(players[0].data)
        for sh in players:
            acc ^= sh.data
        return BitMatrix(acc, symmetric=players[0].symmetric)
    support = np.zeros_like(players[0].data, dtype=np.int64)
    for sh in players:
        support += sh.data
    if support.max() > 1:
        raise ParameterError("union shares have overlapping supports")
    return BitMatrix(support.astype(np.uint8), symmetric=players[0].symmetric)
