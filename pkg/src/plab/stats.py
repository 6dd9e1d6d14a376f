"""Statistical verification utilities: exact small-case oracles, frequency
tests, confidence intervals, and distances."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.special import gammaincc

from .errors import ParameterError
from .matrices import RealMatrix
from .seeds import derive_seed


def chi_square_uniformity(counts, expected_probs) -> Tuple[float, float]:
    """Pearson chi-square of observed counts against expected probabilities.

    Returns (statistic, p-value); the p-value is the regularized upper
    incomplete gamma Q(df/2, stat/2).  Requires total >= 5x cell count.
    """
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    if counts.shape != probs.shape or counts.ndim != 1:
        raise ParameterError("counts and expected_probs must be matching 1-d")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ParameterError("expected probabilities must sum to 1")
    total = counts.sum()
    if total < 5 * counts.size:
        raise ParameterError(f"need >= {5 * counts.size} observations, got {total}")
    expected = total * probs
    stat = float(np.sum((counts - expected) ** 2 / expected))
    df = counts.size - 1
    p_value = 1.0 if df == 0 else float(gammaincc(df / 2.0, stat / 2.0))
    return stat, p_value


def wilson_interval(successes: int, trials: int, z: float = 1.96
                    ) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ParameterError("successes must be in [0, trials]")
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p_hat * (1 - p_hat) / trials
                                   + z2 / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def hellinger_sq(p, q) -> float:
    """Squared Hellinger distance between two discrete distributions."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ParameterError("distributions must have the same support size")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise ParameterError("distributions must sum to 1 within 1e-9")
    if np.any(p < 0) or np.any(q < 0):
        raise ParameterError("probabilities must be nonnegative")
    return float(0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2))


def binomial_marginal_check(counts, trials: int, probs, alpha: float
                            ) -> dict:
    """Bonferroni-corrected per-cell binomial z gate.

    Valid whatever the dependence across cells; used for reduction marginal
    checks where edges of one block are correlated.
    """
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    from scipy.special import ndtri
    z_cut = float(ndtri(1.0 - alpha / (2.0 * counts.size)))
    sd = np.sqrt(trials * probs * (1.0 - probs))
    sd[sd == 0] = 1.0
    z = (counts - trials * probs) / sd
    worst = int(np.argmax(np.abs(z)))
    return {"passed": bool(np.all(np.abs(z) <= z_cut)),
            "worst_cell": worst, "worst_z": float(z.flat[worst]),
            "z_cut": z_cut}


def success_rate(trial_fn: Callable[[str, int], Tuple[bool, int]],
                 trials: int, seed: int, mapper=map) -> dict:
    """Run paired H0/H1 trials and report per-hypothesis rates with Wilson CIs.

    ``trial_fn(hypothesis, trial_seed)`` returns (correct, total_queries).
    Trial seeds are derived from ``seed`` so results do not depend on the
    mapper's scheduling.
    """
    jobs = [(h, derive_seed(seed, "trial", i, h))
            for i in range(trials) for h in ("h0", "h1")]
    results = list(mapper(_run_one, [(trial_fn, h, s) for h, s in jobs]))
    report = {"trials": trials}
    queries = [q for _, q in results]
    report["queries_mean"] = float(np.mean(queries)) if queries else 0.0
    report["queries_max"] = int(max(queries)) if queries else 0
    for h in ("h0", "h1"):
        wins = sum(ok for (ok, _), (hh, _) in zip(results, jobs) if hh == h)
        rate = wins / trials
        low, high = wilson_interval(wins, trials)
        report[f"success_{h}"] = rate
        report[f"ci_low_{h}"] = low
        report[f"ci_high_{h}"] = high
    return report


def _run_one(packed):
    trial_fn, hypothesis, trial_seed = packed
    return trial_fn(hypothesis, trial_seed)


# -- exact reduction oracle ----------------------------------------------------

COLORS_ALICE = {0: (1, 3), 1: (1, 2)}
COLORS_BOB = {0: (1, 4), 1: (3, 4)}


def exhaustive_block_oracle(k: int, case: Tuple[int, int]
                            ) -> Dict[Tuple[int, ...], Fraction]:
    """Exact XOR-edge-pattern distribution of one colored block.

    Enumerates all 4^C(k,2) colorings of a k-clique's edges under the
    4-color scheme for input case (x_i, y_i) and counts the resulting
    G1 xor G2 patterns with rational arithmetic.
    """
    x_bit, y_bit = case
    if x_bit not in (0, 1) or y_bit not in (0, 1):
        raise ParameterError("case must be a pair of bits")
    edges = k * (k - 1) // 2
    alice = COLORS_ALICE[x_bit]
    bob = COLORS_BOB[y_bit]
    counts: Dict[Tuple[int, ...], int] = {}
    for coloring in itertools.product((1, 2, 3, 4), repeat=edges):
        pattern = tuple(int((c in alice) != (c in bob)) for c in coloring)
        counts[pattern] = counts.get(pattern, 0) + 1
    total = 4 ** edges
    return {p: Fraction(c, total) for p, c in counts.items()}


def sparse_variance_scan(x, k: int) -> Tuple[Tuple[int, ...], float]:
    """Brute-force best k-sparse empirical variance (desk-scale SCDC oracle).

    Scans all C(d, k) supports; for each, the top eigenvalue of the k x k
    block of the empirical covariance is the best empirical variance over
    unit directions supported there.
    """
    data = x.data if isinstance(x, RealMatrix) else np.asarray(x, dtype=np.float64)
    d, t = data.shape
    if not 1 <= k <= d:
        raise ParameterError(f"need 1 <= k <= d, got d={d}, k={k}")
    n_supports = math.comb(d, k)
    if n_supports > 10 ** 6:
        raise ParameterError(f"C({d},{k}) = {n_supports} supports exceed 1e6")
    cov = data @ data.T / t
    supports = list(itertools.combinations(range(d), k))
    idx = np.array(supports)
    blocks = cov[idx[:, :, None], idx[:, None, :]]
    top = np.linalg.eigvalsh(blocks)[:, -1]
    best = int(np.argmax(top))
    return supports[best], float(top[best])
