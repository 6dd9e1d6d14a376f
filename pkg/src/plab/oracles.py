"""Hidden-matrix query sessions with exact per-model accounting.

A session wraps one hidden matrix and answers queries in five models:
edge-probe, Mv, uTMv, linear sketch over the reals, and GF(2) sketch.
Counters only ever increase and answers are pure functions of
(hidden, query).  Sessions are single-writer: callers serialize queries on
one session; distinct sessions are independent.

Sketch queries address vec(A) in row-major order.  Query vectors carry
integer entries bounded by max(rows, cols)**magnitude_exp; bit-matrix
answers use exact integer arithmetic (wide integers when int64 could
overflow), real-matrix answers are float64 with relative error <= 1e-9.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import BudgetExceededError, ParameterError
from .matrices import BitMatrix, RealMatrix

MODELS = ("edge_probe", "mv", "utmv", "sketch", "f2_sketch")

_INT64_SAFE = 2 ** 62


@dataclass
class SparseVec:
    """Sparse query vector: positions into vec(A) plus their values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values)
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ParameterError("sparse vector needs matching 1-d indices/values")


class OracleSession:
    """Query session over one hidden BitMatrix or RealMatrix."""

    def __init__(self, hidden: Union[BitMatrix, RealMatrix],
                 budget: Optional[int] = None, record_transcript: bool = False,
                 magnitude_exp: int = 10):
        self.hidden = hidden
        self.is_bits = isinstance(hidden, BitMatrix)
        self._a = hidden.data
        self._flat = self._a.reshape(-1)
        self._a_wide = None  # lazy int64 copy of a bit matrix, for fast matvecs
        self.rows = hidden.rows
        self.cols = hidden.cols
        self.budget = budget
        self.magnitude_exp = magnitude_exp
        self.counters = {model: 0 for model in MODELS}
        self.transcript = [] if record_transcript else None

    def _wide(self) -> np.ndarray:
        if self._a_wide is None:
            self._a_wide = self._a.astype(np.int64)
        return self._a_wide

    # -- accounting ---------------------------------------------------------

    def query_counts(self) -> dict:
        return dict(self.counters)

    def total_queries(self) -> int:
        return sum(self.counters.values())

    def _charge(self, model: str, amount: int = 1):
        if self.budget is not None and self.total_queries() + amount > self.budget:
            raise BudgetExceededError(
                f"query budget {self.budget} exhausted "
                f"({self.total_queries()} used, {amount} requested)")
        self.counters[model] += amount

    def _record(self, model: str, payload, answer):
        if self.transcript is None:
            return
        digest = hashlib.sha256(payload).hexdigest()
        if isinstance(answer, np.ndarray):
            answer = answer.tolist()
        elif isinstance(answer, np.generic):
            answer = answer.item()
        self.transcript.append({"model": model, "payload_digest": digest,
                                "answer": answer})

    def dump_transcript(self, fh) -> None:
        """Write the transcript as JSON lines to an open text file."""
        if self.transcript is None:
            raise ParameterError("transcript recording was not enabled")
        for rec in self.transcript:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    # -- validation ---------------------------------------------------------

    @property
    def magnitude_bound(self) -> int:
        return max(self.rows, self.cols, 2) ** self.magnitude_exp

    def _check_vector(self, v, length: int, name: str) -> np.ndarray:
        v = np.asarray(v)
        if v.shape != (length,):
            raise ParameterError(f"{name} must have length {length}, got {v.shape}")
        return self._check_values(v, name)

    def _check_values(self, v: np.ndarray, name: str) -> np.ndarray:
        if v.dtype == object:
            mags = max((abs(int(x)) for x in v.reshape(-1)), default=0)
        else:
            if not np.issubdtype(v.dtype, np.number):
                raise ParameterError(f"{name} must be numeric")
            if np.issubdtype(v.dtype, np.floating):
                if self.is_bits and not np.all(v == np.round(v)):
                    raise ParameterError(f"{name} must be integer-valued for a "
                                         f"bit-matrix session")
            mags = float(np.max(np.abs(v))) if v.size else 0
        if mags > self.magnitude_bound:
            raise ParameterError(
                f"{name} entry magnitude {mags} exceeds bound "
                f"n^{self.magnitude_exp} = {self.magnitude_bound}")
        return v

    # -- models -------------------------------------------------------------

    def edge_probe(self, i: int, j: int):
        """Return entry (i, j); one edge-probe query."""
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise ParameterError(f"probe ({i},{j}) out of range "
                                 f"{self.rows}x{self.cols}")
        self._charge("edge_probe")
        answer = self._a[i, j]
        answer = int(answer) if self.is_bits else float(answer)
        self._record("edge_probe", np.array([i, j], dtype=np.int64).tobytes(),
                     answer)
        return answer

    def edge_probes(self, rows_idx, cols_idx):
        """Batch of independent edge probes; charges one query per pair."""
        rows_idx = np.asarray(rows_idx, dtype=np.int64)
        cols_idx = np.asarray(cols_idx, dtype=np.int64)
        if rows_idx.shape != cols_idx.shape or rows_idx.ndim != 1:
            raise ParameterError("edge_probes needs matching 1-d index arrays")
        if rows_idx.size:
            if rows_idx.min() < 0 or rows_idx.max() >= self.rows \
                    or cols_idx.min() < 0 or cols_idx.max() >= self.cols:
                raise ParameterError("edge_probes index out of range")
        self._charge("edge_probe", int(rows_idx.size))
        answers = self._a[rows_idx, cols_idx]
        self._record("edge_probe",
                     np.stack([rows_idx, cols_idx]).tobytes(), answers)
        return answers

    def mv(self, v):
        """Return A @ v; one Mv query."""
        v = self._check_vector(v, self.cols, "v")
        self._charge("mv")
        answer = self._matvec(v)
        self._record("mv", np.ascontiguousarray(v).tobytes()
                     if v.dtype != object else repr(v.tolist()).encode(), answer)
        return answer

    def utmv(self, u, v):
        """Return u^T A v; one uTMv query."""
        u = self._check_vector(u, self.rows, "u")
        v = self._check_vector(v, self.cols, "v")
        self._charge("utmv")
        answer = self._bilinear(u, v)
        payload = (np.ascontiguousarray(u).tobytes() if u.dtype != object
                   else repr(u.tolist()).encode()) + \
                  (np.ascontiguousarray(v).tobytes() if v.dtype != object
                   else repr(v.tolist()).encode())
        self._record("utmv", payload, answer)
        return answer

    def sketch(self, w):
        """Return <w, vec(A)> over the reals; one linear-sketch query.

        ``w`` is either a dense vector of length rows*cols or a SparseVec.
        """
        self._charge("sketch")
        if isinstance(w, SparseVec):
            idx, vals = self._check_sparse(w)
            answer = self._dot_flat(idx, vals)
            payload = idx.tobytes() + np.ascontiguousarray(vals).tobytes()
        else:
            w = self._check_vector(w, self.rows * self.cols, "w")
            answer = self._dot_dense(w)
            payload = (np.ascontiguousarray(w).tobytes() if w.dtype != object
                       else repr(w.tolist()).encode())
        self._record("sketch", payload, answer)
        return answer

    def f2_sketch(self, w):
        """Return <w, vec(A)> over GF(2); one F2-sketch query (bit matrices)."""
        if not self.is_bits:
            raise ParameterError("f2_sketch requires a bit matrix")
        self._charge("f2_sketch")
        if isinstance(w, SparseVec):
            idx, vals = self._check_sparse(w)
            if vals.size and not np.all((vals == 0) | (vals == 1)):
                raise ParameterError("f2_sketch entries must be bits")
            idx = idx[vals != 0]
            answer = int(self._flat[idx].sum() & 1)
            payload = idx.tobytes()
        else:
            w = np.asarray(w)
            if w.shape != (self.rows * self.cols,):
                raise ParameterError(f"w must have length {self.rows * self.cols}")
            if w.size and not np.all((w == 0) | (w == 1)):
                raise ParameterError("f2_sketch entries must be bits")
            answer = int(np.bitwise_and(
                int(self._flat @ w.astype(np.int64) if w.size else 0), 1))
            payload = np.ascontiguousarray(w, dtype=np.uint8).tobytes()
        self._record("f2_sketch", payload, answer)
        return answer

    # -- arithmetic backends --------------------------------------------------

    def _check_sparse(self, w: SparseVec):
        idx, vals = w.indices, w.values
        if idx.size:
            if idx.min() < 0 or idx.max() >= self.rows * self.cols:
                raise ParameterError("sparse sketch index out of range")
        self._check_values(vals, "w")
        return idx, vals

    def _max_abs(self, v) -> float:
        if v.dtype == object:
            return float(max((abs(int(x)) for x in v.reshape(-1)), default=0))
        return float(np.max(np.abs(v))) if v.size else 0.0

    def _matvec(self, v):
        if not self.is_bits:
            return self._a @ np.asarray(v, dtype=np.float64)
        if v.dtype != object and self.cols * max(1.0, self._max_abs(v)) < _INT64_SAFE:
            v64 = np.asarray(v, dtype=np.int64)
            nz = np.flatnonzero(v64)
            if nz.size * 4 < self.cols:
                # sparse query vector: gather the touched columns only
                return self._a[:, nz].astype(np.int64) @ v64[nz]
            return self._wide() @ v64
        vo = np.array([int(x) for x in v], dtype=object)
        return self._a.astype(object) @ vo

    def _bilinear(self, u, v):
        if not self.is_bits:
            av = self._a @ np.asarray(v, dtype=np.float64)
            return float(np.asarray(u, dtype=np.float64) @ av)
        big = self.rows * self.cols * max(1.0, self._max_abs(u)) \
            * max(1.0, self._max_abs(v)) >= _INT64_SAFE
        if u.dtype == object or v.dtype == object or big:
            uo = np.array([int(x) for x in u], dtype=object)
            vo = np.array([int(x) for x in v], dtype=object)
            return int(uo @ (self._a.astype(object) @ vo))
        return int(np.asarray(u, dtype=np.int64) @ self._matvec(v))

    def _dot_flat(self, idx, vals):
        picked = self._flat[idx]
        if not self.is_bits:
            return float(picked @ np.asarray(vals, dtype=np.float64))
        if vals.dtype != object and \
                idx.size * max(1.0, self._max_abs(vals)) < _INT64_SAFE:
            return int(picked.astype(np.int64) @ np.asarray(vals, dtype=np.int64))
        return int(sum(int(p) * int(x) for p, x in zip(picked, vals)))

    def _dot_dense(self, w):
        if not self.is_bits:
            return float(self._flat @ np.asarray(w, dtype=np.float64))
        if w.dtype != object and \
                self.rows * self.cols * max(1.0, self._max_abs(w)) < _INT64_SAFE:
            return int(self._flat.astype(np.int64) @ np.asarray(w, dtype=np.int64))
        wo = np.array([int(x) for x in w], dtype=object)
        return int(self._flat.astype(object) @ wo)


def indicator_sketch(rows: int, cols: int, i: int, j: int) -> SparseVec:
    """Sparse weight-1 sketch of a single cell in row-major vec order."""
    return SparseVec(np.array([i * cols + j]), np.array([1]))
