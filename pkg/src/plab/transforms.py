"""Query rewriting from a derived matrix X to its source matrix Y.

A TransformStack is an ordered list of structural operations applied to a
source matrix: inserting rows/columns with known constant values, permuting
or selecting rows/columns, and entrywise affine maps y -> a*y + b on one
row or column.  Any query against the derived matrix, in any of the five
query models, rewrites to at most one query against the source matrix plus
a correction computed from the recorded constants.

Selection ops cover the submatrix-restriction step used by the sparse-
component reduction (sampling vertices); a query on a submatrix embeds into
the source coordinates with zero weights elsewhere, so it still costs a
single source query.

For the GF(2) sketch model the stack is interpreted over GF(2): only
affine ops with a == 1 and b in {0, 1} and bit-valued insertions are
expressible; anything else raises ModelCapabilityError.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from .errors import ModelCapabilityError, ParameterError


# -- operations ---------------------------------------------------------------

@dataclass(frozen=True)
class InsertRow:
    pos: int
    values: tuple


@dataclass(frozen=True)
class InsertCol:
    pos: int
    values: tuple


@dataclass(frozen=True)
class PermuteRows:
    perm: tuple  # X[i, :] = Y[perm[i], :]


@dataclass(frozen=True)
class PermuteCols:
    perm: tuple  # X[:, j] = Y[:, perm[j]]


@dataclass(frozen=True)
class SelectRows:
    indices: tuple  # X = Y[indices, :], indices distinct


@dataclass(frozen=True)
class SelectCols:
    indices: tuple


@dataclass(frozen=True)
class AffineRow:
    row: int
    a: float
    b: float


@dataclass(frozen=True)
class AffineCol:
    col: int
    a: float
    b: float


Op = Union[InsertRow, InsertCol, PermuteRows, PermuteCols,
           SelectRows, SelectCols, AffineRow, AffineCol]


def _shape_after(op: Op, shape: Tuple[int, int]) -> Tuple[int, int]:
    r, c = shape
    if isinstance(op, InsertRow):
        if not (0 <= op.pos <= r) or len(op.values) != c:
            raise ParameterError(f"InsertRow at {op.pos} invalid for shape {shape}")
        return r + 1, c
    if isinstance(op, InsertCol):
        if not (0 <= op.pos <= c) or len(op.values) != r:
            raise ParameterError(f"InsertCol at {op.pos} invalid for shape {shape}")
        return r, c + 1
    if isinstance(op, PermuteRows):
        if sorted(op.perm) != list(range(r)):
            raise ParameterError("PermuteRows perm is not a bijection")
        return r, c
    if isinstance(op, PermuteCols):
        if sorted(op.perm) != list(range(c)):
            raise ParameterError("PermuteCols perm is not a bijection")
        return r, c
    if isinstance(op, SelectRows):
        if len(set(op.indices)) != len(op.indices) or \
                any(not 0 <= i < r for i in op.indices):
            raise ParameterError("SelectRows indices must be distinct and in range")
        return len(op.indices), c
    if isinstance(op, SelectCols):
        if len(set(op.indices)) != len(op.indices) or \
                any(not 0 <= j < c for j in op.indices):
            raise ParameterError("SelectCols indices must be distinct and in range")
        return r, len(op.indices)
    if isinstance(op, AffineRow):
        if not 0 <= op.row < r:
            raise ParameterError(f"AffineRow row {op.row} out of range")
        return r, c
    if isinstance(op, AffineCol):
        if not 0 <= op.col < c:
            raise ParameterError(f"AffineCol col {op.col} out of range")
        return r, c
    raise ParameterError(f"unknown op {op!r}")


class TransformStack:
    """Ordered ops carrying source and derived shapes; immutable once built."""

    def __init__(self, source_shape: Tuple[int, int], ops: Sequence[Op] = ()):
        self.source_shape = tuple(source_shape)
        self.ops: List[Op] = list(ops)
        shape = self.source_shape
        self._shapes = [shape]
        for op in self.ops:
            shape = _shape_after(op, shape)
            self._shapes.append(shape)
        self.derived_shape = shape

    def then(self, other: "TransformStack") -> "TransformStack":
        """Concatenate: self first, then ``other`` applied to the result."""
        if other.source_shape != self.derived_shape:
            raise ParameterError("stack shapes do not chain")
        return TransformStack(self.source_shape, self.ops + other.ops)

    def is_gf2_compatible(self) -> bool:
        for op in self.ops:
            if isinstance(op, (AffineRow, AffineCol)):
                if op.a != 1 or op.b not in (0, 1):
                    return False
            if isinstance(op, (InsertRow, InsertCol)):
                if any(v not in (0, 1) for v in op.values):
                    return False
        return True


# -- materialization (the reference oracle) -----------------------------------

def materialize(stack: TransformStack, y: np.ndarray,
                mod2: bool = False) -> np.ndarray:
    """Apply the ops in order to Y.  With mod2=True, interpret over GF(2)."""
    y = np.asarray(y)
    if y.shape != stack.source_shape:
        raise ParameterError(f"Y shape {y.shape} != source {stack.source_shape}")
    if mod2 and not stack.is_gf2_compatible():
        raise ModelCapabilityError("stack is not expressible over GF(2)")
    want_float = np.issubdtype(y.dtype, np.floating) or any(
        isinstance(op, (AffineRow, AffineCol)) and
        (not float(op.a).is_integer() or not float(op.b).is_integer())
        for op in stack.ops) or any(
        isinstance(op, (InsertRow, InsertCol)) and
        any(not float(v).is_integer() for v in op.values)
        for op in stack.ops)
    x = y.astype(np.float64 if want_float else np.int64)
    for op in stack.ops:
        if isinstance(op, InsertRow):
            x = np.insert(x, op.pos, np.asarray(op.values, dtype=x.dtype), axis=0)
        elif isinstance(op, InsertCol):
            x = np.insert(x, op.pos, np.asarray(op.values, dtype=x.dtype), axis=1)
        elif isinstance(op, PermuteRows):
            x = x[list(op.perm), :]
        elif isinstance(op, PermuteCols):
            x = x[:, list(op.perm)]
        elif isinstance(op, SelectRows):
            x = x[list(op.indices), :]
        elif isinstance(op, SelectCols):
            x = x[:, list(op.indices)]
        elif isinstance(op, AffineRow):
            x = x.copy()
            x[op.row, :] = op.a * x[op.row, :] + op.b
        elif isinstance(op, AffineCol):
            x = x.copy()
            x[:, op.col] = op.a * x[:, op.col] + op.b
    if mod2:
        x = np.mod(x, 2).astype(np.uint8)
    return x


# -- sketch rewriting ----------------------------------------------------------

def rewrite_sketch(stack: TransformStack, w: np.ndarray):
    """Rewrite a derived linear sketch: w^T vec(X) = w'^T vec(Y) + offset."""
    rows, cols = stack.derived_shape
    w = np.asarray(w)
    if w.shape != (rows * cols,):
        raise ParameterError(f"w must have length {rows * cols}")
    mat = w.reshape(rows, cols).astype(
        np.float64 if np.issubdtype(w.dtype, np.floating) else np.int64)
    offset = 0
    for op, shape in zip(reversed(stack.ops), reversed(stack._shapes[:-1])):
        r, c = shape
        if isinstance(op, InsertRow):
            offset = offset + mat[op.pos, :] @ np.asarray(op.values)
            mat = np.delete(mat, op.pos, axis=0)
        elif isinstance(op, InsertCol):
            offset = offset + mat[:, op.pos] @ np.asarray(op.values)
            mat = np.delete(mat, op.pos, axis=1)
        elif isinstance(op, PermuteRows):
            out = np.empty_like(mat)
            out[list(op.perm), :] = mat
            mat = out
        elif isinstance(op, PermuteCols):
            out = np.empty_like(mat)
            out[:, list(op.perm)] = mat
            mat = out
        elif isinstance(op, SelectRows):
            out = np.zeros((r, mat.shape[1]), dtype=mat.dtype)
            out[list(op.indices), :] = mat
            mat = out
        elif isinstance(op, SelectCols):
            out = np.zeros((mat.shape[0], c), dtype=mat.dtype)
            out[:, list(op.indices)] = mat
            mat = out
        elif isinstance(op, AffineRow):
            offset = offset + op.b * mat[op.row, :].sum()
            mat = mat.copy()
            mat[op.row, :] = op.a * mat[op.row, :]
        elif isinstance(op, AffineCol):
            offset = offset + op.b * mat[:, op.col].sum()
            mat = mat.copy()
            mat[:, op.col] = op.a * mat[:, op.col]
    return mat.reshape(-1), offset


def rewrite_f2_sketch(stack: TransformStack, w: np.ndarray):
    """Rewrite a GF(2) sketch: returns (w' bits over Y, offset bit)."""
    if not stack.is_gf2_compatible():
        raise ModelCapabilityError(
            "GF(2) rewriting supports insert/permute/select and affine with "
            "a=1, b in {0,1} only")
    rows, cols = stack.derived_shape
    w = np.asarray(w)
    if w.shape != (rows * cols,):
        raise ParameterError(f"w must have length {rows * cols}")
    if w.size and not np.all((w == 0) | (w == 1)):
        raise ParameterError("GF(2) sketch entries must be bits")
    mat = w.reshape(rows, cols).astype(np.uint8)
    offset = 0
    for op, shape in zip(reversed(stack.ops), reversed(stack._shapes[:-1])):
        r, c = shape
        if isinstance(op, InsertRow):
            offset ^= int(mat[op.pos, :] @ np.asarray(op.values, dtype=np.int64)) & 1
            mat = np.delete(mat, op.pos, axis=0)
        elif isinstance(op, InsertCol):
            offset ^= int(mat[:, op.pos] @ np.asarray(op.values, dtype=np.int64)) & 1
            mat = np.delete(mat, op.pos, axis=1)
        elif isinstance(op, PermuteRows):
            out = np.empty_like(mat)
            out[list(op.perm), :] = mat
            mat = out
        elif isinstance(op, PermuteCols):
            out = np.empty_like(mat)
            out[:, list(op.perm)] = mat
            mat = out
        elif isinstance(op, SelectRows):
            out = np.zeros((r, mat.shape[1]), dtype=np.uint8)
            out[list(op.indices), :] = mat
            mat = out
        elif isinstance(op, SelectCols):
            out = np.zeros((mat.shape[0], c), dtype=np.uint8)
            out[:, list(op.indices)] = mat
            mat = out
        elif isinstance(op, AffineRow):
            offset ^= (int(op.b) & (int(mat[op.row, :].sum()) & 1))
        elif isinstance(op, AffineCol):
            offset ^= (int(op.b) & (int(mat[:, op.col].sum()) & 1))
    return mat.reshape(-1), offset


# -- edge-probe rewriting -------------------------------------------------------

@dataclass
class ProbePlan:
    """Either a rescaled source probe or a fully known constant."""

    constant: float = None
    i: int = None
    j: int = None
    a: float = 1
    b: float = 0

    @property
    def resolved(self) -> bool:
        return self.constant is not None


def rewrite_edge_probe(stack: TransformStack, i: int, j: int) -> ProbePlan:
    """Trace probe (i, j) on X back to one source entry (or a constant)."""
    rows, cols = stack.derived_shape
    if not (0 <= i < rows and 0 <= j < cols):
        raise ParameterError(f"probe ({i},{j}) out of derived range")
    a, b = 1, 0
    for op in reversed(stack.ops):
        if isinstance(op, InsertRow):
            if i == op.pos:
                return ProbePlan(constant=a * op.values[j] + b)
            if i > op.pos:
                i -= 1
        elif isinstance(op, InsertCol):
            if j == op.pos:
                return ProbePlan(constant=a * op.values[i] + b)
            if j > op.pos:
                j -= 1
        elif isinstance(op, PermuteRows):
            i = op.perm[i]
        elif isinstance(op, PermuteCols):
            j = op.perm[j]
        elif isinstance(op, SelectRows):
            i = op.indices[i]
        elif isinstance(op, SelectCols):
            j = op.indices[j]
        elif isinstance(op, AffineRow):
            if i == op.row:
                a, b = a * op.a, a * op.b + b
        elif isinstance(op, AffineCol):
            if j == op.col:
                a, b = a * op.a, a * op.b + b
    return ProbePlan(i=i, j=j, a=a, b=b)


# -- Mv rewriting ----------------------------------------------------------------

class MvPlan:
    """One source Mv query vector plus post-corrections for the answer."""

    def __init__(self, source_vector: np.ndarray, steps: list):
        self.source_vector = source_vector
        self._steps = steps  # applied in order to the source answer

    def finish(self, result: np.ndarray) -> np.ndarray:
        res = np.asarray(result)
        for step in self._steps:
            res = step(res)
        return res


def rewrite_mv(stack: TransformStack, v: np.ndarray) -> MvPlan:
    """Rewrite X @ v into a single source query Y @ v' plus corrections."""
    rows, cols = stack.derived_shape
    v = np.asarray(v)
    if v.shape != (cols,):
        raise ParameterError(f"v must have length {cols}")
    v = v.astype(np.float64 if np.issubdtype(v.dtype, np.floating) else np.int64)
    steps = []
    for op, shape in zip(reversed(stack.ops), reversed(stack._shapes[:-1])):
        r, c = shape
        if isinstance(op, AffineCol):
            vc = v[op.col]
            add = op.b * vc
            if add != 0:
                steps.append(lambda res, add=add: res + add)
            v = v.copy()
            v[op.col] = op.a * vc
        elif isinstance(op, AffineRow):
            sv = v.sum()
            steps.append(lambda res, row=op.row, a=op.a, b=op.b, sv=sv:
                         _patch_row(res, row, a, b * sv))
        elif isinstance(op, InsertCol):
            contrib = v[op.pos] * np.asarray(op.values, dtype=v.dtype)
            if np.any(contrib != 0):
                steps.append(lambda res, contrib=contrib: res + contrib)
            v = np.delete(v, op.pos)
        elif isinstance(op, InsertRow):
            known = np.asarray(op.values, dtype=v.dtype) @ v
            steps.append(lambda res, pos=op.pos, known=known:
                         np.insert(res, pos, known))
        elif isinstance(op, PermuteCols):
            out = np.zeros(c, dtype=v.dtype)
            out[list(op.perm)] = v
            v = out
        elif isinstance(op, PermuteRows):
            steps.append(lambda res, perm=list(op.perm): res[perm])
        elif isinstance(op, SelectCols):
            out = np.zeros(c, dtype=v.dtype)
            out[list(op.indices)] = v
            v = out
        elif isinstance(op, SelectRows):
            steps.append(lambda res, idx=list(op.indices): res[idx])
    steps.reverse()
    return MvPlan(v, steps)


def _patch_row(res, row, a, add):
    res = np.array(res, copy=True)
    res[row] = a * res[row] + add
    return res


# -- uTMv rewriting ---------------------------------------------------------------

def rewrite_utmv(stack: TransformStack, u: np.ndarray, v: np.ndarray):
    """Rewrite u^T X v: returns (u', v', offset) with answer = u'^T Y v' + offset."""
    rows, cols = stack.derived_shape
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != (rows,) or v.shape != (cols,):
        raise ParameterError(f"u/v must have lengths {rows}/{cols}")
    want_float = np.issubdtype(u.dtype, np.floating) or \
        np.issubdtype(v.dtype, np.floating)
    dt = np.float64 if want_float else np.int64
    u = u.astype(dt)
    v = v.astype(dt)
    offset = 0
    for op, shape in zip(reversed(stack.ops), reversed(stack._shapes[:-1])):
        r, c = shape
        if isinstance(op, AffineRow):
            offset = offset + u[op.row] * op.b * v.sum()
            u = u.copy()
            u[op.row] = op.a * u[op.row]
        elif isinstance(op, AffineCol):
            offset = offset + v[op.col] * op.b * u.sum()
            v = v.copy()
            v[op.col] = op.a * v[op.col]
        elif isinstance(op, InsertRow):
            offset = offset + u[op.pos] * (np.asarray(op.values, dtype=v.dtype) @ v)
            u = np.delete(u, op.pos)
        elif isinstance(op, InsertCol):
            offset = offset + v[op.pos] * (u @ np.asarray(op.values, dtype=u.dtype))
            v = np.delete(v, op.pos)
        elif isinstance(op, PermuteRows):
            out = np.zeros(r, dtype=u.dtype)
            out[list(op.perm)] = u
            u = out
        elif isinstance(op, PermuteCols):
            out = np.zeros(c, dtype=v.dtype)
            out[list(op.perm)] = v
            v = out
        elif isinstance(op, SelectRows):
            out = np.zeros(r, dtype=u.dtype)
            out[list(op.indices)] = u
            u = out
        elif isinstance(op, SelectCols):
            out = np.zeros(c, dtype=v.dtype)
            out[list(op.indices)] = v
            v = out
    return u, v, offset


# -- one-query simulators (issue at most one source query) -------------------------

def simulate_edge_probe(stack: TransformStack, session, i: int, j: int):
    plan = rewrite_edge_probe(stack, i, j)
    if plan.resolved:
        return plan.constant
    return plan.a * session.edge_probe(plan.i, plan.j) + plan.b


def simulate_mv(stack: TransformStack, session, v):
    plan = rewrite_mv(stack, v)
    return plan.finish(session.mv(plan.source_vector))


def simulate_utmv(stack: TransformStack, session, u, v):
    u2, v2, offset = rewrite_utmv(stack, u, v)
    return session.utmv(u2, v2) + offset


def simulate_sketch(stack: TransformStack, session, w):
    w2, offset = rewrite_sketch(stack, w)
    return session.sketch(w2) + offset


def simulate_f2_sketch(stack: TransformStack, session, w):
    w2, offset = rewrite_f2_sketch(stack, w)
    return session.f2_sketch(w2) ^ offset
