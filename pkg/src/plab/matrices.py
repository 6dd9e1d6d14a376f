"""Matrix containers, planted ground truth, and the instance file format.

Instances are stored with a 16-byte header::

    magic "PLAB" | version u8 | kind u8 | reserved u16 | rows u32 | cols u32

followed by the payload: packed row-major bits for bit matrices (kinds 0/1)
or little-endian float64 for real matrices (kind 2).  Ground truth goes to a
JSON sidecar next to the instance file.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParameterError

MAGIC = b"PLAB"
FORMAT_VERSION = 1

KIND_BIT_SYMMETRIC = 0  # graph adjacency: symmetric, zero diagonal
KIND_BIT = 1            # general 0/1 matrix (bipartite adjacency, PE inputs)
KIND_REAL = 2           # float64 matrix (hidden hubs, SCDC samples)

_HEADER = struct.Struct("<4sBBHII")


@dataclass
class BitMatrix:
    """Dense 0/1 matrix; ``symmetric`` flags non-bipartite graph adjacency."""

    data: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.uint8)
        if self.data.ndim != 2:
            raise ParameterError("bit matrix must be 2-dimensional")
        if self.data.size and self.data.max() > 1:
            raise ParameterError("bit matrix entries must be 0/1")
        if self.symmetric:
            if self.data.shape[0] != self.data.shape[1]:
                raise ParameterError("symmetric matrix must be square")
            if np.any(np.diag(self.data)):
                raise ParameterError("adjacency matrix must have zero diagonal")
            if not np.array_equal(self.data, self.data.T):
                raise ParameterError("adjacency matrix must be symmetric")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def kind(self) -> int:
        return KIND_BIT_SYMMETRIC if self.symmetric else KIND_BIT


@dataclass
class RealMatrix:
    """Dense real matrix with finite float64 entries."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ParameterError("real matrix must be 2-dimensional")
        if not np.all(np.isfinite(self.data)):
            raise ParameterError("real matrix entries must be finite")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def kind(self) -> int:
        return KIND_REAL


@dataclass
class PlantedTruth:
    """Ground truth for a generated instance.

    ``kind`` is one of ``none``, ``clique``, ``biclique``, ``hub-rows``,
    ``spike``, ``pe-column``, ``ud-witness``.  Only the fields relevant to
    the kind are populated.
    """

    kind: str = "none"
    clique: Optional[list] = None            # vertex set R
    biclique_rows: Optional[list] = None     # row set R
    biclique_cols: Optional[list] = None     # column set S
    hub_rows: Optional[list] = None          # row set S
    hub_entries: Optional[dict] = None       # row -> planted column list
    spike: Optional[list] = None             # unit vector u (dense list)
    index: Optional[int] = None              # planted PE column / UD witness
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for name in ("clique", "biclique_rows", "biclique_cols", "hub_rows",
                     "hub_entries", "spike", "index"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.extra:
            out["extra"] = self.extra
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PlantedTruth":
        known = {k: obj.get(k) for k in ("clique", "biclique_rows",
                                         "biclique_cols", "hub_rows",
                                         "hub_entries", "spike", "index")}
        return cls(kind=obj.get("kind", "none"), extra=obj.get("extra", {}),
                   **known)


def write_instance(path, matrix, truth: Optional[PlantedTruth] = None) -> None:
    """Write a matrix (and optional truth sidecar) in the PLAB format."""
    path = Path(path)
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, matrix.kind, 0,
                          matrix.rows, matrix.cols)
    if matrix.kind == KIND_REAL:
        payload = matrix.data.astype("<f8").tobytes()
    else:
        payload = np.packbits(matrix.data.reshape(-1)).tobytes()
    path.write_bytes(header + payload)
    if truth is not None:
        sidecar_path(path).write_text(
            json.dumps(truth.to_json(), sort_keys=True, indent=2) + "\n")


def read_instance(path):
    """Read back an instance; returns (matrix, truth-or-None)."""
    path = Path(path)
    raw = path.read_bytes()
    magic, version, kind, _, rows, cols = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ParameterError(f"{path}: not a PLAB instance file")
    if version != FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    if kind == KIND_REAL:
        data = np.frombuffer(body, dtype="<f8", count=rows * cols)
        matrix = RealMatrix(data.reshape(rows, cols).copy())
    elif kind in (KIND_BIT, KIND_BIT_SYMMETRIC):
        bits = np.unpackbits(np.frombuffer(body, dtype=np.uint8),
                             count=rows * cols)
        matrix = BitMatrix(bits.reshape(rows, cols).copy(),
                           symmetric=(kind == KIND_BIT_SYMMETRIC))
    else:
        raise ParameterError(f"{path}: unknown kind tag {kind}")
    truth = None
    side = sidecar_path(path)
    if side.exists():
        truth = PlantedTruth.from_json(json.loads(side.read_text()))
    return matrix, truth


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".truth.json")
