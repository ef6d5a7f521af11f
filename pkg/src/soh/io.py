"""Snapshot files and diagnostics tables.

Binary snapshots are self-describing (magic, version, kind, grid dims,
time, parameter digest) followed by float64 little-endian arrays in a fixed
order; reading them back is bit-exact.  Each binary snapshot has a
plain-text tabular mirror (one cell per row, 17 significant digits) meant
for the plotting tools and external consumers; the mirror carries the same
header fields in comment lines.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import FieldState, ModelParams
from .errors import SnapshotError
from .twofluid import TwoFluidState

MAGIC = b"SOHSNAP\x00"
VERSION = 1
KIND_SINGLE = 1
KIND_TWOFLUID = 2

_HEADER = struct.Struct("<8sIIQQddd16s")

_SINGLE_FIELDS = ("rho", "q1", "q2")
_TWOFLUID_FIELDS = ("rho_plus", "rho_minus", "qp1", "qp2", "qm1", "qm2",
                    "wp1", "wp2", "wm1", "wm2")


def params_digest(params: ModelParams) -> str:
    """16 hex chars identifying the parameter set."""
    blob = repr(sorted(asdict(params).items())).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SnapshotMeta:
    kind: int
    nx: int
    ny: int
    dx: float
    dy: float
    time: float
    digest: str


def _fields_of(state) -> tuple[int, tuple[str, ...]]:
    if isinstance(state, FieldState):
        return KIND_SINGLE, _SINGLE_FIELDS
    if isinstance(state, TwoFluidState):
        return KIND_TWOFLUID, _TWOFLUID_FIELDS
    raise SnapshotError(f"cannot snapshot object of type {type(state).__name__}")


def write_snapshot(state, path, params: ModelParams,
                   text_mirror: bool = True) -> Path:
    """Write the binary snapshot at `path` (and a .txt mirror next to it)."""
    path = Path(path)
    kind, fields = _fields_of(state)
    arrays = [getattr(state, f) for f in fields]
    ny, nx = arrays[0].shape
    digest = params_digest(params)
    header = _HEADER.pack(MAGIC, VERSION, kind, nx, ny,
                          params.dx, params.dy, state.time,
                          digest.encode("ascii"))
    with open(path, "wb") as fh:
        fh.write(header)
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    if text_mirror:
        write_text_mirror(state, path.with_suffix(".txt"), params)
    return path


def write_text_mirror(state, path, params: ModelParams) -> Path:
    path = Path(path)
    kind, fields = _fields_of(state)
    arrays = [getattr(state, f) for f in fields]
    ny, nx = arrays[0].shape
    cols = "i j x y " + " ".join(fields)
    kind_name = "single" if kind == KIND_SINGLE else "twofluid"
    with open(path, "w") as fh:
        fh.write("# soh snapshot text mirror v1\n")
        fh.write(f"# kind={kind_name} nx={nx} ny={ny} dx={params.dx!r} "
                 f"dy={params.dy!r} time={state.time!r}\n")
        fh.write(f"# columns: {cols}\n")
        for j in range(ny):
            y = (j + 0.5) * params.dy
            for i in range(nx):
                x = (i + 0.5) * params.dx
                vals = " ".join(format(a[j, i], ".17g") for a in arrays)
                fh.write(f"{i} {j} {format(x, '.17g')} {format(y, '.17g')} {vals}\n")
    return path


def read_snapshot(path):
    """Read a binary snapshot; returns (state, SnapshotMeta)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"snapshot {path} truncated (no header)")
    magic, version, kind, nx, ny, dx, dy, time, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"snapshot {path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"snapshot {path}: unsupported version {version}")
    if kind == KIND_SINGLE:
        fields = _SINGLE_FIELDS
    elif kind == KIND_TWOFLUID:
        fields = _TWOFLUID_FIELDS
    else:
        raise SnapshotError(f"snapshot {path}: unknown kind {kind}")
    count = nx * ny
    expected = _HEADER.size + 8 * count * len(fields)
    if len(raw) != expected:
        raise SnapshotError(
            f"snapshot {path}: size {len(raw)} != expected {expected} "
            f"(dimension mismatch or truncation)")
    arrays = []
    off = _HEADER.size
    for _ in fields:
        a = np.frombuffer(raw, dtype="<f8", count=count, offset=off)
        arrays.append(a.reshape(ny, nx).copy())
        off += 8 * count
    meta = SnapshotMeta(kind=kind, nx=nx, ny=ny, dx=dx, dy=dy, time=time,
                        digest=digest.decode("ascii"))
    if kind == KIND_SINGLE:
        state = FieldState(*arrays, time=time)
    else:
        state = TwoFluidState(*arrays, time=time)
    return state, meta


class DiagnosticsWriter:
    """One text table per run: a header comment plus one row per step.

    Every float is rendered with repr-stable 17 significant digits, so
    identical runs produce byte-identical tables.
    """

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = list(columns)
        self._fh = open(self.path, "w")
        self._fh.write("# soh diagnostics v1\n")
        self._fh.write("# columns: " + " ".join(self.columns) + "\n")

    def row(self, values: dict):
        out = []
        for c in self.columns:
            v = values[c]
            if isinstance(v, float):
                out.append(format(v, ".17g"))
            else:
                out.append(str(v))
        self._fh.write(" ".join(out) + "\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
