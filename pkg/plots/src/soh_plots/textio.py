"""Readers for the solver's plain-text output formats.

A snapshot text mirror starts with comment lines

    # soh snapshot text mirror v1
    # kind=<single|twofluid> nx=.. ny=.. dx=.. dy=.. time=..
    # columns: i j x y <field names...>

followed by one whitespace-separated row per cell.  Diagnostics tables use
the same comment-plus-rows convention with a single `# columns:` line.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SnapshotFormatError(Exception):
    """Text mirror is missing, malformed, or of an unexpected kind."""


@dataclass(frozen=True)
class TextSnapshot:
    kind: str                 # "single" or "twofluid"
    nx: int
    ny: int
    dx: float
    dy: float
    time: float
    fields: dict              # name -> (ny, nx) array

    @property
    def is_1d(self) -> bool:
        return self.ny == 1

    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5) * self.dy


def read_snapshot_text(path) -> TextSnapshot:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SnapshotFormatError(f"cannot read {path}: {exc}") from exc

    header = {}
    columns = None
    data_lines = []
    for line in text.splitlines():
        if line.startswith("# columns:"):
            columns = line.split(":", 1)[1].split()
        elif line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    key, val = token.split("=", 1)
                    header[key] = val
        elif line.strip():
            data_lines.append(line)
    if columns is None or "kind" not in header:
        raise SnapshotFormatError(f"{path} is not a snapshot text mirror")

    kind = header["kind"]
    nx, ny = int(header["nx"]), int(header["ny"])
    raw = np.loadtxt(data_lines, ndmin=2)
    if raw.shape != (nx * ny, len(columns)):
        raise SnapshotFormatError(
            f"{path}: expected {nx * ny} rows x {len(columns)} columns, "
            f"got {raw.shape}")
    fields = {}
    for k, name in enumerate(columns):
        if name in ("i", "j", "x", "y"):
            continue
        fields[name] = raw[:, k].reshape(ny, nx)
    return TextSnapshot(kind=kind, nx=nx, ny=ny,
                        dx=float(header["dx"]), dy=float(header["dy"]),
                        time=float(header["time"]), fields=fields)


def read_diagnostics(path) -> dict:
    """Diagnostics table as a dict of column name -> 1D array."""
    path = Path(path)
    columns = None
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("# columns:"):
            columns = line.split(":", 1)[1].split()
        elif not line.startswith("#") and line.strip():
            rows.append([float(tok) for tok in line.split()])
    if columns is None:
        raise SnapshotFormatError(f"{path} is not a diagnostics table")
    data = np.asarray(rows)
    return {c: data[:, k] for k, c in enumerate(columns)}
