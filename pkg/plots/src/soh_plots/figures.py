"""Figure builders over snapshot text mirrors.

All color mapping is a pure function of the configured range, never of the
data, so frames at different times are directly comparable; rendering has
no embedded timestamps, so identical inputs give identical image bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import LinearSegmentedColormap  # noqa: E402
import numpy as np  # noqa: E402

from .textio import SnapshotFormatError, TextSnapshot, read_snapshot_text

# sequential map for densities: light beige through brown into black, so the
# congested bin is the darkest color
DENSITY_CMAP = LinearSegmentedColormap.from_list(
    "crowd_density", ["#f4e8cf", "#c98f4e", "#7a4a1f", "#000000"])

# diverging map for signed imbalance fields: blue (negative), green (zero),
# red (positive)
SIGNED_CMAP = LinearSegmentedColormap.from_list(
    "lane_signed", ["#2b4cbe", "#3fa43f", "#d23b3b"])

KINDS = ("density", "quiver", "cross-section", "lane-panels")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw from which snapshot, and where to put it."""

    snapshot: Path
    kind: str
    output: Path
    vmin: float | None = None
    vmax: float | None = None
    subsample: int = 8

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SnapshotFormatError(
                f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def _save(fig, output):
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150, metadata={"Date": None})
    plt.close(fig)
    return output


def _require(snap: TextSnapshot, kind: str, wanted: str):
    if snap.kind != wanted:
        raise SnapshotFormatError(
            f"{kind} figures need a {wanted} snapshot, got {snap.kind!r}")


def _extent(snap):
    return (0.0, snap.nx * snap.dx, 0.0, snap.ny * snap.dy)


def plot_density(spec: FigureSpec) -> Path:
    """Density heatmap with a fixed color range; congested cells darkest."""
    snap = read_snapshot_text(spec.snapshot)
    _require(snap, "density", "single")
    vmin = 0.0 if spec.vmin is None else spec.vmin
    vmax = 1.0 if spec.vmax is None else spec.vmax
    fig, ax = plt.subplots(figsize=(5.4, 4.4))
    im = ax.imshow(snap.fields["rho"], origin="lower", cmap=DENSITY_CMAP,
                   vmin=vmin, vmax=vmax, extent=_extent(snap), aspect="auto")
    fig.colorbar(im, ax=ax, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"density, t = {snap.time:g}")
    return _save(fig, spec.output)


def plot_quiver(spec: FigureSpec) -> Path:
    """Velocity-direction arrows, subsampled every `subsample` cells."""
    snap = read_snapshot_text(spec.snapshot)
    _require(snap, "quiver", "single")
    if snap.is_1d:
        raise SnapshotFormatError(
            "quiver needs a 2D snapshot; use the cross-section figure for 1D runs")
    k = max(1, spec.subsample)
    x = snap.x_centers()[::k]
    y = snap.y_centers()[::k]
    rho = snap.fields["rho"][::k, ::k]
    u1 = snap.fields["q1"][::k, ::k] / rho
    u2 = snap.fields["q2"][::k, ::k] / rho
    fig, ax = plt.subplots(figsize=(5.0, 4.6))
    ax.quiver(x, y, u1, u2, color="#1f4fbf", angles="xy",
              scale_units="xy", scale=1.0 / (1.8 * k * snap.dx), width=0.003)
    ax.set_xlim(0, snap.nx * snap.dx)
    ax.set_ylim(0, snap.ny * snap.dy)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"velocity direction, t = {snap.time:g}")
    return _save(fig, spec.output)


def plot_cross_section(spec: FigureSpec) -> Path:
    """Mid-row profiles of the density and both momentum components."""
    snap = read_snapshot_text(spec.snapshot)
    _require(snap, "cross-section", "single")
    row = snap.ny // 2
    x = snap.x_centers()
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.6, 5.2), sharex=True)
    ax1.plot(x, snap.fields["rho"][row], color="#7a4a1f")
    ax1.set_ylabel("density")
    if spec.vmin is not None or spec.vmax is not None:
        ax1.set_ylim(spec.vmin, spec.vmax)
    ax2.plot(x, snap.fields["q1"][row], label="q1", color="#1f4fbf")
    ax2.plot(x, snap.fields["q2"][row], label="q2", color="#d23b3b")
    ax2.set_xlabel("x")
    ax2.set_ylabel("momentum")
    ax2.legend(loc="best")
    ax1.set_title(f"cross-section at mid height, t = {snap.time:g}")
    return _save(fig, spec.output)


def plot_lane_panels(spec: FigureSpec) -> Path:
    """Net flow Dq1 (top) and species imbalance Drho (bottom), signed map."""
    snap = read_snapshot_text(spec.snapshot)
    _require(snap, "lane-panels", "twofluid")
    drho = snap.fields["rho_plus"] - snap.fields["rho_minus"]
    dq1 = snap.fields["qp1"] + snap.fields["qm1"]
    lim = 0.5 if spec.vmax is None else abs(spec.vmax)
    vmin = -lim if spec.vmin is None else spec.vmin
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.2, 8.2))
    for ax, field, label in ((ax1, dq1, "Dq1 (net x-flow)"),
                             (ax2, drho, "Drho (species imbalance)")):
        im = ax.imshow(field, origin="lower", cmap=SIGNED_CMAP,
                       vmin=vmin, vmax=lim, extent=_extent(snap), aspect="auto")
        fig.colorbar(im, ax=ax)
        ax.set_title(f"{label}, t = {snap.time:g}")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    return _save(fig, spec.output)


PLOTTERS = {
    "density": plot_density,
    "quiver": plot_quiver,
    "cross-section": plot_cross_section,
    "lane-panels": plot_lane_panels,
}


def render(spec: FigureSpec) -> Path:
    return PLOTTERS[spec.kind](spec)
