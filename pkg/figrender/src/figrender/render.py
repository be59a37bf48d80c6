"""Deterministic figure rendering from trajectory/grid/border data files."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spec import (
    EmptyInput,
    FigureSpec,
    read_border_json,
    read_grid_json,
    read_trajectory_csv,
)

# one fixed style; figures must be reproducible byte-for-byte
plt.rcParams.update({
    "figure.figsize": (6.0, 6.0),
    "font.size": 9,
    "svg.hashsalt": "figrender",
})

_NEG_COLOR = "tab:blue"   # growing dots while the scanned variable is negative
_POS_COLOR = "tab:red"    # growing dots on the positive side


def _maybe_rescale(x: np.ndarray, y: np.ndarray, enabled: bool):
    """Replace radii from the origin by their square roots (keeps angles)."""
    if not enabled:
        return x, y
    r = np.hypot(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r > 0, np.sqrt(r) / np.where(r > 0, r, 1.0), 0.0)
    return x * scale, y * scale


def _draw_trajectories(ax, data, sqrt_rescale: bool):
    for bid in sorted(data.branches):
        rows = data.branches[bid]
        rez = np.array([r[0] for r in rows])
        imz = np.array([r[1] for r in rows])
        xs = np.array([r[2] for r in rows])
        ys = np.array([r[3] for r in rows])
        xs, ys = _maybe_rescale(xs, ys, sqrt_rescale)
        # the scan progress variable: whichever of Re z / Im z actually moves
        prog = rez if np.ptp(rez) >= np.ptp(imz) else imz
        neg = prog < 0
        for mask, color in ((neg, _NEG_COLOR), (~neg, _POS_COLOR)):
            n = int(mask.sum())
            if n == 0:
                continue
            # dot sizes grow with progress inside each sign segment
            sizes = 2.0 + 18.0 * np.linspace(0.0, 1.0, n)
            ax.scatter(xs[mask], ys[mask], s=sizes, c=color, linewidths=0,
                       rasterized=False)
    ax.axhline(0.0, lw=0.4, color="0.6")
    ax.axvline(0.0, lw=0.4, color="0.6")


def _draw_grid(ax, grid):
    re_axis = np.array(grid["re_axis"])
    im_axis = np.array(grid["im_axis"])
    values = np.array(grid["values"])
    mesh = ax.pcolormesh(re_axis, im_axis, values, cmap="Greys",
                         shading="nearest")
    plt.colorbar(mesh, ax=ax, fraction=0.046)
    for line in grid.get("zero_contour", []):
        pts = np.array(line)
        if len(pts) >= 2:
            ax.plot(pts[:, 0], pts[:, 1], lw=1.2, color="tab:orange")


def _draw_border(ax, points):
    rez = np.array([p["re_z"] for p in points])
    border = np.array([p["im_border"] for p in points])
    pred = np.array([p["predicted"] for p in points])
    order = np.argsort(rez)
    ax.plot(rez[order], border[order], "o-", ms=4, color=_NEG_COLOR,
            label="computed border")
    ax.plot(rez[order], pred[order], "--", color=_POS_COLOR,
            label="predicted leading order")
    ax.legend(loc="best")


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path.

    Deterministic for fixed inputs: fixed style, no timestamps in metadata.
    """
    fig, ax = plt.subplots()
    try:
        if spec.style == "trajectory":
            if not spec.inputs:
                raise EmptyInput("no input files")
            for path in spec.inputs:
                _draw_trajectories(ax, read_trajectory_csv(path), spec.sqrt_rescale)
        elif spec.style == "grid":
            if not spec.inputs:
                raise EmptyInput("no input files")
            _draw_grid(ax, read_grid_json(spec.inputs[0]))
        elif spec.style == "border":
            if not spec.inputs:
                raise EmptyInput("no input files")
            _draw_border(ax, read_border_json(spec.inputs[0]))
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
        if spec.title:
            ax.set_title(spec.title)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix == ".svg":
            fig.savefig(out, format="svg", metadata={"Date": None})
        else:
            fig.savefig(out, format="png", dpi=spec.dpi, metadata={})
        return str(out)
    finally:
        plt.close(fig)
