"""Static SVG rendering of staircase curves and schedules.

Output is deterministic: fixed figure geometry, a fixed hash salt for SVG
ids, and no timestamp metadata, so golden-file tests compare bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import numpy as np

from .curve import StaircaseCurve
from .resources import Schedule

__all__ = ["render_svg"]

_CYCLE = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown", "tab:gray"]


def _save(fig, path: Path) -> Path:
    with matplotlib.rc_context({"svg.hashsalt": "bidcurve"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _stair_edges(curve: StaircaseCurve) -> np.ndarray:
    """Finite x-extent for plotting: breakpoints padded by 5% of the span
    (or the sweep range when there are no breakpoints)."""
    bps = curve.breakpoints
    if bps.size:
        lo, hi = float(bps[0]), float(bps[-1])
    else:
        lo, hi = curve.sweep_lo, curve.sweep_hi
    pad = 0.05 * max(hi - lo, 1.0)
    return np.concatenate([[lo - pad], bps, [hi + pad]])


def _draw_curve(ax, curve: StaircaseCurve, color: str, label: str | None = None):
    edges = _stair_edges(curve)
    first = True
    for i, lv in enumerate(curve.levels):
        ax.hlines(lv, edges[i], edges[i + 1], colors=color, linewidth=2,
                  label=label if first else None)
        first = False
    for bp, lo, hi in zip(curve.breakpoints, curve.levels, curve.levels[1:]):
        ax.vlines(bp, lo, hi, colors=color, linestyles="dashed", linewidth=1)


def render_svg(obj, path: str | Path, currency: str = "USD", names: list[str] | None = None) -> Path:
    """Render a StaircaseCurve, a Schedule, or a list of curves (overlaid
    with a legend) to an SVG file."""
    path = Path(path)
    if isinstance(obj, StaircaseCurve):
        if obj.levels.size == 0:
            raise ValueError("cannot render an empty curve")
        fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
        _draw_curve(ax, obj, _CYCLE[0])
        ax.set_xlabel(f"first-period price ({currency}/MWh)")
        ax.set_ylabel("first-period power (MW)")
        fig.tight_layout()
        return _save(fig, path)
    if isinstance(obj, Schedule):
        T = len(obj.power)
        fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
        ax.step(np.arange(1, T + 1), obj.power, where="post", color=_CYCLE[0], label="power (MW)")
        ax.set_xlabel("period")
        ax.set_ylabel("power (MW)")
        ax2 = ax.twinx()
        ax2.plot(np.arange(1, T + 2), obj.energy, color=_CYCLE[1], label="stored energy (MWh)")
        ax2.set_ylabel("stored energy (MWh)")
        h1, l1 = ax.get_legend_handles_labels()
        h2, l2 = ax2.get_legend_handles_labels()
        ax.legend(h1 + h2, l1 + l2, loc="best")
        fig.tight_layout()
        return _save(fig, path)
    curves = list(obj)
    if not curves:
        raise ValueError("cannot render an empty curve family")
    fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
    for i, c in enumerate(curves):
        name = names[i] if names else f"curve {i + 1}"
        _draw_curve(ax, c, _CYCLE[i % len(_CYCLE)], label=name)
    ax.set_xlabel(f"first-period price ({currency}/MWh)")
    ax.set_ylabel("first-period power (MW)")
    ax.legend(loc="best")
    fig.tight_layout()
    return _save(fig, path)
