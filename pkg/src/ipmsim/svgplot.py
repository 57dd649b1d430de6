"""Minimal deterministic SVG line charts for trajectories.

Renders stacked per-component panels sharing one time axis, with no external
plotting dependencies.  All coordinates are formatted with \"%.6g\" so the
same trajectory always yields byte-identical output.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Sequence, Union

import numpy as np

from .errors import DomainError
from .integrator import Trajectory

__all__ = ["render_panels", "render_trajectory_svg", "write_trajectory_svg"]

_COMPONENT_LABELS = {
    "x": "crop biomass x",
    "y": "susceptible pests y",
    "z": "infected pests z",
    "v": "biopesticide v",
    "s": "chemical pesticide s",
}
_COLORS = {
    "x": "#2e7d32",
    "y": "#c62828",
    "z": "#6a1b9a",
    "v": "#1565c0",
    "s": "#ef6c00",
}
_DEFAULT_COLOR = "#37474f"


def _fmt(value: float) -> str:
    return "%.6g" % float(value)


def render_panels(
    times: Sequence[float],
    series: Sequence[tuple[str, Sequence[float], str]],
    *,
    width: int = 900,
    panel_height: int = 110,
    title: str | None = None,
) -> str:
    """SVG document with one line panel per (label, values, color) triple."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise DomainError("need at least two sample times to plot")
    if not series:
        raise DomainError("need at least one series to plot")

    left, right, top, bottom, gap = 60, 15, 28 if title else 10, 30, 14
    plot_w = width - left - right
    height = top + len(series) * (panel_height + gap) - gap + bottom

    t0, t1 = float(t[0]), float(t[-1])
    t_scale = plot_w / (t1 - t0)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{left}" y="18" font-family="sans-serif" '
            f'font-size="13" fill="#263238">{title}</text>'
        )

    for idx, (label, values, color) in enumerate(series):
        vals = np.asarray(values, dtype=float)
        if vals.shape != t.shape:
            raise DomainError(f"series {label!r} length differs from times")
        y_top = top + idx * (panel_height + gap)
        v_lo = min(0.0, float(vals.min()))
        v_hi = float(vals.max())
        if v_hi <= v_lo:
            v_hi = v_lo + 1.0
        pad = 0.05 * (v_hi - v_lo)
        v_lo -= pad if v_lo < 0.0 else 0.0
        v_hi += pad
        v_scale = panel_height / (v_hi - v_lo)

        pts = []
        for ti, vi in zip(t, vals):
            px = left + (ti - t0) * t_scale
            py = y_top + panel_height - (vi - v_lo) * v_scale
            pts.append(f"{_fmt(px)},{_fmt(py)}")
        out.append(
            f'<rect x="{left}" y="{y_top}" width="{plot_w}" '
            f'height="{panel_height}" fill="none" stroke="#b0bec5" stroke-width="1"/>'
        )
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
            f'points="{" ".join(pts)}"/>'
        )
        out.append(
            f'<text x="{left + 6}" y="{y_top + 14}" font-family="sans-serif" '
            f'font-size="11" fill="#455a64">{label}</text>'
        )
        out.append(
            f'<text x="{left - 6}" y="{y_top + 12}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="#78909c">{_fmt(v_hi)}</text>'
        )
        out.append(
            f'<text x="{left - 6}" y="{y_top + panel_height}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="#78909c">{_fmt(v_lo)}</text>'
        )

    axis_y = height - bottom + 14
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx = t0 + frac * (t1 - t0)
        px = left + frac * plot_w
        out.append(
            f'<text x="{_fmt(px)}" y="{axis_y}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10" fill="#78909c">{_fmt(tx)}</text>'
        )
    out.append(
        f'<text x="{left + plot_w / 2:.0f}" y="{height - 4}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="11" fill="#455a64">t [days]</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_trajectory_svg(
    traj: Trajectory,
    components: Sequence[str] = ("x", "y", "z", "v", "s"),
    *,
    width: int = 900,
    panel_height: int = 110,
    title: str | None = None,
) -> str:
    """Stacked line panels of selected trajectory components."""
    series = []
    for name in components:
        values = traj.component(name)
        series.append(
            (
                _COMPONENT_LABELS.get(name, name),
                values,
                _COLORS.get(name, _DEFAULT_COLOR),
            )
        )
    return render_panels(
        traj.times, series, width=width, panel_height=panel_height, title=title
    )


def write_trajectory_svg(
    traj: Trajectory,
    target: Union[str, Path, IO[str]],
    components: Sequence[str] = ("x", "y", "z", "v", "s"),
    *,
    title: str | None = None,
) -> None:
    """Render and write the trajectory chart to a path or stream."""
    text = render_trajectory_svg(traj, components, title=title)
    if hasattr(target, "write"):
        target.write(text)  # type: ignore[union-attr]
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
