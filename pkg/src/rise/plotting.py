"""Static SVG rendering of a sorted-residual analysis.

The figure mirrors the interactive view: one polyline per group drawn at
global rank positions, horizontal median rulers (overall plus one per
group), diamond markers on convex knees and star markers on concave knees
for every scope that detected them, shaded segmentation bands, and an
emphasized y = 0 line.  Groups are distinguished by color-blind-safe colors
plus dash patterns so the curves survive grayscale.

Rendering is deterministic: a fixed SVG hash salt and a stripped Date field
make repeated renders of the same analysis byte-identical.  Knee markers
carry stable element ids (``knee-<scope>-<side>``) so files can be checked
for marker presence without parsing geometry.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib
from matplotlib.figure import Figure
from matplotlib.lines import Line2D

from .indicators import Analysis
from .knees import KneePair

GROUP_COLORS = ("#0072B2", "#D55E00")
GROUP_DASHES = ((), (4, 2))
RULER_COLOR = "#555555"
BAND_COLOR = "#888888"
MARKER_SIZE = 9.0

_SCOPE_COLORS = {"global": "#000000", "group0": GROUP_COLORS[0], "group1": GROUP_COLORS[1]}


def _draw_knees(ax, pair: KneePair) -> None:
    color = _SCOPE_COLORS[pair.scope]
    if pair.left.detected:
        line = ax.plot(
            [pair.left.percentile], [pair.left.residual],
            marker="D", markersize=MARKER_SIZE, markerfacecolor="none",
            markeredgecolor=color, markeredgewidth=1.6, linestyle="none",
        )[0]
        line.set_gid(f"knee-{pair.scope}-left")
    if pair.right.detected:
        line = ax.plot(
            [pair.right.percentile], [pair.right.residual],
            marker="*", markersize=MARKER_SIZE + 4, markerfacecolor="none",
            markeredgecolor=color, markeredgewidth=1.6, linestyle="none",
        )[0]
        line.set_gid(f"knee-{pair.scope}-right")


def render_figure(analysis: Analysis) -> Figure:
    """Build the matplotlib figure for one analysis (no I/O)."""
    fig = Figure(figsize=(9.0, 5.4), dpi=100)
    ax = fig.add_subplot(111)

    curve = analysis.curve
    for i, band in enumerate(analysis.segments.segments):
        patch = ax.axvspan(band.lo, band.hi, color=BAND_COLOR, alpha=0.06 if i % 2 else 0.12)
        patch.set_gid(f"segment-{i}")

    ax.axhline(0.0, color="#222222", linewidth=1.3, zorder=2).set_gid("zero-line")

    rulers = (
        ("ruler-global", analysis.summary.m_global, RULER_COLOR, (6, 3)),
        ("ruler-group0", analysis.summary.m_group0, GROUP_COLORS[0], (1, 2)),
        ("ruler-group1", analysis.summary.m_group1, GROUP_COLORS[1], (1, 2)),
    )
    for gid, y, color, dashes in rulers:
        ax.axhline(y, color=color, linewidth=1.0, dashes=dashes, zorder=3).set_gid(gid)

    for g in (0, 1):
        mask = curve.group_tags == g
        line = ax.plot(
            curve.rank_positions[mask], curve.residuals[mask],
            color=GROUP_COLORS[g], dashes=GROUP_DASHES[g] or (None, None),
            linewidth=1.6, zorder=4,
        )[0]
        line.set_gid(f"curve-group{g}")

    for pair in (analysis.knees_global, analysis.knees_group0, analysis.knees_group1):
        _draw_knees(ax, pair)

    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(-1.05, 1.05)
    ax.set_xlabel("normalized rank")
    ax.set_ylabel("signed residual")
    sel = analysis.selection
    ax.set_title(f"{sel.run_id} / {sel.attribute} / {sel.environment}")

    handles = [
        Line2D([], [], color=GROUP_COLORS[0], linewidth=1.6, label="group 0"),
        Line2D([], [], color=GROUP_COLORS[1], dashes=GROUP_DASHES[1], linewidth=1.6, label="group 1"),
        Line2D([], [], color=RULER_COLOR, dashes=(6, 3), linewidth=1.0, label="median (overall)"),
        Line2D([], [], color="#000000", marker="D", markerfacecolor="none", linestyle="none", label="convex knee"),
        Line2D([], [], color="#000000", marker="*", markerfacecolor="none", linestyle="none", label="concave knee"),
    ]
    ax.legend(handles=handles, loc="upper left", fontsize=8, framealpha=0.9)
    return fig


def render_svg(analysis: Analysis) -> bytes:
    """Render the analysis to SVG bytes; identical analyses give identical bytes."""
    fig = render_figure(analysis)
    buf = io.BytesIO()
    with matplotlib.rc_context({"svg.hashsalt": "sorted-residuals"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def save_svg(analysis: Analysis, path: str | Path) -> None:
    Path(path).write_bytes(render_svg(analysis))
