"""Twin-knee detection on sorted residual curves.

The detector is a Kneedle variant: normalize both axes to [0, 1], form the
difference between the curve and the diagonal, and accept the first interior
local maximum of that difference whose tail drops more than the sensitivity
allows.  Convex-increasing input is point-reflected through (0.5, 0.5) into
the canonical concave-increasing form and the found index mapped back, so the
two shapes are exact mirrors of each other.

A sorted residual curve gets two knees: a convex left knee below the median
split and a concave right knee above it, separating the low-error regime from
the two high-error tails.  Subgroup knees keep their residual coordinate but
are re-ranked against the full population so displacements are comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import NonMonotonicInput, NotDetected, TooFewPoints
from .residuals import SortedCurve

CONVEX = "convex_increasing"
CONCAVE = "concave_increasing"

KIND_LEFT = "convex_left"
KIND_RIGHT = "concave_right"

SCOPE_GLOBAL = "global"
SCOPE_GROUP0 = "group0"
SCOPE_GROUP1 = "group1"

#: Sensitivity back-off schedule: halve on failure, give up after the last value.
SENSITIVITY_SCHEDULE = (1.0, 0.5, 0.25, 0.125)


@dataclass(frozen=True)
class KneePoint:
    kind: str  # KIND_LEFT or KIND_RIGHT
    detected: bool
    residual: float | None = None
    percentile: float | None = None
    sensitivity_used: float = SENSITIVITY_SCHEDULE[0]


@dataclass(frozen=True)
class KneePair:
    left: KneePoint
    right: KneePoint
    scope: str


def _undetected_pair(scope: str) -> KneePair:
    s_min = SENSITIVITY_SCHEDULE[-1]
    return KneePair(
        left=KneePoint(KIND_LEFT, False, sensitivity_used=s_min),
        right=KneePoint(KIND_RIGHT, False, sensitivity_used=s_min),
        scope=scope,
    )


def kneedle(
    points_x: np.ndarray,
    points_y: np.ndarray,
    shape: str,
    sensitivity: float = 1.0,
) -> int | None:
    """Return the knee index of a monotone curve, or None when no knee survives.

    Requires at least 3 points, strictly increasing x, and nondecreasing y.
    The returned index is always interior (never an endpoint).
    """
    x = np.asarray(points_x, dtype=np.float64)
    y = np.asarray(points_y, dtype=np.float64)
    if x.shape[0] < 3:
        raise TooFewPoints(f"kneedle needs >= 3 points, got {x.shape[0]}")
    if x.shape != y.shape:
        raise NonMonotonicInput("x and y must have equal length")
    if np.any(np.diff(x) <= 0):
        raise NonMonotonicInput("x must be strictly increasing")
    if np.any(np.diff(y) < 0):
        raise NonMonotonicInput("y must be nondecreasing")
    if shape not in (CONVEX, CONCAVE):
        raise ValueError(f"unknown shape {shape!r}")
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")

    y_span = y[-1] - y[0]
    if y_span == 0.0:
        return None  # flat curve: no curvature, no knee
    x_n = (x - x[0]) / (x[-1] - x[0])
    y_n = (y - y[0]) / y_span

    if shape == CONVEX:
        # Point reflection through (0.5, 0.5) turns convex-increasing into the
        # canonical concave-increasing form; the index maps back mirrored.
        x_n = 1.0 - x_n[::-1]
        y_n = 1.0 - y_n[::-1]

    idx = _concave_knee(x_n, y_n, sensitivity)
    if idx is None:
        return None
    if shape == CONVEX:
        idx = x.shape[0] - 1 - idx
    return idx


def _concave_knee(x_n: np.ndarray, y_n: np.ndarray, sensitivity: float) -> int | None:
    """Kneedle core on a normalized concave-increasing curve.

    For each interior local maximum of the difference curve y_n - x_n, the
    threshold is its own height minus sensitivity times the mean x spacing;
    the maximum is accepted once the difference curve drops below that
    threshold before the next local maximum (or the end of the curve).
    """
    y_d = y_n - x_n
    n = y_d.shape[0]
    interior = np.arange(1, n - 1)
    is_lmx = (y_d[interior] >= y_d[interior - 1]) & (y_d[interior] >= y_d[interior + 1])
    lmx = interior[is_lmx]
    if lmx.shape[0] == 0:
        return None

    mean_dx = float(np.diff(x_n).mean())
    thresholds = y_d[lmx] - sensitivity * mean_dx
    # Minimum of the difference curve between each local max (exclusive) and
    # the next one (inclusive), the last segment running to the curve end.
    seg_min = np.minimum.reduceat(y_d, lmx + 1)
    accepted = seg_min < thresholds
    if not np.any(accepted):
        return None
    return int(lmx[np.argmax(accepted)])


def detect_twin_knees(
    curve: SortedCurve,
    sensitivity_schedule: tuple[float, ...] = SENSITIVITY_SCHEDULE,
    smooth_window: int = 0,
) -> KneePair:
    """Detect the convex left and concave right knees of one sorted curve.

    The curve is split at the median rank index m = n // 2; the left half
    (indices 0..m inclusive) is searched with the convex shape, the right
    half (m+1..n-1) with the concave shape.  Each side independently backs
    off through the sensitivity schedule and reports detected=False when the
    schedule is exhausted.  A detected knee's percentile is its rank within
    the full curve, not within its half.

    smooth_window > 1 applies a centered moving average to the residuals
    before detection (coordinates are still reported from the raw curve);
    default is off, since sorted curves are already monotone.
    """
    n = curve.n
    if n < 7:
        raise TooFewPoints(f"twin-knee detection needs n >= 7, got {n}")
    y = curve.residuals
    if smooth_window > 1:
        # edge-replicated padding keeps the averaged curve nondecreasing
        w = smooth_window
        half = w // 2
        padded = np.pad(y, (half, w - 1 - half), mode="edge")
        y = np.convolve(padded, np.ones(w) / w, mode="valid")
    mid = n // 2
    left = _detect_side(curve, y, 0, mid + 1, CONVEX, KIND_LEFT, sensitivity_schedule)
    right = _detect_side(curve, y, mid + 1, n, CONCAVE, KIND_RIGHT, sensitivity_schedule)
    return KneePair(left=left, right=right, scope=SCOPE_GLOBAL)


def _detect_side(
    curve: SortedCurve,
    y: np.ndarray,
    lo: int,
    hi: int,
    shape: str,
    kind: str,
    schedule: tuple[float, ...],
) -> KneePoint:
    xs = curve.rank_positions[lo:hi]
    ys = y[lo:hi]
    for s in schedule:
        idx = kneedle(xs, ys, shape, s)
        if idx is not None:
            g = lo + idx
            return KneePoint(
                kind=kind,
                detected=True,
                residual=float(curve.residuals[g]),
                percentile=float(curve.rank_positions[g]),
                sensitivity_used=s,
            )
    return KneePoint(kind=kind, detected=False, sensitivity_used=schedule[-1])


def map_subgroup_knee_to_global(
    knee: KneePoint,
    subgroup_curve: SortedCurve,
    global_curve: SortedCurve,
) -> KneePoint:
    """Re-rank a subgroup knee against the full population.

    The residual coordinate is kept; the percentile becomes the count of
    global residuals <= the knee residual (rightmost rank for ties) divided
    by the global size.
    """
    if not knee.detected:
        raise NotDetected(f"cannot map an undetected {knee.kind} knee")
    if __debug__:
        # the knee residual must come from the subgroup curve
        pos = np.searchsorted(subgroup_curve.residuals, knee.residual)
        assert pos < subgroup_curve.n and subgroup_curve.residuals[pos] == knee.residual
    rank = int(np.searchsorted(global_curve.residuals, knee.residual, side="right"))
    return replace(knee, percentile=rank / global_curve.n)


def knee_analysis(
    global_curve: SortedCurve,
    group0_curve: SortedCurve | None,
    group1_curve: SortedCurve | None,
) -> tuple[KneePair, KneePair, KneePair]:
    """Twin knees on the global curve and both subgroups, in global rank space.

    A subgroup curve that is missing or too short degrades to an undetected
    pair instead of failing the whole analysis; the global curve must be
    long enough (TooFewPoints propagates).
    """
    g_pair = detect_twin_knees(global_curve)

    def subgroup(curve: SortedCurve | None, scope: str) -> KneePair:
        if curve is None:
            return _undetected_pair(scope)
        try:
            pair = detect_twin_knees(curve)
        except TooFewPoints:
            return _undetected_pair(scope)
        left, right = pair.left, pair.right
        if left.detected:
            left = map_subgroup_knee_to_global(left, curve, global_curve)
        if right.detected:
            right = map_subgroup_knee_to_global(right, curve, global_curve)
        return KneePair(left=left, right=right, scope=scope)

    return (
        g_pair,
        subgroup(group0_curve, SCOPE_GROUP0),
        subgroup(group1_curve, SCOPE_GROUP1),
    )
