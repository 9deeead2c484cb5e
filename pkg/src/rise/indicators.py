"""Residual-based fairness indicators and the full report pipeline.

Three indicators come from the sorted residual curve: median alignment
(1 minus half the absolute gap between re-centered group medians), and the
mean relative horizontal / vertical displacement between the two groups'
twin knees, each normalized by the corresponding global knee coordinate.
They sit alongside the standard threshold metrics accuracy, demographic
parity (positive-rate ratio) and mean difference (absolute rate gap).

Knees that were not detected and normalizers smaller than EPS make a
knee-displacement side invalid; indicators over invalid sides degrade to a
partial value (one side) or an undefined value with a reason code, never to
NaN or infinity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from operator import attrgetter
from typing import Sequence

import numpy as np

from .errors import DomainError, EmptyInput, MissingGroup, PipelineFailure, RiseError
from .knees import KneePair, knee_analysis
from .residuals import (
    MedianSummary,
    PredictionRecord,
    SortedCurve,
    group_curves,
    median_summary_arrays,
    sort_curve,
)

#: Division guard for knee-coordinate normalizers.
EPS = 1e-9

DEFAULT_THRESHOLD = 0.5
DEFAULT_MID_BINS = 4

REASON_UNDETECTED = "undetected knee"
REASON_ZERO_NORMALIZER = "zero normalizer"
REASON_ZERO_BASE_RATE = "zero base rate in group 0"


@dataclass(frozen=True)
class Displacements:
    """Relative knee displacements between groups, per side, with validity flags."""

    v_left: float | None
    v_right: float | None
    h_left: float | None
    h_right: float | None
    left_valid: bool
    right_valid: bool
    left_reason: str | None = None
    right_reason: str | None = None


@dataclass(frozen=True)
class IndicatorValue:
    """A possibly-undefined indicator: value None carries a reason instead."""

    value: float | None
    partial: bool = False
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class Selection:
    run_id: str
    attribute: str
    environment: str = "all"


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    mean_group0: float | None
    mean_group1: float | None
    gap: float | None


@dataclass(frozen=True)
class SegmentStats:
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class IndicatorReport:
    selection: Selection
    n_total: int
    n_group0: int
    n_group1: int
    acc: float
    dp: IndicatorValue
    md: float
    f_mean: float
    f_shift: IndicatorValue
    f_acc: IndicatorValue
    knee_status: dict[str, dict[str, bool]]
    threshold: float

    def to_dict(self) -> dict:
        """JSON-ready form with plain Python types and a stable key order."""
        return {
            "selection": {
                "run_id": self.selection.run_id,
                "attribute": self.selection.attribute,
                "environment": self.selection.environment,
            },
            "n_total": self.n_total,
            "n_group0": self.n_group0,
            "n_group1": self.n_group1,
            "acc": self.acc,
            "dp": self.dp.value,
            "dp_reason": self.dp.reason,
            "md": self.md,
            "f_mean": self.f_mean,
            "f_shift": self.f_shift.value,
            "f_shift_partial": self.f_shift.partial,
            "f_shift_reason": self.f_shift.reason,
            "f_acc": self.f_acc.value,
            "f_acc_partial": self.f_acc.partial,
            "f_acc_reason": self.f_acc.reason,
            "knee_status": self.knee_status,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class Analysis:
    """Everything the pipeline produced for one selection; report plus geometry."""

    selection: Selection
    curve: SortedCurve
    curve_group0: SortedCurve
    curve_group1: SortedCurve
    summary: MedianSummary
    knees_global: KneePair
    knees_group0: KneePair
    knees_group1: KneePair
    displacements: Displacements
    segments: SegmentStats
    report: IndicatorReport
    elapsed_seconds: float


def f_mean(summary: MedianSummary) -> float:
    """Median alignment: 1 at identical re-centered group medians, 0 at the extreme gap."""
    return 1.0 - abs(summary.m_tilde0 - summary.m_tilde1) / 2.0


def displacements(global_pair: KneePair, g0: KneePair, g1: KneePair) -> Displacements:
    """Per-side relative displacements (group1 minus group0 over the global coordinate).

    A side is valid only when all three knees are detected and the global
    normalizers are at least EPS in magnitude; invalid sides carry a reason
    and are data, not failures.
    """

    def side(kg, k0, k1):
        if not (kg.detected and k0.detected and k1.detected):
            return None, None, False, REASON_UNDETECTED
        if abs(kg.residual) < EPS or kg.percentile < EPS:
            return None, None, False, REASON_ZERO_NORMALIZER
        v = (k1.residual - k0.residual) / kg.residual
        h = (k1.percentile - k0.percentile) / kg.percentile
        return v, h, True, None

    v_l, h_l, ok_l, why_l = side(global_pair.left, g0.left, g1.left)
    v_r, h_r, ok_r, why_r = side(global_pair.right, g0.right, g1.right)
    return Displacements(v_l, v_r, h_l, h_r, ok_l, ok_r, why_l, why_r)


def _mean_abs(disp: Displacements, left: float | None, right: float | None) -> IndicatorValue:
    if disp.left_valid and disp.right_valid:
        return IndicatorValue(0.5 * abs(left) + 0.5 * abs(right))
    if disp.left_valid:
        return IndicatorValue(abs(left), partial=True, reason=f"right side invalid: {disp.right_reason}")
    if disp.right_valid:
        return IndicatorValue(abs(right), partial=True, reason=f"left side invalid: {disp.left_reason}")
    return IndicatorValue(
        None,
        reason=f"left side invalid: {disp.left_reason}; right side invalid: {disp.right_reason}",
    )


def f_shift(disp: Displacements) -> IndicatorValue:
    """Mean relative horizontal (percentile) knee displacement; partial if one side invalid."""
    return _mean_abs(disp, disp.h_left, disp.h_right)


def f_acc(disp: Displacements) -> IndicatorValue:
    """Mean relative vertical (residual) knee displacement; same contract as f_shift."""
    return _mean_abs(disp, disp.v_left, disp.v_right)


def _record_arrays(records: Sequence[PredictionRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if len(records) == 0:
        raise EmptyInput("no prediction records")
    cols = list(map(attrgetter("prob_positive", "label", "group"), records))
    prob, label, group = zip(*cols)
    # label/group kept as floats until validated, so 0.5 is rejected, not truncated
    return (
        np.asarray(prob, dtype=np.float64),
        np.asarray(label, dtype=np.float64),
        np.asarray(group, dtype=np.float64),
    )


def _validate_arrays(prob: np.ndarray, label: np.ndarray, group: np.ndarray) -> None:
    bad = (prob < 0.0) | (prob > 1.0) | ~np.isfinite(prob)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"record {i}: prob_positive {prob[i]} outside [0, 1]")
    bad = (label != 0.0) & (label != 1.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"record {i}: label {label[i]} not in {{0, 1}}")
    bad = (group != 0.0) & (group != 1.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"record {i}: group {group[i]} not in {{0, 1}}")


def accuracy(records: Sequence[PredictionRecord], threshold: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of records whose thresholded prediction equals the label."""
    prob, label, _ = _record_arrays(records)
    return accuracy_arrays(prob, label, threshold)


def accuracy_arrays(prob: np.ndarray, label: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> float:
    if prob.size == 0:
        raise EmptyInput("no prediction records")
    pred = prob >= threshold
    return float(np.count_nonzero(pred == (label == 1)) / prob.size)


def _positive_rates(
    prob: np.ndarray, group: np.ndarray, threshold: float
) -> tuple[float, float]:
    pred = prob >= threshold
    n0 = int(np.count_nonzero(group == 0))
    n1 = int(np.count_nonzero(group == 1))
    if n0 == 0:
        raise MissingGroup(0)
    if n1 == 0:
        raise MissingGroup(1)
    rate0 = float(np.count_nonzero(pred & (group == 0)) / n0)
    rate1 = float(np.count_nonzero(pred & (group == 1)) / n1)
    return rate0, rate1


def demographic_parity(
    records: Sequence[PredictionRecord], threshold: float = DEFAULT_THRESHOLD
) -> IndicatorValue:
    """Positive-rate ratio, sensitive group over non-sensitive; undefined at zero base rate."""
    prob, _, group = _record_arrays(records)
    return dp_arrays(prob, group, threshold)


def dp_arrays(prob: np.ndarray, group: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> IndicatorValue:
    rate0, rate1 = _positive_rates(prob, group, threshold)
    if rate0 == 0.0:
        return IndicatorValue(None, reason=REASON_ZERO_BASE_RATE)
    return IndicatorValue(rate1 / rate0)


def mean_difference(
    records: Sequence[PredictionRecord], threshold: float = DEFAULT_THRESHOLD
) -> float:
    """Absolute gap between group positive-prediction rates."""
    prob, _, group = _record_arrays(records)
    return md_arrays(prob, group, threshold)


def md_arrays(prob: np.ndarray, group: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> float:
    rate0, rate1 = _positive_rates(prob, group, threshold)
    return abs(rate1 - rate0)


def adaptive_segments(
    global_knees: KneePair,
    curve: SortedCurve,
    group0_curve: SortedCurve,
    group1_curve: SortedCurve,
    mid_bins: int = DEFAULT_MID_BINS,
) -> SegmentStats:
    """Per-segment group residual means and gaps, anchored at the twin knees.

    Boundaries are 0, the detected knee percentiles, mid_bins equal bins of
    the inter-knee span, and 1; an undetected knee falls back to the curve
    edge as the span anchor.  Each segment compares the groups at the same
    quantile window: a group's members are its samples whose rank within its
    own curve falls in (lo, hi].  Pooled ranks would make the gap depend on
    how the groups interleave rather than on how far apart their curves sit,
    collapsing a uniform shift to near zero in the overlap region.  A group
    with no ranks in the window has an undefined mean, and the gap is
    undefined unless both means exist.
    """
    if mid_bins < 1:
        raise ValueError("mid_bins must be >= 1")
    left, right = global_knees.left, global_knees.right
    lo_anchor = left.percentile if left.detected else 0.0
    hi_anchor = right.percentile if right.detected else 1.0
    bounds = {0.0, 1.0}
    if left.detected:
        bounds.add(left.percentile)
    if right.detected:
        bounds.add(right.percentile)
    span = hi_anchor - lo_anchor
    for k in range(1, mid_bins):
        bounds.add(lo_anchor + k * span / mid_bins)
    edges = np.array(sorted(bounds), dtype=np.float64)

    segments = []
    for j in range(edges.shape[0] - 1):
        lo, hi = float(edges[j]), float(edges[j + 1])
        means: list[float | None] = []
        for gcurve in (group0_curve, group1_curve):
            lo_idx = int(np.searchsorted(gcurve.rank_positions, lo, side="right"))
            hi_idx = int(np.searchsorted(gcurve.rank_positions, hi, side="right"))
            window = gcurve.residuals[lo_idx:hi_idx]
            means.append(float(window.mean()) if window.size else None)
        mean0, mean1 = means
        gap = abs(mean1 - mean0) if (mean0 is not None and mean1 is not None) else None
        segments.append(Segment(lo, hi, mean0, mean1, gap))
    return SegmentStats(tuple(segments))


def analyze(
    selection: Selection,
    records: Sequence[PredictionRecord],
    threshold: float = DEFAULT_THRESHOLD,
    mid_bins: int = DEFAULT_MID_BINS,
) -> Analysis:
    """Run the whole pipeline for one selection and keep every intermediate.

    Stage order: residuals, sorted curves, median summary, knee analysis,
    displacements, indicators, segmentation.  Any toolkit error raised inside
    a stage is wrapped in PipelineFailure naming that stage.
    """
    t0 = time.perf_counter()
    stage = "compute_residuals"
    try:
        prob, label, group = _record_arrays(records)
        _validate_arrays(prob, label, group)
        residual = prob - label
        label = label.astype(np.int64)
        group = group.astype(np.int64)

        stage = "build_sorted_curve"
        curve = sort_curve(residual, group)
        by_group = group_curves(curve)

        stage = "median_summary"
        summary = median_summary_arrays(curve.residuals, curve.group_tags)
        c0, c1 = by_group[0], by_group[1]

        stage = "knee_analysis"
        kg, k0, k1 = knee_analysis(curve, c0, c1)

        stage = "displacements"
        disp = displacements(kg, k0, k1)

        stage = "standard_metrics"
        acc = accuracy_arrays(prob, label, threshold)
        dp = dp_arrays(prob, group, threshold)
        md = md_arrays(prob, group, threshold)

        stage = "adaptive_segments"
        segments = adaptive_segments(kg, curve, c0, c1, mid_bins)
    except RiseError as err:
        raise PipelineFailure(stage, err) from err

    report = IndicatorReport(
        selection=selection,
        n_total=curve.n,
        n_group0=c0.n,
        n_group1=c1.n,
        acc=acc,
        dp=dp,
        md=md,
        f_mean=f_mean(summary),
        f_shift=f_shift(disp),
        f_acc=f_acc(disp),
        knee_status={
            pair.scope: {"left": pair.left.detected, "right": pair.right.detected}
            for pair in (kg, k0, k1)
        },
        threshold=threshold,
    )
    return Analysis(
        selection=selection,
        curve=curve,
        curve_group0=c0,
        curve_group1=c1,
        summary=summary,
        knees_global=kg,
        knees_group0=k0,
        knees_group1=k1,
        displacements=disp,
        segments=segments,
        report=report,
        elapsed_seconds=time.perf_counter() - t0,
    )


def full_report(
    selection: Selection,
    records: Sequence[PredictionRecord],
    threshold: float = DEFAULT_THRESHOLD,
) -> IndicatorReport:
    """All six indicators plus counts and detection flags for one selection."""
    return analyze(selection, records, threshold=threshold).report
