"""Signed residuals, sorted curves, subgroup splits, and (re-centered) medians.

The signed residual of a binary prediction is the predicted positive-class
probability minus the 0/1 label, so it lives in [-1, 1]: positive values are
overestimation, negative values underestimation.  Sorting all residuals of a
selection ascending and plotting them against normalized rank gives the curve
every downstream analysis (knee detection, indicators, plotting) operates on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, EmptyInput, MissingGroup, NotSorted


@dataclass(frozen=True)
class PredictionRecord:
    """One sample: predicted positive probability, binary label, group, environment tag."""

    prob_positive: float
    label: int
    group: int
    environment: str = ""


@dataclass(frozen=True)
class ResidualSample:
    """One signed residual with its group and environment carried through."""

    residual: float
    group: int
    environment: str = ""


@dataclass(frozen=True)
class SortedCurve:
    """Ascending residuals with normalized rank positions and parallel group tags.

    rank_positions[i] = (i+1)/n, so the last rank is exactly 1.0.  Ties are
    broken by (residual, group, original input index), which makes the curve
    a deterministic function of the input multiset.
    """

    residuals: np.ndarray
    rank_positions: np.ndarray
    group_tags: np.ndarray

    @property
    def n(self) -> int:
        return int(self.residuals.shape[0])


@dataclass(frozen=True)
class MedianSummary:
    """Global and per-group medians, plus the group medians re-centered by the global one."""

    m_global: float
    m_group0: float
    m_group1: float
    m_tilde0: float
    m_tilde1: float


def compute_residuals(records: Sequence[PredictionRecord]) -> list[ResidualSample]:
    """Turn prediction records into signed residuals (probability minus label).

    Raises EmptyInput on an empty list and DomainError if any record violates
    its invariants (probability outside [0,1], non-binary label or group).
    """
    if len(records) == 0:
        raise EmptyInput("no prediction records")
    out = []
    for i, r in enumerate(records):
        p = float(r.prob_positive)
        if not (0.0 <= p <= 1.0):
            raise DomainError(f"record {i}: prob_positive {p} outside [0, 1]")
        if r.label not in (0, 1):
            raise DomainError(f"record {i}: label {r.label} not in {{0, 1}}")
        if r.group not in (0, 1):
            raise DomainError(f"record {i}: group {r.group} not in {{0, 1}}")
        out.append(ResidualSample(p - r.label, r.group, r.environment))
    return out


def sort_curve(residuals: np.ndarray, groups: np.ndarray) -> SortedCurve:
    """Array kernel behind build_sorted_curve; inputs are parallel 1-d arrays."""
    n = residuals.shape[0]
    if n == 0:
        raise EmptyInput("no residuals")
    # lexsort: last key is primary -> (residual asc, group asc, input index asc)
    order = np.lexsort((np.arange(n), groups, residuals))
    ranks = np.arange(1, n + 1, dtype=np.float64) / n
    return SortedCurve(residuals[order], ranks, groups[order])


def build_sorted_curve(samples: Sequence[ResidualSample]) -> SortedCurve:
    """Sort residual samples ascending into a curve with normalized ranks."""
    if len(samples) == 0:
        raise EmptyInput("no residual samples")
    res = np.array([s.residual for s in samples], dtype=np.float64)
    grp = np.array([s.group for s in samples], dtype=np.int64)
    return sort_curve(res, grp)


def split_by_group(samples: Sequence[ResidualSample]) -> dict[int, list[ResidualSample]]:
    """Partition samples by group id; groups with no samples are absent from the map."""
    if len(samples) == 0:
        raise EmptyInput("no residual samples")
    buckets: dict[int, list[ResidualSample]] = {}
    for s in samples:
        buckets.setdefault(s.group, []).append(s)
    return buckets


def median_of_sorted(values: np.ndarray) -> float:
    """Median of an already-sorted array; even length averages the two middle elements."""
    n = values.shape[0]
    if n == 0:
        raise EmptyInput("no values")
    mid = n // 2
    if n % 2 == 1:
        return float(values[mid])
    return float((values[mid - 1] + values[mid]) / 2.0)


def median(values: Iterable[float]) -> float:
    """Median of a sorted sequence.

    The input must already be ascending; in debug mode a violation raises
    NotSorted.  Even-length input returns the mean of the two middle elements.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.float64)
    if arr.shape[0] == 0:
        raise EmptyInput("no values")
    if __debug__ and np.any(np.diff(arr) < 0):
        raise NotSorted("median() requires ascending input")
    return median_of_sorted(arr)


def median_summary_arrays(residuals: np.ndarray, groups: np.ndarray) -> MedianSummary:
    """Array kernel behind median_summary; residuals need not be pre-sorted."""
    if residuals.shape[0] == 0:
        raise EmptyInput("no residual samples")
    for g in (0, 1):
        if not np.any(groups == g):
            raise MissingGroup(g)
    m_g = median_of_sorted(np.sort(residuals, kind="stable"))
    m_0 = median_of_sorted(np.sort(residuals[groups == 0], kind="stable"))
    m_1 = median_of_sorted(np.sort(residuals[groups == 1], kind="stable"))
    return MedianSummary(m_g, m_0, m_1, m_0 - m_g, m_1 - m_g)


def median_summary(samples: Sequence[ResidualSample]) -> MedianSummary:
    """Global and per-group medians with re-centering (group minus global).

    Raises MissingGroup if either group has no samples, which signals that
    group-level indicators are undefined for this selection.
    """
    if len(samples) == 0:
        raise EmptyInput("no residual samples")
    res = np.array([s.residual for s in samples], dtype=np.float64)
    grp = np.array([s.group for s in samples], dtype=np.int64)
    return median_summary_arrays(res, grp)


def group_curves(curve: SortedCurve) -> dict[int, SortedCurve]:
    """Per-group curves extracted from a sorted global curve.

    Masking a globally sorted curve preserves the (residual, index) order
    within each group, so the result is identical to sorting each group
    separately; ranks are renormalized to the group's own size.
    """
    out: dict[int, SortedCurve] = {}
    for g in (0, 1):
        mask = curve.group_tags == g
        k = int(np.count_nonzero(mask))
        if k == 0:
            continue
        ranks = np.arange(1, k + 1, dtype=np.float64) / k
        out[g] = SortedCurve(curve.residuals[mask], ranks, curve.group_tags[mask])
    return out
