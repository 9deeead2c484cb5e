"""Residual-based fairness analysis for binary classifiers.

The toolkit turns per-example predictions into a sorted signed-residual
curve, finds its twin knees (one convex on the left, one concave on the
right), and derives three group-fairness indicators from median alignment
and knee displacement.  These sit next to the standard threshold metrics
(accuracy, demographic parity, mean difference) in one report that is
available as a library call, a CLI table, an SVG figure, and an HTTP API.
"""

from .errors import (
    DomainError,
    DuplicateRun,
    EmptyFile,
    EmptyInput,
    MissingGroup,
    NotDetected,
    NotSorted,
    ParseError,
    PipelineFailure,
    RiseError,
    TooFewPoints,
    UnknownAttribute,
    UnknownEnvironment,
    UnknownRun,
    ValidationError,
)
from .indicators import (
    Analysis,
    IndicatorReport,
    IndicatorValue,
    Selection,
    accuracy,
    analyze,
    demographic_parity,
    f_acc,
    f_mean,
    f_shift,
    full_report,
    mean_difference,
)
from .knees import KneePair, KneePoint, detect_twin_knees, kneedle
from .residuals import (
    MedianSummary,
    PredictionRecord,
    SortedCurve,
    build_sorted_curve,
    compute_residuals,
    median,
    median_summary,
    sort_curve,
)
from .store import PredictionTable, RunManifest, Store, parse_predictions

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "DomainError",
    "DuplicateRun",
    "EmptyFile",
    "EmptyInput",
    "IndicatorReport",
    "IndicatorValue",
    "KneePair",
    "KneePoint",
    "MedianSummary",
    "MissingGroup",
    "NotDetected",
    "NotSorted",
    "ParseError",
    "PipelineFailure",
    "PredictionRecord",
    "PredictionTable",
    "RiseError",
    "RunManifest",
    "Selection",
    "SortedCurve",
    "Store",
    "TooFewPoints",
    "UnknownAttribute",
    "UnknownEnvironment",
    "UnknownRun",
    "ValidationError",
    "accuracy",
    "analyze",
    "build_sorted_curve",
    "compute_residuals",
    "demographic_parity",
    "detect_twin_knees",
    "f_acc",
    "f_mean",
    "f_shift",
    "full_report",
    "kneedle",
    "mean_difference",
    "median",
    "median_summary",
    "parse_predictions",
    "sort_curve",
]
