"""HTTP service exposing the run store and the residual-analysis pipeline.

Versioned JSON API under ``/api/v1``:

* ``GET  /runs``     registered runs (stable order by run id)
* ``GET  /curve``    full analysis for one selection: curve points, median
  rulers, knee markers, segment stats, and the indicator report
* ``GET  /report``   the indicator report alone, for tabular comparison
* ``POST /runs``     multipart upload (manifest fields + prediction CSV)

Curve points are down-sampled beyond a fixed threshold to keep payloads
small; medians, knees and indicators always come from the full data, so a
down-sampled curve carries exactly the same report as ``/report``.  For a
concrete environment filter the stored precomputed metrics are attached
next to the live report.  Undefined indicators travel as explicit nulls
with reason strings.

Analytics are pure and the store is read lock-free, so concurrent GETs
share nothing but the on-disk snapshot; uploads serialize through the
store's writer lock.  A built web client, when present, is served at ``/``.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import (
    DuplicateRun,
    EmptyFile,
    EmptyInput,
    MissingGroup,
    ParseError,
    PipelineFailure,
    RiseError,
    StoreCorrupt,
    TooFewPoints,
    UnknownAttribute,
    UnknownEnvironment,
    UnknownRun,
    ValidationError,
)
from .indicators import Analysis, Selection, analyze
from .knees import KneePair
from .store import ENV_ALL, Store, parse_prediction_bytes

#: Curve payloads longer than this are thinned to a uniform rank stride.
DOWNSAMPLE_THRESHOLD = 5000

_STATUS_BY_TYPE = (
    (UnknownRun, 404, "unknown_run"),
    (UnknownAttribute, 404, "unknown_attribute"),
    (UnknownEnvironment, 404, "unknown_environment"),
    (DuplicateRun, 409, "duplicate_run"),
    (ParseError, 400, "parse_error"),
    (ValidationError, 400, "validation_error"),
    (EmptyFile, 400, "empty_file"),
    (MissingGroup, 422, "missing_group"),
    (EmptyInput, 422, "empty_selection"),
    (TooFewPoints, 422, "too_few_points"),
    (StoreCorrupt, 500, "store_corrupt"),
)


def _error_body(code: str, err: Exception, **extra) -> dict:
    return {"error": {"code": code, "message": str(err), **extra}}


def _error_response(err: RiseError) -> JSONResponse:
    extra = {}
    if isinstance(err, PipelineFailure):
        extra["stage"] = err.stage
        err = err.error
    for err_type, status, code in _STATUS_BY_TYPE:
        if isinstance(err, err_type):
            if isinstance(err, ParseError):
                extra.update(line=err.line, column=err.column)
            elif isinstance(err, ValidationError):
                extra.update(line=err.line, field=err.field)
            elif isinstance(err, MissingGroup):
                extra.update(reason=str(err), group=err.group)
            return JSONResponse(status_code=status, content=_error_body(code, err, **extra))
    return JSONResponse(status_code=500, content=_error_body("internal_error", err, **extra))


def downsample_indices(n: int, threshold: int = DOWNSAMPLE_THRESHOLD) -> list[int]:
    """Uniform-stride index subset, always keeping the first and last point."""
    if n <= threshold:
        return list(range(n))
    stride = math.ceil(n / threshold)
    indices = list(range(0, n, stride))
    if indices[-1] != n - 1:
        indices.append(n - 1)
    return indices


def _knee_dict(pair: KneePair) -> dict:
    out = {}
    for side in ("left", "right"):
        point = getattr(pair, side)
        out[side] = {
            "kind": point.kind,
            "detected": point.detected,
            "rank": point.percentile,
            "residual": point.residual,
            "sensitivity_used": point.sensitivity_used,
        }
    return out


def curve_payload(analysis: Analysis, precomputed: dict | None) -> dict:
    curve = analysis.curve
    idx = downsample_indices(curve.n)
    summary = analysis.summary
    return {
        "selection": {
            "run_id": analysis.selection.run_id,
            "attribute": analysis.selection.attribute,
            "environment": analysis.selection.environment,
        },
        "n_total": curve.n,
        "n_rendered": len(idx),
        "points": {
            "rank": curve.rank_positions[idx].tolist(),
            "residual": curve.residuals[idx].tolist(),
            "group": curve.group_tags[idx].tolist(),
        },
        "medians": {
            "m_global": summary.m_global,
            "m_group0": summary.m_group0,
            "m_group1": summary.m_group1,
            "m_tilde0": summary.m_tilde0,
            "m_tilde1": summary.m_tilde1,
        },
        "knees": {
            "global": _knee_dict(analysis.knees_global),
            "group0": _knee_dict(analysis.knees_group0),
            "group1": _knee_dict(analysis.knees_group1),
        },
        "segments": [
            {
                "lo": s.lo,
                "hi": s.hi,
                "mean_group0": s.mean_group0,
                "mean_group1": s.mean_group1,
                "gap": s.gap,
            }
            for s in analysis.segments.segments
        ],
        "report": analysis.report.to_dict(),
        "precomputed": precomputed,
    }


def default_ui_dir() -> Path | None:
    """Built web client location: $RISE_UI_DIR, else ./frontend/dist if present."""
    env = os.environ.get("RISE_UI_DIR")
    candidates = [Path(env)] if env else [Path.cwd() / "frontend" / "dist"]
    for candidate in candidates:
        if (candidate / "index.html").is_file():
            return candidate
    return None


def create_app(store_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = Store(store_dir)
    app = FastAPI(title="rise", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RiseError)
    async def _handle_rise_error(request: Request, exc: RiseError):
        return _error_response(exc)

    def _analyze(run: str, attribute: str, env: str) -> tuple[Analysis, dict | None]:
        records = store.load_selection(run, attribute, env)
        analysis = analyze(Selection(run, attribute, env), records)
        return analysis, store.precomputed_metrics(run, env)

    @app.get("/api/v1/runs")
    def list_runs() -> list[dict]:
        return [manifest.summary() for manifest in store.list_runs()]

    @app.get("/api/v1/curve")
    def get_curve(run: str, attribute: str, env: str = ENV_ALL) -> dict:
        analysis, precomputed = _analyze(run, attribute, env)
        return curve_payload(analysis, precomputed)

    @app.get("/api/v1/report")
    def get_report(run: str, attribute: str, env: str = ENV_ALL) -> dict:
        analysis, precomputed = _analyze(run, attribute, env)
        return {**analysis.report.to_dict(), "precomputed": precomputed}

    @app.post("/api/v1/runs", status_code=201)
    async def upload_run(
        run_id: str = Form(...),
        dataset: str = Form(...),
        algorithm: str = Form(...),
        file: UploadFile = File(...),
    ) -> dict:
        data = await file.read()
        table = parse_prediction_bytes(data)
        store.register_run(run_id, dataset, algorithm, table, data)
        return {"run_id": run_id}

    static_dir = Path(ui_dir) if ui_dir else default_ui_dir()
    if static_dir is not None and static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index() -> dict:
            return {"service": "rise", "api": "/api/v1", "ui": "not built"}

    return app
