"""On-disk registry of prediction runs with precomputed standard metrics.

A store is a directory: ``manifest.json`` lists every registered run, and
``runs/<run_id>/`` holds the original prediction CSV next to a
``metrics.json`` sidecar carrying accuracy, demographic parity and mean
difference precomputed per environment.  Registration is serialized through
a file lock and committed by rewriting the manifest last, so readers either
see a run completely or not at all.  Reads take no lock.

Prediction CSV format: UTF-8, comma separated, header row required.
Columns ``prob`` (decimal in [0, 1]), ``label`` (0/1), one column per
protected attribute (0/1), ``env`` (non-empty tag).  LF or CRLF line
endings both parse.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from filelock import FileLock

from .errors import (
    DuplicateRun,
    EmptyFile,
    MissingGroup,
    ParseError,
    StoreCorrupt,
    UnknownAttribute,
    UnknownEnvironment,
    UnknownRun,
    ValidationError,
)
from .indicators import DEFAULT_THRESHOLD, accuracy_arrays, dp_arrays, md_arrays
from .residuals import PredictionRecord

FORMAT_VERSION = 1

#: Column names with fixed meaning; every other header column is an attribute.
RESERVED_COLUMNS = ("prob", "label", "env")

#: Environment filter meaning "no filter"; rejected as a stored tag.
ENV_ALL = "all"

_RUN_ID_PATTERN = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")

_BINARY_TOKENS = {"0": 0, "1": 1}


@dataclass(frozen=True)
class PredictionTable:
    """Column-oriented parse of one prediction CSV."""

    attribute_names: tuple[str, ...]
    environments: tuple[str, ...]
    prob: np.ndarray
    label: np.ndarray
    attributes: dict[str, np.ndarray]
    env: tuple[str, ...]

    @property
    def n(self) -> int:
        return int(self.prob.size)


@dataclass(frozen=True)
class RunManifest:
    """One registered run: identity, schema, file location, stored metrics."""

    run_id: str
    dataset: str
    algorithm: str
    attribute_names: tuple[str, ...]
    environments: tuple[str, ...]
    prediction_file: str
    created_at: str
    precomputed: dict | None = None

    def summary(self) -> dict:
        return {
            "run_id": self.run_id,
            "dataset": self.dataset,
            "algorithm": self.algorithm,
            "attribute_names": list(self.attribute_names),
            "environments": list(self.environments),
            "created_at": self.created_at,
        }


def parse_predictions(path: str | Path) -> PredictionTable:
    """Parse and validate the prediction CSV at ``path``."""
    return parse_prediction_bytes(Path(path).read_bytes())


def parse_prediction_bytes(data: bytes) -> PredictionTable:
    if not data.strip():
        raise EmptyFile("prediction file is empty")
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as err:
        line = data[: err.start].count(b"\n") + 1
        raise ParseError(line, None, "not valid UTF-8") from err
    return parse_prediction_text(text)


def parse_prediction_text(text: str) -> PredictionTable:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile("prediction file is empty") from None

    header = [name.strip() for name in header]
    seen: set[str] = set()
    for name in header:
        if not name:
            raise ParseError(1, None, "empty column name in header")
        if name in seen:
            raise ParseError(1, name, "duplicate column")
        seen.add(name)
    for required in RESERVED_COLUMNS:
        if required not in seen:
            raise ParseError(1, required, "missing required column")
    attribute_names = tuple(n for n in header if n not in RESERVED_COLUMNS)
    if not attribute_names:
        raise ParseError(1, None, "no attribute columns (need at least one besides prob/label/env)")

    idx = {name: i for i, name in enumerate(header)}
    prob_i, label_i, env_i = idx["prob"], idx["label"], idx["env"]
    attr_is = [idx[a] for a in attribute_names]
    width = len(header)

    probs: list[float] = []
    labels: list[int] = []
    attr_cols: list[list[int]] = [[] for _ in attribute_names]
    envs: list[str] = []

    for row in reader:
        line = reader.line_num
        if not row:
            raise ParseError(line, None, "blank line")
        if len(row) != width:
            raise ParseError(line, None, f"expected {width} fields, got {len(row)}")

        token = row[prob_i]
        try:
            prob = float(token)
        except ValueError:
            raise ParseError(line, "prob", f"not a decimal number: {token!r}") from None
        if not (0.0 <= prob <= 1.0):
            raise ValidationError(line, "prob", f"must be in [0, 1], got {token}")

        label = _BINARY_TOKENS.get(row[label_i])
        if label is None:
            raise ValidationError(line, "label", f"must be 0 or 1, got {row[label_i]!r}")

        env = row[env_i]
        if not env.strip():
            raise ValidationError(line, "env", "must be non-empty")
        if env == ENV_ALL:
            raise ValidationError(line, "env", f"{ENV_ALL!r} is reserved for the unfiltered view")

        for col, i in zip(attr_cols, attr_is):
            value = _BINARY_TOKENS.get(row[i])
            if value is None:
                raise ValidationError(line, header[i], f"must be 0 or 1, got {row[i]!r}")
            col.append(value)
        probs.append(prob)
        labels.append(label)
        envs.append(env)

    if not probs:
        raise EmptyFile("prediction file has a header but no data rows")

    return PredictionTable(
        attribute_names=attribute_names,
        environments=tuple(dict.fromkeys(envs)),
        prob=np.asarray(probs, dtype=np.float64),
        label=np.asarray(labels, dtype=np.int64),
        attributes={
            name: np.asarray(col, dtype=np.int64)
            for name, col in zip(attribute_names, attr_cols)
        },
        env=tuple(envs),
    )


def table_records(
    table: PredictionTable, attribute: str, environment: str = ENV_ALL
) -> list[PredictionRecord]:
    """Project the table to records for one attribute, optionally one environment."""
    if attribute not in table.attributes:
        raise UnknownAttribute(attribute)
    group = table.attributes[attribute]
    rows = zip(table.prob.tolist(), table.label.tolist(), group.tolist(), table.env)
    if environment == ENV_ALL:
        return [PredictionRecord(p, y, g, e) for p, y, g, e in rows]
    return [PredictionRecord(p, y, g, e) for p, y, g, e in rows if e == environment]


def _metric_entry(value: float | None, reason: str | None) -> dict:
    return {"value": value, "reason": reason}


def precompute_metrics(table: PredictionTable, threshold: float = DEFAULT_THRESHOLD) -> dict:
    """Acc plus per-attribute DP/MD for each environment tag in the table.

    Undefined values (a group absent in that environment, or a zero group-0
    positive rate) are stored as null with a reason string, never dropped.
    """
    env_array = np.asarray(table.env, dtype=object)
    out: dict[str, dict] = {}
    for env in table.environments:
        mask = env_array == env
        prob = table.prob[mask]
        label = table.label[mask]
        entry: dict = {"acc": accuracy_arrays(prob, label, threshold), "dp": {}, "md": {}}
        for name in table.attribute_names:
            group = table.attributes[name][mask]
            try:
                dp = dp_arrays(prob, group, threshold)
                entry["dp"][name] = _metric_entry(dp.value, dp.reason)
            except MissingGroup as err:
                entry["dp"][name] = _metric_entry(None, str(err))
            try:
                entry["md"][name] = _metric_entry(md_arrays(prob, group, threshold), None)
            except MissingGroup as err:
                entry["md"][name] = _metric_entry(None, str(err))
        out[env] = entry
    return out


def _write_json(path: Path, payload: dict) -> None:
    # Tmp-file-and-rename keeps concurrent readers off half-written JSON.
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _read_json(path: Path, what: str) -> dict:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise StoreCorrupt(f"unreadable {what} at {path}: {err}") from err
    if not isinstance(payload, dict):
        raise StoreCorrupt(f"{what} at {path} is not a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise StoreCorrupt(f"{what} at {path} has unsupported format_version {version!r}")
    return payload


class Store:
    """Directory-backed run registry.  Single writer, lock-free readers."""

    MANIFEST_NAME = "manifest.json"
    METRICS_NAME = "metrics.json"
    PREDICTIONS_NAME = "predictions.csv"
    LOCK_NAME = ".lock"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = FileLock(str(self.root / self.LOCK_NAME))
        # Prediction files are immutable once registered, so this never invalidates.
        self._table_cache: dict[str, PredictionTable] = {}

    # -- paths ---------------------------------------------------------------

    @property
    def manifest_path(self) -> Path:
        return self.root / self.MANIFEST_NAME

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def prediction_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / self.PREDICTIONS_NAME

    def metrics_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / self.METRICS_NAME

    # -- reading -------------------------------------------------------------

    def _manifest_payload(self) -> dict:
        if not self.manifest_path.exists():
            return {"format_version": FORMAT_VERSION, "runs": []}
        payload = _read_json(self.manifest_path, "manifest")
        if not isinstance(payload.get("runs"), list):
            raise StoreCorrupt(f"manifest at {self.manifest_path} has no run list")
        return payload

    def _entry_to_manifest(self, entry: dict) -> RunManifest:
        try:
            return RunManifest(
                run_id=entry["run_id"],
                dataset=entry["dataset"],
                algorithm=entry["algorithm"],
                attribute_names=tuple(entry["attribute_names"]),
                environments=tuple(entry["environments"]),
                prediction_file=entry["prediction_file"],
                created_at=entry["created_at"],
            )
        except (KeyError, TypeError) as err:
            raise StoreCorrupt(f"malformed manifest entry: {err}") from err

    def list_runs(self) -> list[RunManifest]:
        entries = [self._entry_to_manifest(e) for e in self._manifest_payload()["runs"]]
        return sorted(entries, key=lambda m: m.run_id)

    def get_run(self, run_id: str) -> RunManifest:
        for entry in self._manifest_payload()["runs"]:
            if entry.get("run_id") == run_id:
                manifest = self._entry_to_manifest(entry)
                sidecar = _read_json(self.metrics_path(run_id), "metrics sidecar")
                return replace(manifest, precomputed=sidecar.get("precomputed"))
        raise UnknownRun(run_id)

    def load_table(self, run_id: str) -> PredictionTable:
        if run_id not in self._table_cache:
            manifest = self.get_run(run_id)
            self._table_cache[run_id] = parse_predictions(self.root / manifest.prediction_file)
        return self._table_cache[run_id]

    def load_selection(
        self, run_id: str, attribute: str, environment_filter: str = ENV_ALL
    ) -> list[PredictionRecord]:
        """Rows of one run filtered by environment, projected to records."""
        manifest = self.get_run(run_id)
        if attribute not in manifest.attribute_names:
            raise UnknownAttribute(attribute)
        if environment_filter != ENV_ALL and environment_filter not in manifest.environments:
            raise UnknownEnvironment(environment_filter)
        return table_records(self.load_table(run_id), attribute, environment_filter)

    def precomputed_metrics(self, run_id: str, environment: str) -> dict | None:
        """The stored acc/dp/md block for one environment, or None for 'all'."""
        if environment == ENV_ALL:
            return None
        manifest = self.get_run(run_id)
        return (manifest.precomputed or {}).get(environment)

    def stored_indicators(self, run_id: str) -> list[dict]:
        self.get_run(run_id)
        sidecar = _read_json(self.metrics_path(run_id), "metrics sidecar")
        rows = sidecar.get("stored_indicators", [])
        if not isinstance(rows, list):
            raise StoreCorrupt(f"stored_indicators in {self.metrics_path(run_id)} is not a list")
        return rows

    # -- writing -------------------------------------------------------------

    def register_run(
        self,
        run_id: str,
        dataset: str,
        algorithm: str,
        table: PredictionTable,
        source_bytes: bytes,
        threshold: float = DEFAULT_THRESHOLD,
    ) -> str:
        """Persist a validated run and its precomputed metrics; returns run_id.

        The manifest is rewritten last, so a crash mid-registration leaves an
        orphan run directory but never a manifest entry pointing at missing
        files.  Orphan directories are overwritten on retry.
        """
        if not _RUN_ID_PATTERN.fullmatch(run_id):
            raise ValidationError(
                0, "run_id", "must match [A-Za-z0-9][A-Za-z0-9._-]* (it names a directory)"
            )
        with self._lock:
            payload = self._manifest_payload()
            if any(e.get("run_id") == run_id for e in payload["runs"]):
                raise DuplicateRun(run_id)

            run_dir = self.run_dir(run_id)
            run_dir.mkdir(parents=True, exist_ok=True)
            tmp = self.prediction_path(run_id).with_suffix(".csv.tmp")
            tmp.write_bytes(source_bytes)
            os.replace(tmp, self.prediction_path(run_id))

            _write_json(
                self.metrics_path(run_id),
                {
                    "format_version": FORMAT_VERSION,
                    "threshold": threshold,
                    "precomputed": precompute_metrics(table, threshold),
                },
            )

            payload["runs"].append(
                {
                    "run_id": run_id,
                    "dataset": dataset,
                    "algorithm": algorithm,
                    "attribute_names": list(table.attribute_names),
                    "environments": list(table.environments),
                    "prediction_file": str(Path("runs") / run_id / self.PREDICTIONS_NAME),
                    "created_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
                }
            )
            self.root.mkdir(parents=True, exist_ok=True)
            _write_json(self.manifest_path, payload)
        self._table_cache[run_id] = table
        return run_id

    def attach_indicators(self, run_id: str, rows: list[dict]) -> None:
        """Add or replace stored indicator rows (keyed by attribute + environment).

        These are externally supplied six-value rows (acc, dp, md, f_mean,
        f_shift, f_acc) for reports whose inputs are not reproducible from the
        prediction file alone; `report --stored` renders them verbatim.
        """
        required = {"attribute", "environment", "acc", "dp", "md", "f_mean", "f_shift", "f_acc"}
        for row in rows:
            missing = required - row.keys()
            if missing:
                raise ValidationError(
                    0, "stored_indicators", f"row missing keys: {sorted(missing)}"
                )
        with self._lock:
            self.get_run(run_id)
            sidecar = _read_json(self.metrics_path(run_id), "metrics sidecar")
            existing = sidecar.get("stored_indicators", [])
            key = lambda r: (r["attribute"], r["environment"])
            fresh = {key(r) for r in rows}
            sidecar["stored_indicators"] = [
                r for r in existing if key(r) not in fresh
            ] + list(rows)
            _write_json(self.metrics_path(run_id), sidecar)
