"""Prediction CSV parsing and the directory-backed run store."""

import json

import numpy as np
import pytest

from rise.errors import (
    DuplicateRun,
    EmptyFile,
    ParseError,
    StoreCorrupt,
    UnknownAttribute,
    UnknownEnvironment,
    UnknownRun,
    ValidationError,
)
from rise.indicators import accuracy_arrays, dp_arrays, md_arrays
from rise.store import (
    Store,
    parse_prediction_bytes,
    parse_predictions,
    precompute_metrics,
    table_records,
)

HEADER = "prob,label,gender,env"


def csv_bytes(*rows: str, header: str = HEADER) -> bytes:
    return ("\n".join((header,) + rows) + "\n").encode()


def small_run() -> bytes:
    return csv_bytes(
        "0.9,1,0,day",
        "0.2,0,1,day",
        "0.7,1,1,night",
        "0.4,0,0,night",
        "0.8,1,0,day",
        "0.1,0,1,night",
    )


def medium_run() -> bytes:
    """16 rows, both groups present in both environments; large enough to analyze."""
    return csv_bytes(
        "0.95,1,0,day",
        "0.85,1,1,day",
        "0.70,1,0,day",
        "0.60,1,1,day",
        "0.30,0,0,day",
        "0.20,0,1,day",
        "0.15,0,0,day",
        "0.05,0,1,day",
        "0.90,1,1,night",
        "0.80,1,0,night",
        "0.65,1,1,night",
        "0.55,1,0,night",
        "0.35,0,1,night",
        "0.25,0,0,night",
        "0.10,0,1,night",
        "0.08,0,0,night",
    )


class TestParsing:
    def test_round_trip_values(self):
        table = parse_prediction_bytes(small_run())
        assert table.n == 6
        assert table.attribute_names == ("gender",)
        assert table.environments == ("day", "night")
        assert table.prob.tolist() == [0.9, 0.2, 0.7, 0.4, 0.8, 0.1]
        assert table.label.tolist() == [1, 0, 1, 0, 1, 0]
        assert table.attributes["gender"].tolist() == [0, 1, 1, 0, 0, 1]
        assert table.env == ("day", "day", "night", "night", "day", "night")

    def test_multiple_attribute_columns(self):
        data = csv_bytes(
            "0.5,1,0,1,day",
            "0.5,0,1,0,day",
            header="prob,label,gender,daytime,env",
        )
        table = parse_prediction_bytes(data)
        assert table.attribute_names == ("gender", "daytime")
        assert table.attributes["daytime"].tolist() == [1, 0]

    def test_column_order_is_free(self):
        data = csv_bytes("day,1,0.9,0", header="env,label,prob,gender")
        table = parse_prediction_bytes(data)
        assert table.prob.tolist() == [0.9]
        assert table.attributes["gender"].tolist() == [0]

    def test_bom_is_stripped(self):
        table = parse_prediction_bytes(b"\xef\xbb\xbf" + small_run())
        assert table.n == 6

    def test_crlf_line_endings(self):
        data = small_run().replace(b"\n", b"\r\n")
        table = parse_prediction_bytes(data)
        assert table.n == 6

    def test_scientific_notation_prob(self):
        table = parse_prediction_bytes(csv_bytes("5e-1,1,0,day"))
        assert table.prob.tolist() == [0.5]

    @pytest.mark.parametrize("data", [b"", b"   \n  \n"])
    def test_empty_input(self, data):
        with pytest.raises(EmptyFile):
            parse_prediction_bytes(data)

    def test_header_only(self):
        with pytest.raises(EmptyFile, match="no data rows"):
            parse_prediction_bytes((HEADER + "\n").encode())

    @pytest.mark.parametrize(
        "header,column,reason",
        [
            ("prob,label,gender", "env", "missing required column"),
            ("prob,gender,env", "label", "missing required column"),
            ("prob,label,gender,gender,env", "gender", "duplicate column"),
            ("prob,label,env", None, "no attribute columns"),
            ("prob,label,,env", None, "empty column name"),
        ],
    )
    def test_header_errors(self, header, column, reason):
        with pytest.raises(ParseError) as exc:
            parse_prediction_bytes(csv_bytes("0.5,1,0,day", header=header))
        assert exc.value.line == 1
        assert exc.value.column == column
        assert reason in exc.value.reason

    @pytest.mark.parametrize(
        "row,err,field,reason",
        [
            ("0.5,1,0", ParseError, None, "expected 4 fields, got 3"),
            ("0.5,1,0,day,extra", ParseError, None, "expected 4 fields, got 5"),
            ("abc,1,0,day", ParseError, "prob", "not a decimal number"),
            ("1.5,1,0,day", ValidationError, "prob", "must be in [0, 1]"),
            ("-0.1,1,0,day", ValidationError, "prob", "must be in [0, 1]"),
            ("0.5,2,0,day", ValidationError, "label", "must be 0 or 1"),
            ("0.5,1.0,0,day", ValidationError, "label", "must be 0 or 1"),
            ("0.5,yes,0,day", ValidationError, "label", "must be 0 or 1"),
            ("0.5,1,01,day", ValidationError, "gender", "must be 0 or 1"),
            ("0.5,1,x,day", ValidationError, "gender", "must be 0 or 1"),
            ("0.5,1,0,", ValidationError, "env", "must be non-empty"),
            ("0.5,1,0,all", ValidationError, "env", "reserved"),
        ],
    )
    def test_row_errors(self, row, err, field, reason):
        # the bad row sits on physical line 3
        with pytest.raises(err) as exc:
            parse_prediction_bytes(csv_bytes("0.5,1,0,day", row))
        assert exc.value.line == 3
        got_field = exc.value.column if err is ParseError else exc.value.field
        assert got_field == field
        assert reason in exc.value.reason

    def test_blank_interior_line(self):
        data = b"prob,label,gender,env\n0.5,1,0,day\n\n0.5,0,1,day\n"
        with pytest.raises(ParseError) as exc:
            parse_prediction_bytes(data)
        assert exc.value.line == 3
        assert "blank line" in exc.value.reason

    def test_invalid_utf8_reports_line(self):
        data = b"prob,label,gender,env\n0.5,1,0,day\n0.5,1,0,\xffbad\n"
        with pytest.raises(ParseError) as exc:
            parse_prediction_bytes(data)
        assert exc.value.line == 3
        assert "UTF-8" in exc.value.reason

    def test_error_message_carries_location(self):
        with pytest.raises(ValidationError, match="line 3, field 'label'"):
            parse_prediction_bytes(csv_bytes("0.5,1,0,day", "0.5,7,0,day"))

    def test_parse_from_path(self, tmp_path):
        path = tmp_path / "preds.csv"
        path.write_bytes(small_run())
        assert parse_predictions(path).n == 6


class TestTableRecords:
    def test_environment_filter(self):
        table = parse_prediction_bytes(small_run())
        day = table_records(table, "gender", "day")
        assert [r.prob_positive for r in day] == [0.9, 0.2, 0.8]
        assert all(r.environment == "day" for r in day)
        assert len(table_records(table, "gender")) == 6

    def test_unknown_attribute(self):
        table = parse_prediction_bytes(small_run())
        with pytest.raises(UnknownAttribute):
            table_records(table, "age")


class TestPrecompute:
    def test_matches_live_metrics(self):
        table = parse_prediction_bytes(small_run())
        pre = precompute_metrics(table, threshold=0.5)
        assert set(pre) == {"day", "night"}
        env_arr = np.asarray(table.env, dtype=object)
        for env in table.environments:
            mask = env_arr == env
            prob, label = table.prob[mask], table.label[mask]
            group = table.attributes["gender"][mask]
            assert pre[env]["acc"] == accuracy_arrays(prob, label, 0.5)
            dp = dp_arrays(prob, group, 0.5)
            assert pre[env]["dp"]["gender"] == {"value": dp.value, "reason": dp.reason}
            assert pre[env]["md"]["gender"] == {
                "value": md_arrays(prob, group, 0.5),
                "reason": None,
            }

    def test_missing_group_recorded_as_undefined(self):
        # night rows are all group 0
        data = csv_bytes("0.9,1,0,day", "0.2,0,1,day", "0.8,1,0,night", "0.3,0,0,night")
        pre = precompute_metrics(parse_prediction_bytes(data))
        night = pre["night"]
        assert night["dp"]["gender"]["value"] is None
        assert "missing group 1" in night["dp"]["gender"]["reason"]
        assert night["md"]["gender"]["value"] is None
        assert pre["day"]["dp"]["gender"]["value"] is not None

    def test_zero_base_rate_dp_undefined_md_defined(self):
        data = csv_bytes("0.1,0,0,day", "0.2,0,0,day", "0.9,1,1,day", "0.8,1,1,day")
        pre = precompute_metrics(parse_prediction_bytes(data))
        day = pre["day"]
        assert day["dp"]["gender"]["value"] is None
        assert day["dp"]["gender"]["reason"]
        assert day["md"]["gender"]["value"] == pytest.approx(1.0)


def register(store: Store, run_id: str, data: bytes, **kw) -> None:
    table = parse_prediction_bytes(data)
    store.register_run(
        run_id, kw.pop("dataset", "unit"), kw.pop("algorithm", "demo"), table, data, **kw
    )


class TestStore:
    def test_empty_store_lists_nothing(self, tmp_path):
        assert Store(tmp_path).list_runs() == []

    def test_register_and_read_back(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run(), dataset="toy", algorithm="erm")
        runs = store.list_runs()
        assert [m.run_id for m in runs] == ["run-a"]
        m = runs[0]
        assert (m.dataset, m.algorithm) == ("toy", "erm")
        assert m.attribute_names == ("gender",)
        assert m.environments == ("day", "night")
        assert m.created_at.endswith("Z")

    def test_prediction_bytes_preserved_exactly(self, tmp_path):
        store = Store(tmp_path)
        data = b"\xef\xbb\xbf" + small_run().replace(b"\n", b"\r\n")
        register(store, "run-a", data)
        assert store.prediction_path("run-a").read_bytes() == data

    def test_listing_sorted_by_run_id(self, tmp_path):
        store = Store(tmp_path)
        for rid in ("zeta", "alpha", "mid.1"):
            register(store, rid, small_run())
        assert [m.run_id for m in store.list_runs()] == ["alpha", "mid.1", "zeta"]

    def test_reload_after_restart_is_identical(self, tmp_path):
        first = Store(tmp_path)
        register(first, "run-a", small_run())
        fresh = Store(tmp_path)  # same directory, no shared state
        m1, m2 = first.get_run("run-a"), fresh.get_run("run-a")
        assert m1 == m2
        t1, t2 = first.load_table("run-a"), fresh.load_table("run-a")
        assert t1.prob.tolist() == t2.prob.tolist()
        assert t1.env == t2.env
        assert m2.precomputed == precompute_metrics(t2)

    def test_precomputed_matches_live_after_json_round_trip(self, tmp_path):
        store = Store(tmp_path)
        data = csv_bytes(
            *(f"0.{i:02d},{i % 2},{(i // 2) % 2},e{i % 3}" for i in range(1, 60))
        )
        register(store, "run-a", data)
        fresh = Store(tmp_path)
        table = fresh.load_table("run-a")
        env_arr = np.asarray(table.env, dtype=object)
        for env in table.environments:
            mask = env_arr == env
            live = accuracy_arrays(table.prob[mask], table.label[mask], 0.5)
            assert fresh.precomputed_metrics("run-a", env)["acc"] == live

    def test_precomputed_for_all_is_none(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        assert store.precomputed_metrics("run-a", "all") is None

    def test_duplicate_rejected_store_unchanged(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        before = store.manifest_path.read_bytes()
        with pytest.raises(DuplicateRun, match="run-a"):
            register(store, "run-a", small_run())
        assert store.manifest_path.read_bytes() == before

    def test_unknown_lookups(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        with pytest.raises(UnknownRun):
            store.get_run("ghost")
        with pytest.raises(UnknownAttribute):
            store.load_selection("run-a", "age")
        with pytest.raises(UnknownEnvironment):
            store.load_selection("run-a", "gender", "fog")

    def test_selection_matches_table_projection(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        recs = store.load_selection("run-a", "gender", "night")
        assert [(r.prob_positive, r.label, r.group) for r in recs] == [
            (0.7, 1, 1),
            (0.4, 0, 0),
            (0.1, 0, 1),
        ]

    @pytest.mark.parametrize("bad", ["", "has space", "a/b", "../up", "-lead", ".hidden"])
    def test_run_id_must_be_directory_safe(self, tmp_path, bad):
        store = Store(tmp_path)
        with pytest.raises(ValidationError, match="run_id"):
            register(store, bad, small_run())

    def test_orphan_run_dir_is_invisible_and_retryable(self, tmp_path):
        # simulates a crash after file writes but before the manifest update
        store = Store(tmp_path)
        orphan = store.run_dir("run-a")
        orphan.mkdir(parents=True)
        (orphan / "predictions.csv").write_bytes(b"stale")
        assert store.list_runs() == []
        register(store, "run-a", small_run())
        assert store.prediction_path("run-a").read_bytes() == small_run()


class TestStoredIndicators:
    ROW = {
        "attribute": "gender",
        "environment": "all",
        "algorithm": "ERM",
        "acc": 0.9,
        "dp": 0.8,
        "md": 0.1,
        "f_mean": 0.95,
        "f_shift": 0.2,
        "f_acc": 0.3,
    }

    def test_attach_and_read_back(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        store.attach_indicators("run-a", [self.ROW])
        assert Store(tmp_path).stored_indicators("run-a") == [self.ROW]

    def test_rows_replaced_by_attribute_environment_key(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        other = dict(self.ROW, environment="day", acc=0.5)
        store.attach_indicators("run-a", [self.ROW, other])
        updated = dict(self.ROW, acc=0.99)
        store.attach_indicators("run-a", [updated])
        rows = store.stored_indicators("run-a")
        assert other in rows and updated in rows and len(rows) == 2

    def test_missing_keys_rejected(self, tmp_path):
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        with pytest.raises(ValidationError, match="f_shift"):
            store.attach_indicators("run-a", [{"attribute": "gender", "environment": "all"}])

    def test_attach_to_unknown_run(self, tmp_path):
        with pytest.raises(UnknownRun):
            Store(tmp_path).attach_indicators("ghost", [self.ROW])

    def test_none_values_allowed(self, tmp_path):
        # undefined indicators are stored as nulls, not dropped
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        row = dict(self.ROW, dp=None, f_shift=None)
        store.attach_indicators("run-a", [row])
        assert store.stored_indicators("run-a")[0]["dp"] is None


class TestCorruption:
    def _seeded(self, tmp_path) -> Store:
        store = Store(tmp_path)
        register(store, "run-a", small_run())
        return store

    def test_manifest_not_json(self, tmp_path):
        store = self._seeded(tmp_path)
        store.manifest_path.write_text("{not json")
        with pytest.raises(StoreCorrupt, match="manifest"):
            Store(tmp_path).list_runs()

    def test_manifest_wrong_version(self, tmp_path):
        store = self._seeded(tmp_path)
        store.manifest_path.write_text(json.dumps({"format_version": 99, "runs": []}))
        with pytest.raises(StoreCorrupt, match="format_version"):
            Store(tmp_path).list_runs()

    def test_manifest_entry_missing_fields(self, tmp_path):
        store = self._seeded(tmp_path)
        payload = json.loads(store.manifest_path.read_text())
        del payload["runs"][0]["algorithm"]
        store.manifest_path.write_text(json.dumps(payload))
        with pytest.raises(StoreCorrupt, match="malformed manifest entry"):
            Store(tmp_path).list_runs()

    def test_manifest_runs_not_a_list(self, tmp_path):
        store = self._seeded(tmp_path)
        store.manifest_path.write_text(json.dumps({"format_version": 1, "runs": {}}))
        with pytest.raises(StoreCorrupt, match="run list"):
            Store(tmp_path).list_runs()

    def test_metrics_sidecar_corrupt(self, tmp_path):
        store = self._seeded(tmp_path)
        store.metrics_path("run-a").write_text("[]")
        with pytest.raises(StoreCorrupt, match="metrics sidecar"):
            Store(tmp_path).get_run("run-a")
