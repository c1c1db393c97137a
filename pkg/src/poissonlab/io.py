"""On-disk formats: histogram CSV and versioned JSON reports.

CSV histograms have exactly the header ``count,frequency`` and one row per
observed count, ascending. JSON reports share an envelope::

    {"schema_version": 1, "kind": "<subcommand>", "generated_at": "<ISO-8601>",
     "params": {...}, "result": {...}, "passed": true | false | null}

``generated_at`` is the only field that varies between identical runs.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from pathlib import Path

import jsonschema

from .stat_tests import CountHistogram

SCHEMA_VERSION = 1
HISTOGRAM_CSV_HEADER = ("count", "frequency")
HISTOGRAM_CSV_SCHEMA = "count,frequency/v1"
TIMESTAMP_KEY = "generated_at"

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", TIMESTAMP_KEY, "params", "result", "passed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"type": "string"},
        TIMESTAMP_KEY: {"type": "string"},
        "params": {"type": "object"},
        "result": {},
        "passed": {"type": ["boolean", "null"]},
    },
    "additionalProperties": False,
}

GOF_SCHEMA = {
    "type": "object",
    "required": ["statistic", "dof", "p_value", "bins_used"],
    "properties": {
        "statistic": {"type": "number", "minimum": 0},
        "dof": {"type": "integer", "minimum": 1},
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "bins_used": {"type": "integer", "minimum": 2},
    },
}

LIMIT_RESULT_SCHEMA = {
    "type": "object",
    "required": ["sweep"],
    "properties": {
        "sweep": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "tv"],
                "properties": {"n": {"type": "integer"}, "tv": {"type": "number", "minimum": 0, "maximum": 1}},
            },
        }
    },
}

SIMPLEX_ROW_SCHEMA = {
    "type": "object",
    "required": ["dimension", "extent", "exact", "recursive", "mc", "mc_std_error", "mc_samples"],
}


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        return _clean(obj.item())
    return obj


def make_report(kind: str, params: dict, result, passed: bool | None = None, timestamp: str | None = None) -> dict:
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    report = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        TIMESTAMP_KEY: timestamp,
        "params": _clean(params),
        "result": _clean(result),
        "passed": passed,
    }
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report))


def read_report(path) -> dict:
    report = json.loads(Path(path).read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


def write_histogram_csv(hist: CountHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTOGRAM_CSV_HEADER)
        for k, v in hist.frequencies.items():
            w.writerow((k, v))


def read_histogram_csv(path) -> CountHistogram:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != HISTOGRAM_CSV_HEADER:
            raise ValueError(f"expected header {','.join(HISTOGRAM_CSV_HEADER)}, got {','.join(header)}")
        freq = {}
        for row in reader:
            if not row:
                continue
            k, v = int(row[0]), int(row[1])
            if k in freq:
                raise ValueError(f"count {k} listed twice")
            freq[k] = v
    return CountHistogram(freq)


def write_rows_csv(rows: list[dict], path) -> None:
    """Generic table CSV: header from the first row's keys."""
    if not rows:
        raise ValueError("nothing to write")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
