import json
import math

import jsonschema
import pytest

from poissonlab.io import (
    SCHEMA_VERSION,
    TIMESTAMP_KEY,
    dumps_report,
    make_report,
    read_histogram_csv,
    read_report,
    write_histogram_csv,
    write_report,
    write_rows_csv,
)
from poissonlab.stat_tests import CountHistogram


def test_histogram_round_trip(tmp_path):
    h = CountHistogram({0: 4, 3: 1, 7: 12})
    write_histogram_csv(h, tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text() == "count,frequency\n0,4\n3,1\n7,12\n"
    assert read_histogram_csv(tmp_path / "h.csv") == h


def test_histogram_bad_header(tmp_path):
    (tmp_path / "h.csv").write_text("k,n\n0,1\n")
    with pytest.raises(ValueError):
        read_histogram_csv(tmp_path / "h.csv")


def test_histogram_duplicate_row(tmp_path):
    (tmp_path / "h.csv").write_text("count,frequency\n1,2\n1,3\n")
    with pytest.raises(ValueError):
        read_histogram_csv(tmp_path / "h.csv")


def test_report_envelope(tmp_path):
    rep = make_report("limit", {"mu": 1.0}, {"sweep": [{"n": 10, "tv": 0.1}]}, None, timestamp="2020-01-01T00:00:00+00:00")
    assert rep["schema_version"] == SCHEMA_VERSION
    assert rep[TIMESTAMP_KEY] == "2020-01-01T00:00:00+00:00"
    write_report(rep, tmp_path / "r.json")
    assert read_report(tmp_path / "r.json") == rep


def test_report_cleans_non_finite():
    rep = make_report("x", {"a": (1, 2)}, {"z": math.nan, "w": math.inf}, True)
    text = dumps_report(rep)
    assert json.loads(text)["result"] == {"z": None, "w": None}
    assert json.loads(text)["params"]["a"] == [1, 2]


def test_report_sorted_and_stable():
    a = dumps_report(make_report("k", {"b": 1, "a": 2}, {}, timestamp="t"))
    b = dumps_report(make_report("k", {"a": 2, "b": 1}, {}, timestamp="t"))
    assert a == b


def test_read_report_rejects_foreign(tmp_path):
    (tmp_path / "r.json").write_text(json.dumps({"schema_version": 99}))
    with pytest.raises(jsonschema.ValidationError):
        read_report(tmp_path / "r.json")


def test_rows_csv(tmp_path):
    write_rows_csv([{"a": 1, "b": None}, {"a": 2, "b": 0.5}], tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,\n2,0.5\n"
    with pytest.raises(ValueError):
        write_rows_csv([], tmp_path / "t.csv")
