import json

import numpy as np
import pytest

from polaron_lab.output.serialize import basis_payload, operator_triplets
from polaron_lab.output.session import open_session
from polaron_lab.output.writers import write_csv, write_json
from polaron_lab.schemas.reports import CheckReport, to_jsonable


def test_jsonable_conversion():
    converted = to_jsonable({"a": np.float64(1.5), "b": np.arange(3), "c": float("nan"), 4: (np.int64(2), True)})
    assert converted == {"a": 1.5, "b": [0, 1, 2], "c": None, "4": [2, True]}


def test_json_header_stays_on_the_first_line(tmp_path):
    path = write_json(tmp_path / "out.json", {"value": 1.0, "items": [1, 2]}, {"generated": "now"})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == '{"header": {"generated":"now"},'
    assert json.loads(path.read_text(encoding="utf-8")) == {
        "header": {"generated": "now"},
        "items": [1, 2],
        "value": 1.0,
    }


def test_json_header_key_is_reserved(tmp_path):
    with pytest.raises(ValueError):
        write_json(tmp_path / "out.json", {"header": 1})


def test_csv_layout(tmp_path):
    path = write_csv(tmp_path / "out.csv", ["x", "y"], [(0.1, None), (2, "a")], "q = 0.3\np = 0 0 1", "now")
    text = path.read_text(encoding="utf-8")
    assert text.splitlines() == ["# generated now", "# q = 0.3", "# p = 0 0 1", "x,y", "0.1,", "2,a"]


def test_session_records_files_and_stages(tmp_path):
    with open_session(tmp_path / "run", "solve", "q = 0.3") as session:
        with session.stage("work"):
            pass
        session.json("a.json", {"x": 1})
    payload = json.loads((tmp_path / "run" / "a.json").read_text(encoding="utf-8"))
    assert payload["config_source"] == "q = 0.3"
    assert "work" in payload["header"]["runtimes"]
    assert session.files == [tmp_path / "run" / "a.json"]


def test_check_report_statuses():
    assert CheckReport.from_slack("x", "anchor", -1e-3, 1e-6).status == "fail"
    assert CheckReport.from_slack("x", "anchor", -1e-9, 1e-6).status == "pass"
    assert CheckReport.from_slack("x", "anchor", 0.0, 0.0, strict_slack=0.0, floor=1e-10).status == (
        "indistinguishable from equality"
    )
    combined = CheckReport.from_parts("x", "anchor", [("a", 1.0, 0.0), ("b", -2.0, 1.0)])
    assert combined.status == "fail"
    assert combined.details["failing"] == ["b"]
    assert not combined.passed


def test_serializers(d2_model):
    payload = basis_payload(d2_model.basis)
    assert payload["size"] == 165
    assert payload["symmetry_tags"] == sorted(payload["symmetry_tags"])
    triplets = operator_triplets(np.diag([1.0, -2.0]))
    assert triplets["entries"] == [[0, 0, 1.0, 0.0], [1, 1, -2.0, 0.0]]
