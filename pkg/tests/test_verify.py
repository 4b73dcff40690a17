import json
from pathlib import Path

import jsonschema
import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

import altmzv
from altmzv.numeric import ConstantCache
from altmzv.verify import CaseRecord, VerificationReport, build_suite, oracle_value, run_suite

SCHEMA = json.loads((Path(altmzv.__file__).parent / "schema" / "report.schema.json").read_text())


def strip_time(report):
    data = report.to_json()
    data.pop("wall_time")
    return json.dumps(data, sort_keys=True)


@pytest.fixture(scope="module")
def fixtures_report():
    return run_suite("fixtures", 40)


def test_report_matches_schema(fixtures_report):
    jsonschema.validate(fixtures_report.to_json(), SCHEMA)


def test_status_agrees_with_residual(fixtures_report):
    for c in fixtures_report.cases:
        with mpmath.workdps(30):
            ok = mpmath.mpf(c.residual) <= mpmath.mpf(c.tolerance)
        assert (c.status == "pass") == ok


def test_published_typos_show_up(fixtures_report):
    failed = {c.params["target"] for c in fixtures_report.cases if c.status == "fail"}
    assert failed == {"b1,1,1,b1", "b1,1,b1,b1"}
    notes = {c.params["target"]: c.note for c in fixtures_report.cases if c.status == "fail"}
    assert "ln(2)^2*zeta(2)" in notes["b1,1,1,b1"]


@given(st.lists(st.sampled_from(["pass", "fail", "skipped"]), max_size=12))
def test_totals_aggregate(statuses):
    cases = [CaseRecord(f"c{i}", {}, "0", "0", "0", "1e-25", s) for i, s in enumerate(statuses)]
    r = VerificationReport("exact", 40, cases)
    t = r.totals
    assert t["total"] == len(statuses)
    assert t["pass"] + t["fail"] + t["skipped"] == t["total"]
    assert r.ok == ("fail" not in statuses)


def test_deterministic_and_job_independent():
    a = run_suite("exact", 40)
    b = run_suite("exact", 40, jobs=2)
    assert strip_time(a) == strip_time(b)
    assert a.ok


def test_cache_second_run_derives_nothing(tmp_path):
    path = tmp_path / "c.tsv"
    first = ConstantCache(path)
    run_suite("fixtures", 40, cache=first)
    assert first.derivations > 0
    first.save()
    second = ConstantCache(path)
    run_suite("fixtures", 40, cache=second)
    assert second.derivations == 0 and second.hits > 0


def test_suites_are_disjoint_and_all_is_union():
    names = ["fixtures", "exact", "quadrature", "theorems"]
    total = sum(len(build_suite(n, 40)[0]) for n in names)
    assert len(build_suite("all", 40)[0]) == total
    assert build_suite("fixtures", 40)[1] == []
    assert build_suite("theorems", 40)[1]


def test_unknown_suite():
    with pytest.raises(ValueError):
        build_suite("everything", 40)


def test_oracle_value_routes():
    with mpmath.workprec(200):
        assert abs(oracle_value("b1", 150) + mpmath.ln2) < mpmath.mpf("1e-40")
        assert abs(oracle_value("mplhalf:1", 150) - mpmath.ln2) < mpmath.mpf("1e-40")
        assert abs(oracle_value("I(0,1)", 150) - mpmath.pi**2 / 12) < mpmath.mpf("1e-40")
