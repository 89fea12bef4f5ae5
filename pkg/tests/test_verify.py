import math

import pytest

from wigprop.verify import CRITERIA, SUITES, Check, CriterionResult, run_suite


def test_check_kinds():
    assert Check("a", 1e-9, 1e-8).passed
    assert not Check("a", 1e-7, 1e-8).passed
    assert Check("r", 0.97, 0.95, "min").passed
    assert not Check("r", math.nan, 0.95, "min").passed
    assert not Check("e", math.nan, 1.0).passed


def test_result_line_and_budget():
    r = CriterionResult(3, "x", "title", [Check("e", 1e-9, 1e-8)], runtime=0.5, budget=1.0)
    assert r.passed and r.line().startswith("PASS [3] title")
    slow = CriterionResult(3, "x", "title", [Check("e", 1e-9, 1e-8)], runtime=2.0, budget=1.0)
    assert not slow.passed and slow.line().startswith("FAIL")
    assert slow.to_dict()["passed"] is False


def test_catalogue():
    assert [c[0] for c in CRITERIA] == list(range(1, 11))
    assert len(set(SUITES)) == 10


def test_run_suite_errors_and_scaling():
    with pytest.raises(KeyError):
        run_suite("unknown")
    with pytest.raises(ValueError):
        run_suite("symplectic", tolerance_scale=0)
    (res,) = run_suite("symplectic", tolerance_scale=2.0)
    assert res.budget == pytest.approx(2 * CRITERIA[0][3])
