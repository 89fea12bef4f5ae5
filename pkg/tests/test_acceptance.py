"""The ten acceptance criteria at their stated tolerances and time budgets."""
import pytest

from wigprop.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.failures()
