"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Thresholds are applied inside ``swe_esdg.verification``; the runtime budget
of each criterion is asserted here.
"""
import pytest

from swe_esdg.verification import CHECKS, run_check

RUNTIME_LIMIT = {1: 1, 2: 5, 3: 10, 4: 120, 5: 300, 6: 300, 7: 600, 8: 5, 9: 5, 10: 5, 11: 900}
SLOW = {4, 5, 6, 7, 11}


def _params():
    for k in sorted(CHECKS):
        marks = [pytest.mark.slow] if k in SLOW else []
        yield pytest.param(k, id=f"criterion_{k:02d}", marks=marks)


@pytest.mark.parametrize("number", list(_params()))
def test_criterion(number, capsys):
    result = run_check(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
    assert result.seconds < RUNTIME_LIMIT[number], f"took {result.seconds:.1f}s, budget {RUNTIME_LIMIT[number]}s"
