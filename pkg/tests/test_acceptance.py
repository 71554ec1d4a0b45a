"""Acceptance battery: one PASS/FAIL line per criterion, at the stated tolerances."""
import pytest

from hardedge import acceptance


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=[f"criterion{f.number}" for f in acceptance.CRITERIA])
def test_criterion(fn, capsys):
    res = fn()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
