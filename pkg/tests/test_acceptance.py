"""One PASS/FAIL line per acceptance criterion (run with -s to see them inline)."""

import pytest

from selmerstab import acceptance

_results = {}


def _run(n):
    if n not in _results:
        _results[n] = acceptance.CRITERIA[n - 1]()
        print("\n" + _results[n].line())
    return _results[n]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 7, 8])
def test_criterion(n):
    r = _run(n)
    assert r.passed, r.line()


@pytest.mark.parametrize("part", [
    "census_matches_brute_force",
    "every_field_certified",
    "partial_sum_cross_check",
    "synthetic_fit_1e-6",
    "census_monotone",
    "real_fit_a_in_band",
])
def test_criterion_6(part):
    r = _run(6)
    assert r.parts[part], r.line()


def test_summary(capsys):
    lines = [_run(n).line() for n in range(1, 9)]
    with capsys.disabled():
        print("\n" + "\n".join(lines))
