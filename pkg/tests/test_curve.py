import math

import pytest
from hypothesis import given, settings, strategies as st

from selmerstab.curve import (
    ApCache,
    CurveQ,
    _count_bsgs,
    _count_legendre,
    count_points,
    discriminant,
    ell_torsion_trivial,
    has_good_reduction,
    trace_of_frobenius,
)
from selmerstab.errors import InvalidInputError, PreconditionError
from selmerstab.modarith import sieve_primes

E = CurveQ.short(1, 1)
CORPUS = [E, CurveQ(0, 0, 1, -1, 0), CurveQ(1, -1, 1, 0, 0), CurveQ(0, -1, 1, -10, -20)]


def naive(curve, p):
    a1, a2, a3, a4, a6 = curve.coeffs
    n = 1
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0:
                n += 1
    return n


def test_discriminants():
    assert discriminant(E) == -496
    assert discriminant(CurveQ.short(0, 1)) == -432
    assert CurveQ(0, 0, 1, -1, 0).disc == 37
    with pytest.raises(InvalidInputError):
        CurveQ.short(0, 0)


def test_parse_and_key():
    assert CurveQ.parse("0,0,0,1,1") == E
    assert CurveQ.parse("1,1") == E
    assert E.key == "0.0.0.1.1"
    assert E.sigma(5) == (2, 5, 31)
    with pytest.raises(InvalidInputError):
        CurveQ.parse("1,2,3")


def test_reduction():
    assert has_good_reduction(E, 11)
    assert not has_good_reduction(E, 31)
    assert not has_good_reduction(E, 2)


def test_point_count_examples():
    assert count_points(E, 5) == 9
    assert count_points(E, 11) == 14
    assert trace_of_frobenius(E, 5) == -3
    assert trace_of_frobenius(E, 11) == -2
    with pytest.raises(PreconditionError):
        count_points(E, 31)
    with pytest.raises(InvalidInputError):
        count_points(E, 9)


@pytest.mark.parametrize("curve", CORPUS, ids=lambda c: c.key)
def test_naive_agreement_small(curve):
    for p in sieve_primes(200):
        if has_good_reduction(curve, p):
            assert count_points(curve, p) == naive(curve, p)


def test_bsgs_matches_legendre():
    for curve in CORPUS:
        for p in [1009, 10007, 100003, 999983]:
            if has_good_reduction(curve, p):
                assert _count_bsgs(curve, p) == _count_legendre(curve, p)


def test_bsgs_large_prime_in_hasse_interval():
    p = 2_000_003
    n = count_points(E, p, bsgs_threshold=10**6)
    assert (n - p - 1) ** 2 <= 4 * p
    assert n == _count_legendre(E, p)


def test_torsion_examples():
    assert ell_torsion_trivial(E, 11, 5)
    assert ell_torsion_trivial(E, 3, 101)
    with pytest.raises(PreconditionError):
        ell_torsion_trivial(E, 31, 5)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([p for p in sieve_primes(5000) if p % 5 == 1 and p != 31]))
def test_torsion_trace_congruence(p):
    # for p = 1 mod ell: ell | #E(F_p) iff a_p = 2 mod ell
    assert ell_torsion_trivial(E, p, 5) == ((trace_of_frobenius(E, p) - 2) % 5 != 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20), st.sampled_from(sieve_primes(3000)[2:]))
def test_hasse_bound(a, b, p):
    if 4 * a**3 + 27 * b * b == 0:
        return
    c = CurveQ.short(a, b)
    if has_good_reduction(c, p):
        assert abs(trace_of_frobenius(c, p)) <= 2 * math.sqrt(p)


def test_ap_cache_roundtrip(tmp_path):
    cache = ApCache(tmp_path, E)
    for p in (3, 5, 7, 11):
        trace_of_frobenius(E, p, cache)
    assert ApCache(tmp_path, E).get(11) == -2
    assert (tmp_path / "ap_0.0.0.1.1.csv").read_text().splitlines()[0] == "3,0"


def test_ap_cache_rejects_corrupt(tmp_path):
    (tmp_path / "ap_0.0.0.1.1.csv").write_text("5,-3\n3,0\n")
    with pytest.raises(InvalidInputError):
        ApCache(tmp_path, E)
    (tmp_path / "ap_0.0.0.1.1.csv").write_text("5,99\n")
    with pytest.raises(InvalidInputError):
        ApCache(tmp_path, E)
