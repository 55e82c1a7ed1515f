import math
import warnings
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from selmerstab import counting
from selmerstab.acceptance import synthetic_fit_error
from selmerstab.counting import (
    CountReport,
    PrimePool,
    S0Data,
    count_lower_bound_M,
    dirichlet_coefficient,
    fit_exponents,
    malle_reference,
    partial_sum,
    product_threshold,
)
from selmerstab.errors import InvalidInputError, PreconditionError, ResourceLimitError
from selmerstab.groups import cyclic, elementary_abelian
from selmerstab.modarith import sieve_primes

POOL = PrimePool((11, 31), 5)
PRIMES_1_MOD_5 = [q for q in sieve_primes(2000) if q % 5 == 1]


def brute_partial_sum(pool, X):
    total = 0
    for n in range(1, X + 1):
        m, r, ok = n, 0, True
        for q in pool.primes:
            if m % q == 0:
                m //= q
                r += 1
                if m % q == 0:
                    ok = False
                    break
        if ok and m == 1:
            total += (pool.ell - 1) ** r
    return total


def test_coefficient_examples():
    assert dirichlet_coefficient(POOL, 1) == 1
    assert dirichlet_coefficient(POOL, 341) == 16
    assert dirichlet_coefficient(POOL, 121) == 0
    assert dirichlet_coefficient(POOL, 22) == 0
    with pytest.raises(InvalidInputError):
        dirichlet_coefficient(POOL, 0)


def test_partial_sum_examples():
    assert partial_sum(POOL, 350) == 25
    assert partial_sum(POOL, 1) == 1
    assert partial_sum(POOL, 10) == 1


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(PRIMES_1_MOD_5[:30]), min_size=1, max_size=12, unique=True),
       st.integers(1, 10**6))
def test_partial_sum_brute(primes, X):
    pool = PrimePool(tuple(sorted(primes)), 5)
    if X > 2 * 10**5:
        X = X // 10
    assert partial_sum(pool, X) == brute_partial_sum(pool, X)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(PRIMES_1_MOD_5[:20]), min_size=2, max_size=8, unique=True),
       st.integers(1, 10**9))
def test_partial_sum_monotone_in_pool(primes, X):
    primes = sorted(primes)
    small = PrimePool(tuple(primes[:-1]), 5)
    big = PrimePool(tuple(primes), 5)
    assert partial_sum(small, X) <= partial_sum(big, X)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.sampled_from(PRIMES_1_MOD_5[:15]), min_size=1, max_size=6, unique=True),
       st.integers(1, 10**8))
def test_partial_sum_symbolic_product(primes, X):
    # coefficients of prod (1 + 4 q^-s) as a polynomial in formal variables t_q = q^-s
    primes = sorted(primes)
    ts = sympy.symbols(f"t0:{len(primes)}")
    poly = sympy.Poly(sympy.expand(sympy.prod(1 + 4 * t for t in ts)), *ts)
    total = 0
    for monom, coeff in poly.terms():
        n = math.prod(q**e for q, e in zip(primes, monom))
        if n <= X:
            total += int(coeff)
    assert partial_sum(PrimePool(tuple(primes), 5), X) == total


def test_partial_sum_cap():
    pool = PrimePool(tuple(PRIMES_1_MOD_5[:40]), 5)
    with pytest.raises(ResourceLimitError) as exc:
        partial_sum(pool, 10**15, cap=1000)
    assert exc.value.partial > 0


def test_pool_invariants():
    with pytest.raises(InvalidInputError):
        PrimePool((31, 11), 5)
    with pytest.raises(InvalidInputError):
        PrimePool((11, 31), 5, {"Z": (31,)})


def test_lower_bound_examples():
    s0 = S0Data((), 0)
    r = count_lower_bound_M(POOL, s0, 341**4, 1, 5)
    assert r.value == 25 and not r.conditional_on_c2
    assert count_lower_bound_M(POOL, s0, 11**4 - 1, 1, 5).value == 1
    values = [count_lower_bound_M(POOL, s0, X, 1, 5).value for X in (1, 10**4, 11**4, 31**4, 341**4, 10**12)]
    assert values == sorted(values)


def test_lower_bound_with_s0_and_dim():
    s0 = S0Data((2,), 1)
    # (2 * prod T)^4 <= X  <=>  prod T <= floor(X^(1/4)) // 2
    r = count_lower_bound_M(POOL, s0, 62**4, 1, 5)
    assert r.threshold == 31 and r.value == 5 * partial_sum(POOL, 31)


def test_lower_bound_n2_conditional():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        r = count_lower_bound_M(POOL, S0Data((), 0), 11**20, 2, 5)
    assert w and r.conditional_on_c2 and r.value == 5
    r2 = count_lower_bound_M(POOL, S0Data((), 0), 11**20, 2, 5, c2=Fraction(1, 2))
    assert r2.threshold == product_threshold(11**20, 2, 5, (), Fraction(1, 2))
    with pytest.raises(PreconditionError):
        count_lower_bound_M(POOL, S0Data((), 0), 10, 1, 5, c2=2)


def test_product_threshold_exact():
    assert product_threshold(341**4, 1, 5, ()) == 341
    assert product_threshold(341**4 - 1, 1, 5, ()) == 340
    assert product_threshold(10**10, 1, 5, (11, 71, 131)) == 0


def test_fit_synthetic():
    assert synthetic_fit_error() <= 1e-6


def test_fit_preconditions():
    reps = [CountReport(10**k, 10 + k, Fraction(1, 4), Fraction(19, 24)) for k in range(2, 5)]
    with pytest.raises(PreconditionError):
        fit_exponents(reps)
    reps = [CountReport(10**6 + k, 5 + k, Fraction(1, 4), Fraction(19, 24)) for k in range(6)]
    with pytest.raises(PreconditionError):
        fit_exponents(reps)


def test_malle_reference():
    assert malle_reference(5, 1).a == Fraction(1, 4)
    assert malle_reference(5, 2).a == Fraction(1, 20)
    assert malle_reference(7, 1).a == Fraction(1, 6)
    assert counting.delta(5, 1) == Fraction(19, 24)
    assert counting.delta(5, 2) == Fraction(19, 120)
    malle_reference(5, 1, cyclic(5, 5))
    malle_reference(5, 2, elementary_abelian(5, 2))
    with pytest.raises(AssertionError):
        malle_reference(5, 2, cyclic(5, 5))


def test_csv_output():
    text = counting.reports_csv([(10, 1, 1), (100, 2, None)])
    assert text.splitlines() == ["X,S,M_lower", "10,1,1", "100,2,"]
