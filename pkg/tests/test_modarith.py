import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selmerstab.errors import InvalidInputError, PreconditionError
from selmerstab.modarith import (
    ell_power_residue_index,
    is_prime,
    least_primitive_root,
    legendre_table,
    mod_pow,
    prime_factors,
    residue_index,
    sieve_primes,
    valuation,
)


def trial_division_primes(n):
    return [k for k in range(2, n + 1) if all(k % d for d in range(2, math.isqrt(k) + 1))]


def test_sieve_examples():
    assert sieve_primes(10) == [2, 3, 5, 7]
    assert sieve_primes(2) == [2]
    assert sieve_primes(1) == []
    assert sieve_primes(-5) == []
    assert len(sieve_primes(10_000)) == 1229
    assert sieve_primes(10_000) == trial_division_primes(10_000)


def test_mod_pow_examples():
    assert mod_pow(2, 10, 11) == 1
    assert mod_pow(2, 5, 11) == 10
    assert mod_pow(7, 0, 10) == 1
    with pytest.raises(InvalidInputError):
        mod_pow(2, 3, 1)


@given(st.integers(-1000, 1000), st.integers(0, 1000), st.integers(2, 1000))
def test_mod_pow_naive(a, e, m):
    x = 1
    for _ in range(e):
        x = x * a % m
    assert mod_pow(a, e, m) == x % m


@given(st.integers(2, 10**6))
def test_is_prime_matches_factorization(n):
    assert is_prime(n) == (prime_factors(n) == [n])


def test_primitive_roots():
    assert least_primitive_root(11) == 2
    assert least_primitive_root(7) == 3
    assert least_primitive_root(5) == 2
    with pytest.raises(InvalidInputError):
        least_primitive_root(12)


def test_primitive_root_order_exact():
    for q in sieve_primes(2000)[1:]:
        g = least_primitive_root(q)
        assert len({pow(g, k, q) for k in range(q - 1)}) == q - 1


def test_residue_index_examples():
    assert int(ell_power_residue_index(1, 11, 5)) == 0
    assert int(ell_power_residue_index(2, 11, 5)) != 0
    assert int(ell_power_residue_index(23, 11, 5)) == 0
    assert ell_power_residue_index(2, 11, 5).generator == 2
    with pytest.raises(PreconditionError):
        ell_power_residue_index(2, 7, 5)
    with pytest.raises(PreconditionError):
        ell_power_residue_index(22, 11, 5)


pairs = [(q, ell) for ell in (3, 5, 7) for q in sieve_primes(1000) if q % ell == 1]


@settings(max_examples=200)
@given(st.sampled_from(pairs), st.integers(1, 10**6), st.integers(1, 10**6))
def test_residue_index_homomorphism(qe, a, b):
    q, ell = qe
    if a % q == 0 or b % q == 0:
        return
    assert residue_index(a * b, q, ell) == (residue_index(a, q, ell) + residue_index(b, q, ell)) % ell


@pytest.mark.parametrize("q,ell", [(q, e) for q, e in pairs if q < 400])
def test_residue_index_zero_iff_power(q, ell):
    powers = {pow(x, ell, q) for x in range(1, q)}
    for a in range(1, q):
        assert (residue_index(a, q, ell) == 0) == (a in powers)


def test_legendre_tables():
    for p, sq in [(3, {0, 1}), (5, {0, 1, 4}), (11, {0, 1, 3, 4, 5, 9})]:
        assert set(np.flatnonzero(legendre_table(p)).tolist()) == sq
    with pytest.raises(ValueError):
        legendre_table(5)[0] = False


def test_valuation():
    assert valuation(496, 2) == 4
    assert valuation(496, 31) == 1
    assert valuation(7, 2) == 0
