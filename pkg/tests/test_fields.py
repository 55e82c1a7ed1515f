import pytest
from hypothesis import given, settings, strategies as st

from selmerstab.errors import DegenerateTwistError, PreconditionError
from selmerstab.fields import (
    AbelianFieldDesc,
    Character,
    character_field,
    discriminant_abs,
    inertial_degree,
    ramified_primes,
    scholz_check,
    splits_completely,
    twist,
)
from selmerstab.modarith import residue_index, sieve_primes

Q5 = AbelianFieldDesc.rationals(5)
L11 = AbelianFieldDesc.cyclic(5, 11)
L31 = AbelianFieldDesc.cyclic(5, 31)
L101 = AbelianFieldDesc.cyclic(5, 101)
ONE_MOD_5 = [q for q in sieve_primes(400) if q % 5 == 1]


def test_splitting_examples():
    assert splits_completely(Q5, 7)
    assert splits_completely(L11, 23)
    assert not splits_completely(L11, 2)
    with pytest.raises(PreconditionError):
        splits_completely(L11, 11)


def test_ramification_examples():
    assert ramified_primes(Q5) == ()
    assert ramified_primes(L11) == (11,)
    assert ramified_primes(AbelianFieldDesc.compositum(L11, L31)) == (11, 31)


def test_inertial_degree_examples():
    assert inertial_degree(L11, 11) == 1
    comp = AbelianFieldDesc.compositum(L11, L31)
    # 31 = 9 mod 11 and 9^2 = 4 != 1, so Frob_31 has order 5 in the L11 part
    assert inertial_degree(comp, 31) == 5
    with pytest.raises(PreconditionError):
        inertial_degree(L11, 7)


def test_inertial_degree_one_when_mutual_powers():
    pairs = [(a, b) for a in ONE_MOD_5 for b in ONE_MOD_5
             if a < b and residue_index(a, b, 5) == 0 and residue_index(b, a, 5) == 0]
    assert pairs
    a, b = pairs[0]
    comp = AbelianFieldDesc.compositum(AbelianFieldDesc.cyclic(5, a), AbelianFieldDesc.cyclic(5, b))
    assert inertial_degree(comp, a) == 1 and inertial_degree(comp, b) == 1


def test_discriminants():
    assert discriminant_abs(Q5) == 1
    assert discriminant_abs(L11) == 11**4
    assert discriminant_abs(character_field(5, {11: 1, 31: 2})) == 341**4
    assert discriminant_abs(AbelianFieldDesc.compositum(L11, L31)) == 11**20 * 31**20
    assert discriminant_abs(AbelianFieldDesc.cyclic(5, 101, 2)) == 101**24


def test_scholz_examples():
    assert scholz_check(L11, 1).holds
    assert not scholz_check(L11, 2).holds
    assert scholz_check(L101, 2).holds


def test_character_field_examples():
    assert character_field(5, {}).is_rationals
    assert character_field(5, {11: 1}).same_field(L11)
    f = character_field(5, {11: 1, 31: 2})
    assert f.degree == 5 and ramified_primes(f) == (11, 31)
    with pytest.raises(PreconditionError):
        character_field(5, {7: 1})


def test_twist_examples():
    chi = Character.from_coefficients(5, {11: 1})
    assert twist(AbelianFieldDesc.rationals(5, twistable=True), chi).same_field(L11)
    assert twist(L11, chi**2).same_field(L11)
    with pytest.raises(DegenerateTwistError):
        twist(L11, chi.inverse())


def test_text_roundtrip():
    for d in (Q5, L11, AbelianFieldDesc.compositum(L11, L31), character_field(5, {11: 1, 31: 2}),
              AbelianFieldDesc.cyclic(5, 101, 2)):
        assert AbelianFieldDesc.parse(d.text()).same_field(d)
    assert AbelianFieldDesc.parse("ell=5; gen: 11^1").same_field(L11)


@settings(max_examples=40, deadline=None)
@given(st.dictionaries(st.sampled_from(ONE_MOD_5[:10]), st.integers(1, 4), min_size=1, max_size=3))
def test_character_field_discriminant_law(coeffs):
    f = character_field(5, coeffs)
    prod = 1
    for q in coeffs:
        prod *= q
    assert discriminant_abs(f) == prod**4
    assert scholz_check(f, 1).holds


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ONE_MOD_5), st.integers(1, 3))
def test_scholz_monotone(q, N):
    d = AbelianFieldDesc.cyclic(5, q)
    if scholz_check(d, N).holds:
        assert all(scholz_check(d, k).holds for k in range(1, N + 1))


def test_single_conductor_degree_discriminant():
    for q, k in [(11, 1), (101, 2)]:
        d = AbelianFieldDesc.cyclic(5, q, k)
        disc = discriminant_abs(d)
        e = 0
        while disc % q == 0:
            disc //= q
            e += 1
        assert disc == 1 and e == 5**k - 1
