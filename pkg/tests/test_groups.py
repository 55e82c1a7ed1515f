import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from selmerstab import groups
from selmerstab.acceptance import brute_h2_dimension
from selmerstab.errors import InvalidInputError, PreconditionError, ResourceLimitError
from selmerstab.groups import (
    GroupTable,
    center,
    central_filtration,
    cyclic,
    direct_product,
    elementary_abelian,
    extension_class,
    fibre_product,
    frattini,
    generate,
    h2_dimension,
    heisenberg,
    is_coboundary,
    is_cocycle,
    is_cyclic,
    malle_invariant,
    quotient,
)


def test_table_validation():
    with pytest.raises(InvalidInputError):
        GroupTable(np.array([[0, 1], [1, 1]]))
    with pytest.raises(InvalidInputError):
        cyclic(6, 2)


def test_text_roundtrip(tmp_path):
    H = heisenberg(3)
    path = tmp_path / "h.txt"
    H.write(path)
    assert np.array_equal(GroupTable.read(path, 3).table, H.table)


def test_center_examples():
    assert len(center(elementary_abelian(3, 2))) == 9
    assert len(center(heisenberg(5))) == 5
    assert center(cyclic(1)) == frozenset({0})


def test_frattini_examples():
    assert len(frattini(cyclic(25, 5), 5)) == 5
    assert frattini(elementary_abelian(5, 2), 5) == frozenset({0})
    assert frattini(heisenberg(3), 3) == center(heisenberg(3))
    with pytest.raises(InvalidInputError):
        frattini(cyclic(6), 5)


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_cyclic_iff_frattini_quotient_order_ell(ell):
    for G in groups.corpus(ell).values():
        if G.order == 1:
            continue
        Q, _ = quotient(G, frattini(G, ell))
        assert is_cyclic(G) == (Q.order == ell)


def test_filtration_examples():
    C25 = cyclic(25, 5)
    chain = central_filtration(C25, 5)
    assert [len(H) for H in chain] == [25, 5, 1]
    chain = central_filtration(elementary_abelian(5, 2), 5)
    assert [len(H) for H in chain] == [25, 5, 1]
    assert chain[1] == generate(elementary_abelian(5, 2), [1])
    assert central_filtration(cyclic(1, 5), 5) == []


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_filtration_on_corpus(ell):
    for G in groups.corpus(ell).values():
        chain = central_filtration(G, ell)
        if G.order > 1:
            assert len(chain[0]) == G.order and chain[-1] == frozenset({0})


def test_fibre_product_examples():
    G1, G2 = cyclic(25, 5), elementary_abelian(5, 2)
    T = cyclic(1, 5)
    assert fibre_product(G1, G2, T, [0] * 25, [0] * 25).group.order == 625
    C5 = cyclic(5, 5)
    assert fibre_product(C5, C5, C5, list(range(5)), list(range(5))).group.order == 5
    f1 = [x % 5 for x in range(25)]
    f2 = [x % 5 for x in range(25)]  # elementary_abelian(5,2) element index a*5+b -> b
    assert fibre_product(G1, G2, C5, f1, f2).group.order == 125
    with pytest.raises(PreconditionError):
        fibre_product(C5, C5, C5, [0] * 5, list(range(5)))


def test_h2_examples():
    assert h2_dimension(cyclic(1, 2), 2).dimension == 0
    assert h2_dimension(cyclic(2, 2), 2).dimension == 1
    assert h2_dimension(elementary_abelian(2, 2), 2).dimension == 3
    assert h2_dimension(heisenberg(3), 3).dimension == 4
    with pytest.raises(ResourceLimitError):
        h2_dimension(elementary_abelian(5, 3), 5)


@pytest.mark.parametrize("ell,r", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1), (5, 2)])
def test_h2_elementary_abelian_pattern(ell, r):
    assert h2_dimension(elementary_abelian(ell, r), ell).dimension == r * (r + 1) // 2


def test_h2_brute_oracle_order_8():
    for G in (cyclic(8, 2), direct_product(cyclic(4), cyclic(2), 2)):
        assert h2_dimension(G, 2).dimension == brute_h2_dimension(G, 2)


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_h2_basis_are_cocycles_not_coboundaries(ell):
    G = elementary_abelian(ell, 2)
    res = h2_dimension(G, ell)
    for th in res.basis:
        assert is_cocycle(G, th, ell) and not is_coboundary(G, th, ell)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=8, max_size=8))
def test_coboundaries_are_cocycles(f):
    G = elementary_abelian(3, 2)
    f = [0] + f
    th = np.array([[(f[g] + f[h] - f[G.mul(g, h)]) % 3 for h in range(9)] for g in range(9)])
    assert is_cocycle(G, th, 3) and is_coboundary(G, th, 3)
    assert not np.any(h2_dimension(G, 3).coordinates(th, 3))


def test_extension_examples():
    C5 = cyclic(5, 5)
    Gt = direct_product(C5, C5, 5)
    pi = [x // 5 for x in range(25)]  # (a, b) -> a; kernel is the second factor
    assert extension_class(Gt, C5, pi, 5).is_split
    C25 = cyclic(25, 5)
    Q, pi = quotient(C25, generate(C25, [5]))
    assert not extension_class(C25, Q, pi, 5).is_split
    H = heisenberg(5)
    Q, pi = quotient(H, center(H))
    ext = extension_class(H, Q, pi, 5)
    assert not ext.is_split and ext.complement is None


def test_extension_rejects_wrong_kernel_order():
    H = heisenberg(3)
    with pytest.raises(PreconditionError):
        extension_class(H, *quotient(H, center(H)), 5)


def test_malle_examples():
    assert malle_invariant(cyclic(5, 5)) == (4, Fraction(1, 4))
    assert malle_invariant(elementary_abelian(5, 2)) == (20, Fraction(1, 20))
    assert malle_invariant(cyclic(25, 5)) == (20, Fraction(1, 20))
    assert malle_invariant(cyclic(2, 2)) == (1, Fraction(1))
    with pytest.raises(InvalidInputError):
        malle_invariant(cyclic(1))
