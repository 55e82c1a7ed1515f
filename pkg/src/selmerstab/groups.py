"""Finite (ell-)groups as multiplication tables, and their degree-2 cohomology.

Elements are the indices 0..n-1 of an n x n table; index 0 is the identity.
Coefficients for H^2 are Z/ell with trivial action throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import InvalidInputError, LawViolationError, PreconditionError, ResourceLimitError

H2_MAX_ORDER = 64
_ASSOC_EXHAUSTIVE = 512


@dataclass(frozen=True, eq=False)
class GroupTable:
    table: np.ndarray
    ell: int | None = None
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidInputError("group table must be a non-empty square array")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise InvalidInputError("table entries out of range")
        ar = np.arange(n)
        if not (np.array_equal(t[0], ar) and np.array_equal(t[:, 0], ar)):
            raise InvalidInputError("index 0 must be the identity")
        if np.any(np.sort(t, axis=1) != ar) or np.any(np.sort(t, axis=0) != ar[:, None]):
            raise InvalidInputError("table is not a Latin square (inverses missing)")
        _check_associative(t)
        if self.ell is not None and _ell_power(n, self.ell) is None:
            raise InvalidInputError(f"order {n} is not a power of {self.ell}")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    identity = 0

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inverse(self, a: int) -> int:
        return int(np.flatnonzero(self.table[a] == 0)[0])

    @property
    def inverses(self) -> np.ndarray:
        return np.argmin(self.table, axis=1)

    def power(self, a: int, k: int) -> int:
        x = 0
        for _ in range(k):
            x = self.mul(x, a)
        return x

    def element_order(self, a: int) -> int:
        x, k = a, 1
        while x != 0:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def to_text(self) -> str:
        rows = [str(self.order)] + [" ".join(map(str, r)) for r in self.table]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str, ell: int | None = None, name: str = "") -> "GroupTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        n = int(lines[0])
        if len(lines) != n + 1:
            raise InvalidInputError(f"expected {n} table rows, got {len(lines) - 1}")
        rows = [[int(x) for x in ln.split()] for ln in lines[1:]]
        if any(len(r) != n for r in rows):
            raise InvalidInputError("ragged table")
        return cls(np.array(rows), ell, name)

    @classmethod
    def read(cls, path, ell: int | None = None) -> "GroupTable":
        return cls.from_text(Path(path).read_text(), ell, Path(path).stem)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())


def _ell_power(n: int, ell: int) -> int | None:
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k if n == 1 else None


def _check_associative(t: np.ndarray) -> None:
    n = t.shape[0]
    if n <= _ASSOC_EXHAUSTIVE:
        for a in range(n):
            # (a b) c == a (b c) for all b, c
            if not np.array_equal(t[t[a]], t[a][t]):
                raise InvalidInputError("table is not associative")
    else:
        rng = np.random.default_rng(0)
        a, b, c = rng.integers(0, n, size=(3, 200_000))
        if np.any(t[t[a, b], c] != t[a, t[b, c]]):
            raise InvalidInputError("table is not associative")


# --- constructors -------------------------------------------------------------------


def from_elements(elements: Sequence[Hashable], mul: Callable, ell: int | None = None, name: str = "") -> GroupTable:
    """Table of a group given by concrete elements; elements[0] must be the identity."""
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    t = np.empty((n, n), dtype=np.int64)
    for i, a in enumerate(elements):
        for j, b in enumerate(elements):
            t[i, j] = index[mul(a, b)]
    return GroupTable(t, ell, name)


def cyclic(n: int, ell: int | None = None) -> GroupTable:
    ar = np.arange(n)
    return GroupTable((ar[:, None] + ar[None, :]) % n, ell, f"C{n}")


def direct_product(G: GroupTable, H: GroupTable, ell: int | None = None) -> GroupTable:
    n, m = G.order, H.order
    gi, hi = np.divmod(np.arange(n * m), m)
    t = G.table[gi[:, None], gi[None, :]] * m + H.table[hi[:, None], hi[None, :]]
    return GroupTable(t, ell if ell is not None else G.ell, f"{G.name}x{H.name}")


def elementary_abelian(ell: int, rank: int) -> GroupTable:
    G = cyclic(1, ell)
    for _ in range(rank):
        G = direct_product(G, cyclic(ell), ell)
    return GroupTable(G.table, ell, f"C{ell}^{rank}")


def heisenberg(ell: int) -> GroupTable:
    """Upper unitriangular 3x3 matrices over F_ell (order ell^3; dihedral D4 for ell = 2)."""
    els = [(a, b, c) for a in range(ell) for b in range(ell) for c in range(ell)]

    def mul(x, y):
        return ((x[0] + y[0]) % ell, (x[1] + y[1]) % ell, (x[2] + y[2] + x[0] * y[1]) % ell)

    return from_elements(els, mul, ell, f"Heis({ell})")


def corpus(ell: int) -> dict[str, GroupTable]:
    """Shipped test tables: cyclic ell^k (k <= 3), elementary abelian rank <= 3,
    Heisenberg ell^3 and Z/ell^2 x Z/ell."""
    out = {"trivial": cyclic(1, ell)}
    for k in (1, 2, 3):
        out[f"C{ell**k}"] = cyclic(ell**k, ell)
    for r in (2, 3):
        out[f"C{ell}^{r}"] = elementary_abelian(ell, r)
    out[f"Heis{ell}"] = heisenberg(ell)
    out[f"C{ell*ell}xC{ell}"] = direct_product(cyclic(ell * ell), cyclic(ell), ell)
    return out


# --- subgroups ----------------------------------------------------------------------


def generate(G: GroupTable, gens: Iterable[int]) -> frozenset[int]:
    """Subgroup generated by ``gens``."""
    gens = [g for g in set(gens) if g != 0]
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def is_normal(G: GroupTable, H: Iterable[int]) -> bool:
    H = frozenset(H)
    inv = G.inverses
    return all(G.mul(G.mul(g, h), int(inv[g])) in H for g in range(G.order) for h in H)


def center(G: GroupTable) -> frozenset[int]:
    t = G.table
    return frozenset(int(z) for z in range(G.order) if np.array_equal(t[z], t[:, z]))


def commutator(G: GroupTable, a: int, b: int) -> int:
    inv = G.inverses
    return G.mul(G.mul(a, b), G.mul(int(inv[a]), int(inv[b])))


def _require_ell_group(G: GroupTable, ell: int) -> int:
    k = _ell_power(G.order, ell)
    if k is None:
        raise InvalidInputError(f"order {G.order} is not a power of {ell}")
    return k


def frattini(G: GroupTable, ell: int) -> frozenset[int]:
    """Phi(G) = G^ell [G, G] for an ell-group."""
    _require_ell_group(G, ell)
    n = G.order
    gens = {G.power(g, ell) for g in range(n)}
    gens |= {commutator(G, a, b) for a in range(n) for b in range(a + 1, n)}
    return generate(G, gens)


def is_cyclic(G: GroupTable) -> bool:
    return any(G.element_order(g) == G.order for g in range(G.order))


def quotient(G: GroupTable, N: Iterable[int]) -> tuple[GroupTable, list[int]]:
    """G/N with cosets labelled by their least element (so the identity coset is 0)."""
    N = frozenset(N)
    if not is_normal(G, N):
        raise PreconditionError("subgroup is not normal")
    label = {}
    reps = []
    for g in range(G.order):
        if g in label:
            continue
        coset = {G.mul(g, h) for h in N}
        for x in coset:
            label[x] = len(reps)
        reps.append(g)
    proj = [label[g] for g in range(G.order)]
    m = len(reps)
    t = np.array([[proj[G.mul(a, b)] for b in reps] for a in reps])
    return GroupTable(t, G.ell), proj


def central_filtration(G: GroupTable, ell: int) -> list[frozenset[int]]:
    """G = G_0 > G_1 > ... > G_n = 1 with each G_{i-1}/G_i of order ell and central in G/G_i.

    Built from the bottom: G_{i-1} is generated by G_i and the lowest-index
    element that is central of order ell modulo G_i.
    """
    n = _require_ell_group(G, ell)
    chain = [frozenset({0})]
    current = chain[0]
    for _ in range(n):
        for g in range(1, G.order):
            if g in current or G.power(g, ell) not in current:
                continue
            if all(commutator(G, g, h) in current for h in range(G.order)):
                current = generate(G, set(current) | {g})
                chain.append(current)
                break
        else:  # pragma: no cover - an ell-group always has a nontrivial center
            raise AssertionError("no central element of order ell in quotient")
    chain.reverse()
    _verify_filtration(G, chain, ell)
    return chain if n else []


def _verify_filtration(G, chain, ell):
    for upper, lower in zip(chain, chain[1:]):
        if len(upper) != ell * len(lower) or not is_normal(G, lower):
            raise LawViolationError("filtration step has wrong index or is not normal")
        if any(commutator(G, g, h) not in lower for g in upper for h in range(G.order)):
            raise LawViolationError("filtration step is not central")


@dataclass
class FibreProduct:
    group: GroupTable
    pairs: list[tuple[int, int]]
    proj1: list[int]
    proj2: list[int]


def _check_surjective_hom(A: GroupTable, B: GroupTable, f: Sequence[int]) -> None:
    f = np.asarray(f)
    if len(f) != A.order:
        raise PreconditionError("map has the wrong length")
    if not np.array_equal(f[A.table], B.table[f[:, None], f[None, :]]):
        raise PreconditionError("map is not a homomorphism")
    if len(set(f.tolist())) != B.order:
        raise PreconditionError("map is not surjective")


def fibre_product(G1: GroupTable, G2: GroupTable, G: GroupTable, f1: Sequence[int], f2: Sequence[int]) -> FibreProduct:
    """{(a, b) in G1 x G2 : f1(a) = f2(b)} with its two projections."""
    _check_surjective_hom(G1, G, f1)
    _check_surjective_hom(G2, G, f2)
    pairs = [(a, b) for a in range(G1.order) for b in range(G2.order) if f1[a] == f2[b]]
    table = from_elements(pairs, lambda x, y: (G1.mul(x[0], y[0]), G2.mul(x[1], y[1])))
    return FibreProduct(table, pairs, [a for a, _ in pairs], [b for _, b in pairs])


def malle_invariant(G: GroupTable) -> tuple[int, Fraction]:
    """(min_{g != 1} ind(g), a(G)) for the regular representation.

    g acts on G by left translation with #G / ord(g) orbits, so
    ind(g) = #G - #G / ord(g).
    """
    n = G.order
    if n == 1:
        raise InvalidInputError("a(G) is undefined for the trivial group")
    min_index = min(n - n // G.element_order(g) for g in range(1, n))
    return min_index, Fraction(1, min_index)


# --- cohomology ---------------------------------------------------------------------


def _cocycle_system(G: GroupTable, ell: int) -> sp.csr_matrix:
    """Sparse cocycle identities on normalized 2-cochains.

    Unknowns are theta(g, h) for g, h != 1, at column (g-1)*(n-1) + (h-1).
    Row (g, h, k) encodes theta(h,k) - theta(gh,k) + theta(g,hk) - theta(g,h).
    """
    n = G.order
    m = n - 1
    t = G.table
    g, h, k = (a.ravel() + 1 for a in np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij"))
    terms = [(h, k, 1), (t[g, h], k, -1), (g, t[h, k], 1), (g, h, -1)]
    rows, cols, vals = [], [], []
    rid = np.arange(g.size)
    for a, b, s in terms:
        keep = (a != 0) & (b != 0)
        rows.append(rid[keep])
        cols.append((a[keep] - 1) * m + (b[keep] - 1))
        vals.append(np.full(int(keep.sum()), s))
    M = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(g.size, m * m)
    ).tocsr()
    M.sum_duplicates()
    return M


def _exact_kernel(M: sp.csr_matrix, ell: int, seed: int = 0) -> np.ndarray:
    """Kernel of a sparse system mod ell.

    Large systems are compressed by random row combinations; ker(R M) always
    contains ker(M), and the candidate kernel is accepted only after every
    original equation is checked on it, so the result is exact.
    """
    rows, cols = M.shape
    if rows * cols <= 4_000_000:
        return linalg.nullspace(M.toarray() % ell, ell, cols)
    rng = np.random.default_rng(seed)
    extra = 24
    Mt = M.T.tocsr().astype(np.float64)
    while True:
        r = cols + extra
        C = np.zeros((cols, r))
        for start in range(0, rows, 8192):
            stop = min(rows, start + 8192)
            R = rng.integers(0, ell, size=(stop - start, r)).astype(np.float64)
            C += Mt[:, start:stop] @ R
            C %= ell
        K = linalg.nullspace(C.T.astype(np.int64) % ell, ell, cols)
        if K.size == 0 or not np.any((M @ K.T) % ell):
            return K
        extra *= 2


def _coboundary_matrix(G: GroupTable) -> np.ndarray:
    """delta f(g,h) = f(g) + f(h) - f(gh) on normalized cochains (f(1) = 0)."""
    n = G.order
    m = n - 1
    D = np.zeros((m * m, m), dtype=np.int64)
    t = G.table
    for g in range(1, n):
        for h in range(1, n):
            row = (g - 1) * m + (h - 1)
            D[row, g - 1] += 1
            D[row, h - 1] += 1
            gh = t[g, h]
            if gh:
                D[row, gh - 1] -= 1
    return D


@dataclass
class H2Result:
    dimension: int
    basis: list[np.ndarray]  # n x n cocycle tables representing a basis of H^2
    dim_cocycles: int
    dim_coboundaries: int
    _h_rows: np.ndarray = field(repr=False, default=None)
    _b_rows: np.ndarray = field(repr=False, default=None)

    def coordinates(self, theta: np.ndarray, ell: int) -> np.ndarray:
        """Coordinates of the class of a normalized cocycle in ``basis``."""
        v = _flatten(theta)
        A = np.vstack([self._h_rows, self._b_rows]) if self._b_rows.size else self._h_rows
        if A.size == 0:
            return np.zeros(0, dtype=np.int64)
        x = linalg.solve(A.T, v, ell)
        if x is None:
            raise PreconditionError("table is not a normalized cocycle")
        return x[: self.dimension]


def _flatten(theta: np.ndarray) -> np.ndarray:
    return np.asarray(theta)[1:, 1:].ravel()


def _unflatten(v: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=np.int64)
    out[1:, 1:] = np.asarray(v).reshape(n - 1, n - 1)
    return out


_H2_CACHE: dict = {}


def h2_dimension(G: GroupTable, ell: int, *, max_order: int = H2_MAX_ORDER) -> H2Result:
    """dim H^2(G, Z/ell) = dim Z^2 - dim B^2 over normalized cochains."""
    n = G.order
    if n > max_order:
        raise ResourceLimitError(f"H^2 system for order {n} exceeds cap {max_order}")
    if n == 1:
        empty = np.zeros((0, 0), dtype=np.int64)
        return H2Result(0, [], 0, 0, empty, empty)
    key = (G.table.tobytes(), n, ell)
    if key in _H2_CACHE:
        return _H2_CACHE[key]
    K = _exact_kernel(_cocycle_system(G, ell), ell)
    D = _coboundary_matrix(G)
    B, bpiv = linalg.rref(D.T, ell)
    B = B[: len(bpiv)]
    dim_b = B.shape[0]
    dim_z = K.shape[0]
    # reduce cocycles modulo the coboundary echelon basis; what survives spans a complement
    red = K.copy() % ell
    for i, c in enumerate(bpiv):
        red = (red - np.outer(red[:, c], B[i])) % ell
    Rr, rpiv = linalg.rref(red, ell) if red.size else (red, [])
    reps = [Rr[i] for i in range(len(rpiv))]
    if dim_b + len(reps) != dim_z or (dim_b and linalg.rank(np.vstack([K, B]), ell) != dim_z):
        raise LawViolationError("coboundaries are not contained in cocycles")
    h_rows = np.array(reps, dtype=np.int64).reshape(len(reps), (n - 1) ** 2)
    out = H2Result(dim_z - dim_b, [_unflatten(v, n) for v in reps], dim_z, dim_b, h_rows, B)
    _H2_CACHE[key] = out
    return out


def is_cocycle(G: GroupTable, theta: np.ndarray, ell: int) -> bool:
    t = G.table
    th = np.asarray(theta) % ell
    lhs = th[:, :, None] + th[t][:, :, :]  # theta(g,h) + theta(gh,k)
    rhs = th[None, :, :] + th[:, t]  # theta(h,k) + theta(g,hk)
    return not np.any((lhs - rhs) % ell)


def is_coboundary(G: GroupTable, theta: np.ndarray, ell: int) -> bool:
    D = _coboundary_matrix(G)
    return linalg.solve(D, _flatten(theta) % ell, ell) is not None


@dataclass
class CocycleClass:
    theta: np.ndarray
    is_coboundary: bool
    h2_coordinates: np.ndarray | None
    kernel_generator: int


@dataclass
class ExtensionClass:
    cocycle: CocycleClass
    is_split: bool
    complement: frozenset[int] | None


def _kernel_of(pi: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, x in enumerate(pi) if x == 0)


def find_complement(Gt: GroupTable, G: GroupTable, pi: Sequence[int]) -> frozenset[int] | None:
    """A subgroup of Gt mapping isomorphically onto G, by trying all lifts of a generating set."""
    gens: list[int] = []
    span = frozenset({0})
    for g in range(1, G.order):
        if g not in span:
            gens.append(g)
            span = generate(G, gens)
    fibres = [[x for x in range(Gt.order) if pi[x] == g] for g in gens]
    for lifts in itertools.product(*fibres):
        H = generate(Gt, lifts)
        if len(H) == G.order:
            return H
    return None


def extension_class(Gt: GroupTable, G: GroupTable, pi: Sequence[int], ell: int) -> ExtensionClass:
    """Class in H^2(G, Z/ell) of a central extension Gt -> G with kernel of order ell.

    Uses the section eta(g) = least preimage; the split verdict from the
    coboundary test must agree with a direct complement search.
    """
    _check_surjective_hom(Gt, G, pi)
    K = _kernel_of(pi)
    if len(K) != ell:
        raise PreconditionError(f"kernel has order {len(K)}, expected {ell}")
    Z = center(Gt)
    if not K <= Z:
        raise PreconditionError("kernel is not central")
    z = min(K - {0})
    zpow = {}
    x = 0
    for k in range(ell):
        zpow[x] = k
        x = Gt.mul(x, z)
    n = G.order
    eta = [min(x for x in range(Gt.order) if pi[x] == g) for g in range(n)]
    inv = Gt.inverses
    theta = np.zeros((n, n), dtype=np.int64)
    for g in range(n):
        for h in range(n):
            val = Gt.mul(Gt.mul(eta[g], eta[h]), int(inv[eta[G.mul(g, h)]]))
            theta[g, h] = zpow[val]
    if not is_cocycle(G, theta, ell):
        raise LawViolationError("extension produced a non-cocycle")
    cob = is_coboundary(G, theta, ell)
    coords = None
    if n <= H2_MAX_ORDER:
        coords = h2_dimension(G, ell).coordinates(theta, ell)
    comp = find_complement(Gt, G, pi)
    if cob != (comp is not None):
        raise LawViolationError("coboundary test and complement search disagree")
    return ExtensionClass(CocycleClass(theta, cob, coords, z), cob, comp)
