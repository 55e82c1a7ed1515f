"""Abelian ell-extensions of Q presented by groups of prime-conductor characters.

A character is a finite sum of components (q, k, e): the canonical order-ell^k
character of conductor q (see ``modarith.residue_index``) raised to the e-th
power. Evaluated at a unit a it gives  sum_q e_q * ind_q(a) / ell^k_q  in Q/Z.
Fields are never given by polynomials; every predicate reduces to such
evaluations.

Inertial degree at a ramified prime p: the inertia field at p is cut out by the
characters of the group with no p-component, so f(p) is the order of Frob_p
acting on that subgroup, i.e. the largest order of chi(p) over those chi.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .errors import DegenerateTwistError, InvalidInputError, PreconditionError, ResourceLimitError
from .modarith import is_prime, residue_index

MAX_GROUP_ORDER = 200_000

# conductor -> (k, e) with ell not dividing e; absent conductor means trivial component
Components = tuple[tuple[int, int, int], ...]


def _normalize(ell: int, comps: Iterable[tuple[int, int, int]]) -> Components:
    out = {}
    for q, k, e in comps:
        e %= ell**k
        while e and e % ell == 0:
            e //= ell
            k -= 1
        if e == 0:
            continue
        if q in out:
            raise InvalidInputError(f"conductor {q} repeated in one character")
        if (q - 1) % ell**k:
            raise InvalidInputError(f"conductor {q} is not 1 mod {ell}^{k}")
        out[q] = (k, e)
    return tuple((q, k, e) for q, (k, e) in sorted(out.items()))


@dataclass(frozen=True)
class CyclicCharacter:
    """(canonical order-ell^k character of conductor q) ** exponent."""

    conductor: int
    ell: int
    k: int = 1
    exponent: int = 1

    def __post_init__(self):
        if not is_prime(self.conductor):
            raise InvalidInputError(f"conductor {self.conductor} is not prime")
        if (self.conductor - 1) % self.order:
            raise InvalidInputError(f"{self.conductor} is not 1 mod {self.order}")

    @property
    def order(self) -> int:
        return self.ell**self.k

    def __call__(self, a: int) -> int:
        return self.exponent * residue_index(a, self.conductor, self.order) % self.order


@dataclass(frozen=True)
class Character:
    """A product of cyclic characters with pairwise distinct prime conductors."""

    ell: int
    components: Components = ()

    @classmethod
    def make(cls, ell: int, comps: Iterable[tuple[int, int, int]]) -> "Character":
        return cls(ell, _normalize(ell, comps))

    @classmethod
    def from_coefficients(cls, ell: int, coeffs: Mapping[int, int]) -> "Character":
        return cls.make(ell, ((q, 1, c) for q, c in coeffs.items()))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _, _ in self.components)

    @property
    def is_trivial(self) -> bool:
        return not self.components

    def value(self, a: int) -> Fraction:
        """chi(a) as an element of Q/Z, represented in [0, 1)."""
        total = Fraction(0)
        for q, k, e in self.components:
            if a % q == 0:
                raise PreconditionError(f"{a} is divisible by the conductor {q}")
            total += Fraction(e * residue_index(a, q, self.ell**k), self.ell**k)
        return total % 1

    def conductor(self) -> int:
        out = 1
        for q in self.support:
            out *= q
        return out

    def __mul__(self, other: "Character") -> "Character":
        if self.ell != other.ell:
            raise InvalidInputError("characters for different ell")
        return Character.make(self.ell, _add_components(self.ell, self.components, other.components))

    def __pow__(self, n: int) -> "Character":
        return Character.make(self.ell, ((q, k, e * n) for q, k, e in self.components))

    def inverse(self) -> "Character":
        return self ** -1

    def text(self) -> str:
        if not self.components:
            return "1"
        parts = []
        for q, k, e in self.components:
            parts.append(f"{q}^{e}" if k == 1 else f"{q}^{e}:{self.ell**k}")
        return "*".join(parts)


def _add_components(ell, a: Components, b: Components):
    da = {q: (k, e) for q, k, e in a}
    db = {q: (k, e) for q, k, e in b}
    out = []
    for q in sorted(set(da) | set(db)):
        ka, ea = da.get(q, (0, 0))
        kb, eb = db.get(q, (0, 0))
        k = max(ka, kb)
        out.append((q, k, ea * ell ** (k - ka) + eb * ell ** (k - kb)))
    return out


@dataclass(frozen=True)
class AbelianFieldDesc:
    """Abelian ell-extension of Q cut out by the group generated by ``generators``.

    ``twist_index`` marks the generator that ``twist`` modifies (the top
    Z/ell layer of a tower). The empty generator list describes Q.
    """

    ell: int
    generators: tuple[Character, ...] = ()
    twist_index: int | None = None

    def __post_init__(self):
        if not is_prime(self.ell):
            raise InvalidInputError(f"ell={self.ell} is not prime")
        for g in self.generators:
            if g.ell != self.ell:
                raise InvalidInputError("generator built for a different ell")
        if self.twist_index is not None and not 0 <= self.twist_index < len(self.generators):
            raise InvalidInputError("twist_index out of range")

    @classmethod
    def rationals(cls, ell: int, *, twistable: bool = False) -> "AbelianFieldDesc":
        if twistable:
            return cls(ell, (Character(ell),), 0)
        return cls(ell)

    @classmethod
    def cyclic(cls, ell: int, q: int, k: int = 1) -> "AbelianFieldDesc":
        """The degree-ell^k subfield L^q of Q(mu_q)."""
        return cls(ell, (Character.make(ell, [(q, k, 1)]),), 0)

    @classmethod
    def compositum(cls, *descs: "AbelianFieldDesc") -> "AbelianFieldDesc":
        ell = descs[0].ell
        gens = tuple(g for d in descs for g in d.generators)
        return cls(ell, gens)

    # group structure ----------------------------------------------------------------

    @cached_property
    def _levels(self) -> dict[int, int]:
        levels: dict[int, int] = {}
        for g in self.generators:
            for q, k, _ in g.components:
                levels[q] = max(levels.get(q, 0), k)
        return levels

    def _vector(self, ch: Character) -> tuple[int, ...]:
        comps = {q: (k, e) for q, k, e in ch.components}
        vec = []
        for q, top in sorted(self._levels.items()):
            k, e = comps.get(q, (top, 0))
            vec.append(e * self.ell ** (top - k) % self.ell**top)
        return tuple(vec)

    def _character(self, vec: tuple[int, ...]) -> Character:
        return Character.make(
            self.ell, ((q, top, v) for (q, top), v in zip(sorted(self._levels.items()), vec))
        )

    @cached_property
    def _elements(self) -> frozenset[tuple[int, ...]]:
        mods = [self.ell**k for _, k in sorted(self._levels.items())]
        zero = tuple(0 for _ in mods)
        elems = {zero}
        for g in self.generators:
            v = self._vector(g)
            if v in elems:
                continue
            # adjoin the cyclic group <v> to the current subgroup
            new = set(elems)
            layer = set(elems)
            while True:
                layer = {tuple((a + b) % m for a, b, m in zip(x, v, mods)) for x in layer}
                if layer <= new:
                    break
                new |= layer
                if len(new) > MAX_GROUP_ORDER:
                    raise ResourceLimitError(f"character group larger than {MAX_GROUP_ORDER}")
            elems = new
        return frozenset(elems)

    def characters(self) -> list[Character]:
        """Every character of the group, trivial one first."""
        return sorted((self._character(v) for v in self._elements), key=lambda c: (len(c.components), c.components))

    @property
    def degree(self) -> int:
        return len(self._elements)

    @property
    def is_rationals(self) -> bool:
        return self.degree == 1

    def invariant_factors(self) -> tuple[int, ...]:
        """Cyclic factor orders ell^k (descending) of the character group."""
        ell = self.ell
        orders = []
        for v in self._elements:
            ch = self._character(v)
            orders.append(max((ell**k for _, k, _ in ch.components), default=1))
        top = max(orders)
        counts = []  # |G[ell^j]| for j = 0..
        j = 0
        while ell**j <= top:
            counts.append(sum(1 for o in orders if (ell**j) % o == 0))
            j += 1
        # number of factors of order >= ell^j is log_ell(|G[ell^j]| / |G[ell^(j-1)]|)
        ge = [0] + [_ilog(counts[j] // counts[j - 1], ell) for j in range(1, len(counts))]
        factors = []
        for j in range(len(ge) - 1, 0, -1):
            above = ge[j + 1] if j + 1 < len(ge) else 0
            factors += [ell**j] * (ge[j] - above)
        return tuple(factors)

    def same_field(self, other: "AbelianFieldDesc") -> bool:
        return set(map(_key, self.characters())) == set(map(_key, other.characters()))

    # serialization ----------------------------------------------------------------

    def text(self) -> str:
        parts = [f"ell={self.ell}"] + [f"gen: {g.text()}" for g in self.generators]
        if self.twist_index is not None:
            parts.append(f"twist: {self.twist_index}")
        return "; ".join(parts)

    __str__ = text

    @classmethod
    def parse(cls, text: str) -> "AbelianFieldDesc":
        fields_ = [f.strip() for f in text.strip().split(";") if f.strip()]
        if not fields_ or not fields_[0].startswith("ell="):
            raise InvalidInputError(f"descriptor must start with 'ell=': {text!r}")
        ell = int(fields_[0][4:])
        gens: list[Character] = []
        twist = None
        for f in fields_[1:]:
            tag, _, body = f.partition(":")
            tag, body = tag.strip(), body.strip()
            if tag == "gen":
                gens.append(_parse_character(ell, body))
            elif tag == "twist":
                twist = int(body)
            else:
                raise InvalidInputError(f"unknown descriptor field {tag!r}")
        return cls(ell, tuple(gens), twist)


_COMP_RE = re.compile(r"^(\d+)\^(-?\d+)(?::(\d+))?$")


def _parse_character(ell: int, body: str) -> Character:
    if body == "1":
        return Character(ell)
    comps = []
    for term in body.split("*"):
        m = _COMP_RE.match(term.strip())
        if not m:
            raise InvalidInputError(f"bad character component {term!r}")
        q, e, order = int(m[1]), int(m[2]), int(m[3] or ell)
        k = _ilog(order, ell)
        if ell**k != order:
            raise InvalidInputError(f"order {order} is not a power of {ell}")
        comps.append((q, k, e))
    for q in {c[0] for c in comps}:
        if not is_prime(q):
            raise InvalidInputError(f"conductor {q} is not prime")
    return Character.make(ell, comps)


def _ilog(n: int, b: int) -> int:
    k = 0
    while n > 1:
        n //= b
        k += 1
    return k


def _key(ch: Character):
    return ch.components


# --- operations ---------------------------------------------------------------------


def splits_completely(desc: AbelianFieldDesc, r: int) -> bool:
    """Frob_r is trivial on every generator (r must be unramified)."""
    ram = ramified_primes(desc)
    if r in ram:
        raise PreconditionError(f"{r} is ramified in {desc.text()}; use inertial_degree")
    return all(g.value(r) == 0 for g in desc.generators)


def ramified_primes(desc: AbelianFieldDesc) -> tuple[int, ...]:
    return tuple(sorted({q for g in desc.generators for q in g.support}))


def inertial_degree(desc: AbelianFieldDesc, p: int) -> int:
    if p not in ramified_primes(desc):
        raise PreconditionError(f"{p} is unramified in {desc.text()}; use splits_completely")
    f = 1
    for ch in desc.characters():
        if p in ch.support:
            continue
        f = max(f, ch.value(p).denominator)
    return f


def discriminant_abs(desc: AbelianFieldDesc) -> int:
    """Conductor-discriminant formula: product of the conductors of all characters."""
    out = 1
    for ch in desc.characters():
        out *= ch.conductor()
    return out


@dataclass
class ScholzReport:
    N: int
    holds: bool
    failures: list[dict] = field(default_factory=list)


def scholz_check(desc: AbelianFieldDesc, N: int) -> ScholzReport:
    """Every ramified p is 1 mod ell^N and totally ramified (inertial degree 1)."""
    failures = []
    for p in ramified_primes(desc):
        if (p - 1) % desc.ell**N:
            failures.append({"prime": p, "clause": f"p = 1 mod {desc.ell}^{N}"})
        f = inertial_degree(desc, p)
        if f != 1:
            failures.append({"prime": p, "clause": "totally ramified", "inertial_degree": f})
    return ScholzReport(N, not failures, failures)


def character_field(ell: int, coeffs: Mapping[int, int]) -> AbelianFieldDesc:
    """Degree-ell field cut out by sum_q c_q chi^(q); Q for empty support."""
    for q in coeffs:
        if (q - 1) % ell:
            raise PreconditionError(f"{q} is not 1 mod {ell}")
    ch = Character.from_coefficients(ell, coeffs)
    if ch.is_trivial:
        return AbelianFieldDesc.rationals(ell)
    return AbelianFieldDesc(ell, (ch,), 0)


def twist(desc: AbelianFieldDesc, f: Character) -> AbelianFieldDesc:
    """Multiply the marked generator by f; raises if the degree drops."""
    i = desc.twist_index
    if i is None:
        raise PreconditionError("descriptor has no generator marked for twisting")
    gens = list(desc.generators)
    gens[i] = gens[i] * f
    out = AbelianFieldDesc(desc.ell, tuple(gens), i)
    if gens[i].is_trivial or (desc.degree > 1 and out.degree < desc.degree):
        raise DegenerateTwistError(f"twist by {f.text()} collapses {desc.text()}")
    return out
