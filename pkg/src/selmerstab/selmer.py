"""Selmer dimension calculus for C = Z/ell and its cyclotomic dual, over Q.

Global classes are modelled explicitly. Homomorphisms G_Q -> Z/ell
unramified outside a finite set are combinations of the canonical characters
chi^(q), q = 1 mod ell (plus the character of conductor ell^2, which the zero
condition at ell always kills). Classes in H^1(Q, mu_ell) are rationals
prod v^{e_v} modulo ell-th powers, since Q has trivial class group and -1 is
an ell-th power for odd ell. Both models are assumed complete, not verified.

Three local conditions are supported: free (all of H^1), zero, and
unramified. Free primes must be 1 mod ell; ell itself must carry the zero or
unramified condition.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
import sympy

from . import linalg
from .curve import CurveQ, ell_torsion_trivial, trace_of_frobenius
from .errors import (
    InvalidInputError,
    LawViolationError,
    PreconditionError,
    ResourceLimitError,
    SpecConsistencyError,
)
from .fields import (
    AbelianFieldDesc,
    character_field,
    inertial_degree,
    ramified_primes,
    splits_completely,
)
from .modarith import is_prime, residue_index

log = logging.getLogger(__name__)

TRIVIAL = "trivial"
DUAL = "dual"
INFINITY = "infinity"

W_T_CAP = 1_000_000


@dataclass(frozen=True)
class SelmerSpec:
    ell: int
    S: tuple[int, ...]
    Z_part: tuple[int, ...]
    nr: tuple[int, ...] = ()
    coefficient: str = TRIVIAL

    def __post_init__(self):
        for name in ("S", "Z_part", "nr"):
            object.__setattr__(self, name, tuple(sorted(set(getattr(self, name)))))
        ell = self.ell
        if not is_prime(ell) or ell == 2:
            raise InvalidInputError(f"ell={ell} must be an odd prime")
        if self.coefficient not in (TRIVIAL, DUAL):
            raise InvalidInputError(f"unknown coefficient {self.coefficient!r}")
        S, Z, nr = set(self.S), set(self.Z_part), set(self.nr)
        if S & Z or S & nr or Z & nr:
            raise SpecConsistencyError("S, Z_part and nr must be pairwise disjoint")
        for q in S | Z | nr:
            if not is_prime(q):
                raise InvalidInputError(f"{q} is not prime")
        bad = [q for q in S if (q - 1) % ell]
        if bad:
            raise SpecConsistencyError(f"free primes {bad} are not 1 mod {ell}")
        if ell not in Z | nr:
            raise SpecConsistencyError(f"ell={ell} must carry the zero or unramified condition")

    @property
    def support(self) -> tuple[int, ...]:
        """S-tilde: every declared prime."""
        return tuple(sorted(set(self.S) | set(self.Z_part) | set(self.nr)))

    def with_S(self, S: Iterable[int]) -> "SelmerSpec":
        return SelmerSpec(self.ell, tuple(S), self.Z_part, self.nr, self.coefficient)


@dataclass(frozen=True)
class CharacterVector:
    """f = sum c_q chi^(q); zero coefficients are dropped."""

    ell: int
    coefficients: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, ell: int, coeffs: Mapping[int, int]) -> "CharacterVector":
        return cls(ell, tuple(sorted((q, c % ell) for q, c in coeffs.items() if c % ell)))

    @property
    def ramified(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.coefficients)

    def as_dict(self) -> dict[int, int]:
        return dict(self.coefficients)

    def field(self) -> AbelianFieldDesc:
        return character_field(self.ell, self.as_dict())


@dataclass(frozen=True)
class KummerVector:
    """b = prod v^{e_v} modulo ell-th powers."""

    ell: int
    exponents: tuple[tuple[int, int], ...]

    @classmethod
    def make(cls, ell: int, exps: Mapping[int, int]) -> "KummerVector":
        return cls(ell, tuple(sorted((v, e % ell) for v, e in exps.items() if e % ell)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.exponents)

    def index_at(self, q: int) -> int:
        """Value at Frob_q of the Kummer character of b (q must not divide b)."""
        return sum(e * residue_index(v, q, self.ell) for v, e in self.exponents) % self.ell


# --- local dimensions ---------------------------------------------------------------


def local_h0_dim(q, coefficient: str, ell: int) -> int:
    if coefficient == TRIVIAL:
        return 1
    if coefficient != DUAL:
        raise InvalidInputError(f"unknown coefficient {coefficient!r}")
    if q == INFINITY or q == ell:
        return 0
    return 1 if (q - 1) % ell == 0 else 0


def local_h1_dim(q: int, coefficient: str, ell: int) -> int:
    """Local Euler characteristic: h1 = h0 + h2 + [q = ell], with h2 = h0 of the dual."""
    if q == INFINITY:
        raise PreconditionError("local_h1_dim needs a finite prime")
    other = DUAL if coefficient == TRIVIAL else TRIVIAL
    return local_h0_dim(q, coefficient, ell) + local_h0_dim(q, other, ell) + (1 if q == ell else 0)


def wiles_difference(spec: SelmerSpec) -> int:
    """h0(Q,C) - h0(Q,C*) + sum over declared places of (dim L_v - h0(Q_v, C)).

    The condition at infinity is zero; free primes contribute h1 - h0, zero
    primes -h0, unramified primes nothing.
    """
    C = spec.coefficient
    dual = DUAL if C == TRIVIAL else TRIVIAL
    total = (1 if C == TRIVIAL else 0) - (1 if dual == TRIVIAL else 0)
    for q in spec.S:
        total += local_h1_dim(q, C, spec.ell) - local_h0_dim(q, C, spec.ell)
    for v in spec.Z_part:
        total -= local_h0_dim(v, C, spec.ell)
    total -= local_h0_dim(INFINITY, C, spec.ell)
    return total


# --- explicit models ----------------------------------------------------------------


def constraint_matrix(spec: SelmerSpec) -> np.ndarray:
    """M[v, q] = ind_q(v): restriction of chi^(q) to the decomposition group at v in Z_part."""
    ell = spec.ell
    M = np.zeros((len(spec.Z_part), len(spec.S)), dtype=np.int64)
    for j, q in enumerate(spec.S):
        for i, v in enumerate(spec.Z_part):
            M[i, j] = residue_index(v, q, ell)
    return M


def vs_dimension(spec: SelmerSpec) -> tuple[int, list[CharacterVector]]:
    """dim V_S = #S - rank M, with a basis read from the kernel of M."""
    if spec.coefficient != TRIVIAL:
        raise PreconditionError("vs_dimension models the trivial coefficient only")
    if not spec.S:
        return 0, []
    M = constraint_matrix(spec)
    ker = linalg.nullspace(M, spec.ell, ncols=len(spec.S))
    basis = [CharacterVector.make(spec.ell, dict(zip(spec.S, map(int, row)))) for row in ker]
    return len(basis), basis


def _kummer_local_index(v: int, q: int, ell: int) -> int:
    # independent of residue_index: sympy primitive root and discrete log
    zeta = pow(sympy.primitive_root(q), (q - 1) // ell, q)
    return int(sympy.discrete_log(q, pow(v, (q - 1) // ell, q), zeta)) % ell


def dual_dimension(spec: SelmerSpec) -> tuple[int, list[KummerVector]]:
    """Kummer classes supported on S-tilde that are locally trivial at every free prime.

    Unknowns are exponents on the whole support. Local triviality at q in S
    means e_q = 0 (valuation) and b an ell-th power mod q. Unramified primes
    force e = 0. Zero-condition primes are unconstrained (the orthogonal of
    the zero condition is everything).
    """
    ell = spec.ell
    cols = spec.support
    pos = {v: i for i, v in enumerate(cols)}
    rows = []
    for q in spec.S + spec.nr:
        r = [0] * len(cols)
        r[pos[q]] = 1
        rows.append(r)
    for q in spec.S:
        r = [0] * len(cols)
        for v in cols:
            if v != q:
                r[pos[v]] = _kummer_local_index(v, q, ell)
        rows.append(r)
    if not cols:
        return 0, []
    ker = linalg.nullspace(np.array(rows, dtype=np.int64).reshape(len(rows), len(cols)), ell, ncols=len(cols))
    basis = [KummerVector.make(ell, dict(zip(cols, map(int, row)))) for row in ker]
    return len(basis), basis


# --- S0 and W_T ---------------------------------------------------------------------


@dataclass
class S0Result:
    S0: tuple[int, ...]
    dual_dimension: int
    complete: bool
    failure: str | None = None
    steps: list[dict] = field(default_factory=list)


def find_S0(curve: CurveQ, ell: int, L_desc: AbelianFieldDesc | None, Z: Iterable[int],
            search_bound: int = 10**6) -> S0Result:
    """Greedily add T_{E,L} primes killing a dual generator until the dual Selmer group vanishes."""
    from .sieve import SearchSpec, TEParams, find_primes

    Z = tuple(sorted(set(Z) | {ell}))
    params = TEParams(curve, ell, L_desc)
    S0: list[int] = []
    steps: list[dict] = []
    while True:
        spec = SelmerSpec(ell, tuple(S0), Z)
        d, basis = dual_dimension(spec)
        if d == 0:
            break
        b = basis[0]
        sspec = SearchSpec(
            in_te=True,
            avoid=frozenset(Z) | frozenset(S0),
            kummer_nonzero=(b.as_dict(),),
        )
        res = find_primes(sspec, params, count=1, bound=search_bound)
        if not res.primes:
            return S0Result(tuple(S0), d, False, f"no prime <= {search_bound} kills {b.as_dict()}", steps)
        q = res.primes[0]
        steps.append({"killed": b.as_dict(), "prime": q, "dual_before": d})
        S0.append(q)
    final = dual_dimension(SelmerSpec(ell, tuple(S0), Z))[0]
    if final != 0:
        raise LawViolationError("find_S0 exit invariant failed")
    return S0Result(tuple(sorted(S0)), 0, True, None, steps)


def _span_elements(basis: list[CharacterVector], ell: int, primes: tuple[int, ...]):
    if not basis:
        yield {}
        return
    rows = np.array([[v.as_dict().get(q, 0) for q in primes] for v in basis], dtype=np.int64)
    for coeffs in itertools.product(range(ell), repeat=len(basis)):
        vec = np.asarray(coeffs, dtype=np.int64) @ rows % ell
        yield dict(zip(primes, map(int, vec)))


def enumerate_W_T(spec: SelmerSpec, T: Iterable[int], cap: int = W_T_CAP) -> set[CharacterVector]:
    """All f in V_{S0 u T} ramified at every prime of T.

    ``spec.S`` is S0. The cardinality law #W_T = (ell-1)^#T * ell^dim V_S0 and
    the surjectivity dim V_{S0 u T} = dim V_S0 + #T are both checked; a
    mismatch raises instead of returning.
    """
    T = tuple(sorted(set(T)))
    ell = spec.ell
    if set(T) & (set(spec.S) | set(spec.Z_part) | set(spec.nr)):
        raise SpecConsistencyError("T must be disjoint from S0 and the conditioned primes")
    d0, _ = vs_dimension(spec)
    predicted = (ell - 1) ** len(T) * ell**d0
    big = spec.with_S(spec.S + T)
    d, basis = vs_dimension(big)
    if d != d0 + len(T):
        raise LawViolationError(f"localization onto T not surjective: dim {d} != {d0} + {len(T)}")
    if ell**d > cap:
        raise ResourceLimitError(f"W_T enumeration needs {ell**d} combinations", predicted=predicted)
    out = set()
    for coeffs in _span_elements(basis, ell, big.S):
        if all(coeffs.get(q, 0) for q in T):
            out.add(CharacterVector.make(ell, coeffs))
    if len(out) != predicted:
        raise LawViolationError(f"#W_T = {len(out)}, expected {predicted}")
    return out


# --- certificates -------------------------------------------------------------------


@dataclass
class Certificate:
    payload: dict

    @property
    def verdict(self) -> str:
        return self.payload["verdict"]

    @property
    def ok(self) -> bool:
        return self.verdict == "certified"

    @property
    def failed_clause(self) -> dict | None:
        for c in self.payload["clauses"]:
            if not c["pass"]:
                return c
        return None

    def to_json(self) -> str:
        return json.dumps(self.payload, sort_keys=True, separators=(",", ":"))


def certify_selmer_vanishing(curve: CurveQ, ell: int, F: AbelianFieldDesc, base_assertion: bool,
                             *, surjectivity_assertion: bool = False) -> Certificate:
    """Check the sufficient conditions for Sel_ell(E/F) = 0 given Sel_ell(E/Q) = 0.

    Clauses: the base assertion; every prime of Sigma splits completely in F;
    every ramified prime has residue degree 1 and trivial ell-torsion on the
    reduction. Every clause is evaluated and recorded, so the certificate
    lists all failures rather than the first one.
    """
    if F.ell != ell:
        raise InvalidInputError("descriptor built for a different ell")
    clauses = [{"name": "i_base_selmer_zero", "prime": None, "witness": "asserted" if base_assertion else "not asserted",
                "pass": bool(base_assertion)}]
    ram = ramified_primes(F)
    for q in curve.sigma(ell):
        if q in ram:
            clauses.append({"name": "ii_sigma_split", "prime": q, "witness": "ramified", "pass": False})
        else:
            ok = splits_completely(F, q)
            clauses.append({"name": "ii_sigma_split", "prime": q,
                            "witness": "frobenius trivial" if ok else "frobenius nontrivial", "pass": ok})
    for p in ram:
        f = inertial_degree(F, p)
        clauses.append({"name": "iii_residue_degree", "prime": p, "witness": f"f={f}", "pass": f == 1})
        if curve.disc % p == 0:
            clauses.append({"name": "iii_torsion_trivial", "prime": p, "witness": "bad reduction", "pass": False})
            continue
        n = p + 1 - trace_of_frobenius(curve, p)
        clauses.append({"name": "iii_torsion_trivial", "prime": p, "witness": f"#E(F_p)={n}",
                        "pass": ell_torsion_trivial(curve, p, ell)})
    verdict = "certified" if all(c["pass"] for c in clauses) else "rejected"
    payload = {
        "curve": curve.key,
        "ell": ell,
        "field_descriptor": F.text(),
        "clauses": clauses,
        "verdict": verdict,
        "hypotheses": {"selmer_zero_over_Q": bool(base_assertion), "surjective": bool(surjectivity_assertion)},
    }
    return Certificate(payload)

