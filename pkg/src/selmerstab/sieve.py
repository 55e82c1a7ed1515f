"""Prime-set membership for T_{E,K}, empirical densities and Chebotarev-style searches.

Condition (c), "completely split in K(mu_ell)", is evaluated as
p = 1 mod ell together with splitting in K: for the ell-power fields handled
here, K and Q(mu_ell) are linearly disjoint. Density formulas further assume
K(mu_ell) meets Q(E[ell]) only in Q(mu_ell), which holds when the mod-ell
image is surjective and ell >= 5; this is not verified, only flagged.
"""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .curve import CurveQ, ApCache, has_good_reduction, trace_of_frobenius
from .errors import InvalidInputError, SpecConsistencyError
from .fields import AbelianFieldDesc, ramified_primes, splits_completely
from .modarith import is_prime, residue_index, sieve_primes

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TEParams:
    curve: CurveQ
    ell: int
    base: AbelianFieldDesc | None = None
    theorem_mode: bool = False
    cache: ApCache | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if not is_prime(self.ell):
            raise InvalidInputError(f"ell={self.ell} is not prime")
        if self.theorem_mode and self.ell < 5:
            raise InvalidInputError("theorem mode requires ell >= 5")
        if self.base is None:
            object.__setattr__(self, "base", AbelianFieldDesc.rationals(self.ell))
        elif self.base.ell != self.ell:
            raise InvalidInputError("base field descriptor built for a different ell")

    @property
    def sigma(self) -> tuple[int, ...]:
        return self.curve.sigma(self.ell)


CLAUSES = ("a_p_ne_ell", "b_good_reduction", "c_split", "d_trace_ne_2")


@dataclass
class Membership:
    """Clause-by-clause result; clauses after the first failure are None (not evaluated)."""

    p: int
    clauses: dict[str, bool | None]
    ap: int | None = None

    @property
    def member(self) -> bool:
        return all(self.clauses.values())

    @property
    def failed(self) -> str | None:
        for name in CLAUSES:
            if self.clauses.get(name) is False:
                return name
        return None

    def __bool__(self) -> bool:
        return self.member


def _split_clause(p: int, params: TEParams) -> bool:
    if (p - 1) % params.ell:
        return False
    base = params.base
    if p in ramified_primes(base):
        return False
    return splits_completely(base, p)


def in_TE(p: int, params: TEParams) -> Membership:
    """Membership of the prime p in T_{E,K}, cheapest clauses first."""
    clauses: dict[str, bool | None] = dict.fromkeys(CLAUSES)
    m = Membership(p, clauses)
    clauses["a_p_ne_ell"] = p != params.ell
    if not clauses["a_p_ne_ell"]:
        return m
    clauses["b_good_reduction"] = has_good_reduction(params.curve, p)
    if not clauses["b_good_reduction"]:
        return m
    clauses["c_split"] = _split_clause(p, params)
    if not clauses["c_split"]:
        return m
    m.ap = trace_of_frobenius(params.curve, p, params.cache)
    clauses["d_trace_ne_2"] = (m.ap - 2) % params.ell != 0
    return m


def te_primes(params: TEParams, bound: int, *, lower: int = 2) -> list[int]:
    return [p for p in sieve_primes(bound) if p >= lower and in_TE(p, params)]


def theoretical_density(ell: int, base_degree: int = 1, n: int = 1) -> Fraction:
    """(ell^2 - ell - 1) / ([K(mu_ell):Q(mu_ell)] (ell^2 - 1)(ell - 1))."""
    return Fraction(ell * ell - ell - 1, base_degree * (ell * ell - 1) * (ell - 1))


@dataclass
class DensityReport:
    count: int
    total: int
    estimate: float
    theoretical: Fraction
    bound: int
    surjectivity: str | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["theoretical"] = f"{self.theoretical.numerator}/{self.theoretical.denominator}"
        return d


def _count_chunk(args) -> int:
    params, primes = args
    return sum(1 for p in primes if in_TE(p, params))


def empirical_density(params: TEParams, bound: int, *, workers: int = 1, check_surjectivity: bool = True) -> DensityReport:
    """Fraction of primes <= bound lying in T_{E,K}, next to the predicted density."""
    verdict = None
    if check_surjectivity:
        rep = surjectivity_heuristic(params.curve, params.ell, min(max(bound, 100), 20_000))
        verdict = rep.verdict if rep.kind is None else f"{rep.verdict}({rep.kind})"
        if rep.verdict != "no-obstruction":
            warnings.warn(f"surjectivity heuristic: {verdict}; density formula may not apply", stacklevel=2)
    primes = sieve_primes(bound)
    if workers > 1:
        chunks = [primes[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            count = sum(ex.map(_count_chunk, [(_detach(params), c) for c in chunks]))
    else:
        count = _count_chunk((params, primes))
    total = len(primes)
    return DensityReport(
        count, total, count / total if total else 0.0,
        theoretical_density(params.ell, params.base.degree), bound, verdict,
    )


def _detach(params: TEParams) -> TEParams:
    # file caches are single-writer; workers get none
    return TEParams(params.curve, params.ell, params.base, params.theorem_mode)


# --- searches -----------------------------------------------------------------------


@dataclass(frozen=True)
class SearchSpec:
    """Conjunction of prime conditions.

    ``symbol_targets`` pairs (v, c) require ind_p(v) = c for the canonical
    order-ell character of conductor p. ``kummer_nonzero`` holds exponent maps
    {v: e_v}; each requires sum_v e_v ind_p(v) != 0 (p is inert in the
    corresponding Kummer extension of Q(mu_ell)). ``candidates`` restricts the
    scan to an explicit set.
    """

    N: int = 1
    in_te: bool = False
    avoid: frozenset[int] = frozenset()
    split_in: tuple[AbelianFieldDesc, ...] = ()
    symbol_targets: tuple[tuple[int, int], ...] = ()
    kummer_nonzero: tuple[Mapping[int, int], ...] = ()
    candidates: tuple[int, ...] | None = None


@dataclass
class SearchResult:
    primes: list[int]
    scanned: int
    hits: int
    hit_rate: float
    reference_density: Fraction
    exhausted: bool
    bound: int

    @property
    def found(self) -> bool:
        return bool(self.primes)


def check_spec(spec: SearchSpec, ell: int) -> None:
    if spec.N < 0:
        raise SpecConsistencyError("N must be nonnegative")
    for v, c in spec.symbol_targets:
        if not is_prime(v):
            raise SpecConsistencyError(f"symbol target {v} is not prime")
        if not 0 <= c < ell:
            raise SpecConsistencyError(f"target value {c} not in Z/{ell}")
    if spec.candidates is not None:
        mod = ell ** max(spec.N, 1 if spec.in_te else 0)
        ok = [p for p in spec.candidates if p not in spec.avoid and (p - 1) % mod == 0]
        if not ok:
            raise SpecConsistencyError(f"no candidate in {sorted(spec.candidates)} can be 1 mod {mod}")
    for d in spec.split_in:
        if d.ell != ell:
            raise SpecConsistencyError("split_in descriptor built for a different ell")


def reference_density(spec: SearchSpec, ell: int) -> Fraction:
    """1 / [L(mu_{ell^N}, v^(1/ell) ...) : Q], assuming the pieces are linearly disjoint.

    The trace clause of T_E contributes (ell^2-ell-1)/(ell^2-1) when requested.
    """
    N = max(spec.N, 1 if spec.in_te else 0)
    degree = (ell - 1) * ell ** (N - 1) if N else 1
    if spec.split_in:
        degree *= AbelianFieldDesc.compositum(*spec.split_in).degree
    kummer = {v for v, _ in spec.symbol_targets}
    degree *= ell ** len(kummer)
    dens = Fraction(1, degree)
    if spec.kummer_nonzero:
        dens *= Fraction(ell - 1, ell) ** len(spec.kummer_nonzero)
    if spec.in_te:
        dens *= Fraction(ell * ell - ell - 1, ell * ell - 1)
    return dens


def _matches(p: int, spec: SearchSpec, params: TEParams, mod: int) -> bool:
    if p in spec.avoid or (p - 1) % mod:
        return False
    ell = params.ell
    for v, c in spec.symbol_targets:
        if v == p or residue_index(v, p, ell) != c:
            return False
    for vec in spec.kummer_nonzero:
        if p in vec:
            return False
        if sum(e * residue_index(v, p, ell) for v, e in vec.items()) % ell == 0:
            return False
    for d in spec.split_in:
        if p in ramified_primes(d) or not splits_completely(d, p):
            return False
    if spec.in_te and not in_TE(p, params):
        return False
    return True


def iter_primes(spec: SearchSpec, params: TEParams, bound: int) -> Iterator[int]:
    check_spec(spec, params.ell)
    mod = params.ell ** max(spec.N, 1 if spec.in_te else 0)
    pool = sieve_primes(bound) if spec.candidates is None else sorted(p for p in spec.candidates if p <= bound)
    for p in pool:
        if _matches(p, spec, params, mod):
            yield p


def find_primes(spec: SearchSpec, params: TEParams, *, count: int | None = None, bound: int = 10**6) -> SearchResult:
    """Ascending primes <= bound satisfying every clause, stopping after ``count`` hits.

    Running out of range with no hit is reported as ``exhausted`` and never
    taken as evidence that the set is empty.
    """
    check_spec(spec, params.ell)
    mod = params.ell ** max(spec.N, 1 if spec.in_te else 0)
    pool = sieve_primes(bound) if spec.candidates is None else sorted(p for p in spec.candidates if p <= bound)
    hits: list[int] = []
    scanned = 0
    for p in pool:
        scanned += 1
        if _matches(p, spec, params, mod):
            hits.append(p)
            if count is not None and len(hits) >= count:
                break
    exhausted = count is not None and len(hits) < count
    return SearchResult(hits, scanned, len(hits), len(hits) / scanned if scanned else 0.0,
                        reference_density(spec, params.ell), exhausted, bound)


# --- surjectivity heuristic ---------------------------------------------------------


@dataclass
class SurjectivityReport:
    verdict: str  # "no-obstruction" | "obstruction" | "inconclusive"
    kind: str | None
    witnesses: dict[str, tuple[int, int] | None]
    sampled: int


def _is_square_mod(x: int, ell: int) -> bool:
    x %= ell
    return x == 0 or pow(x, (ell - 1) // 2, ell) == 1


def surjectivity_heuristic(curve: CurveQ, ell: int, bound: int) -> SurjectivityReport:
    """Scan Frobenius characteristic polynomials x^2 - a_p x + p mod ell.

    Reports "Borel" when every sampled polynomial is reducible, and
    "small-image" when the witness checklist (nonzero-square discriminant,
    nonsquare discriminant, nonzero trace with zero discriminant) is
    incomplete. Absence of an obstruction is not a proof of surjectivity.
    """
    witnesses: dict[str, tuple[int, int] | None] = {"square": None, "nonsquare": None, "zero_disc": None}
    if bound < 100:
        return SurjectivityReport("inconclusive", None, witnesses, 0)
    all_reducible = True
    sampled = 0
    for p in sieve_primes(bound):
        if p == ell or not has_good_reduction(curve, p):
            continue
        ap = trace_of_frobenius(curve, p)
        sampled += 1
        d = (ap * ap - 4 * p) % ell
        if d == 0:
            if ap % ell and witnesses["zero_disc"] is None:
                witnesses["zero_disc"] = (p, ap)
        elif _is_square_mod(d, ell):
            witnesses["square"] = witnesses["square"] or (p, ap)
        else:
            all_reducible = False
            witnesses["nonsquare"] = witnesses["nonsquare"] or (p, ap)
        if all(witnesses.values()):
            break
    if all_reducible:
        return SurjectivityReport("obstruction", "Borel", witnesses, sampled)
    if not all(witnesses.values()):
        return SurjectivityReport("obstruction", "small-image", witnesses, sampled)
    return SurjectivityReport("no-obstruction", None, witnesses, sampled)
