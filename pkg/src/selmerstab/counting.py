"""Dirichlet coefficients, partial sums and lower-bound counts of Selmer-stable extensions.

The generating series is prod_q (1 + (ell-1) q^-s) over a pool of admissible
primes. Convergence of the exponent fit to its asymptotic values is
logarithmically slow; the fit is a diagnostic, never a proof of the growth rate.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy import integer_nthroot

from .errors import InvalidInputError, PreconditionError, ResourceLimitError
from .fields import discriminant_abs
from .modarith import is_prime

DFS_CAP = 10_000_000


@dataclass(frozen=True)
class PrimePool:
    primes: tuple[int, ...]
    ell: int
    provenance: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ps = tuple(self.primes)
        object.__setattr__(self, "primes", ps)
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise InvalidInputError("pool must be strictly ascending")
        excluded = set(self.provenance.get("Z", ()))
        if excluded & set(ps):
            raise InvalidInputError("pool meets the excluded set Z")


def delta(ell: int, n: int = 1) -> Fraction:
    return Fraction(ell * ell - ell - 1, ell ** (n - 1) * (ell * ell - 1))


def malle_a(ell: int, n: int = 1) -> Fraction:
    return Fraction(1, ell ** (n - 1) * (ell - 1))


@dataclass
class CountReport:
    X: int
    value: int
    exponent_target: Fraction
    delta: Fraction
    fit: tuple[float, float, float] | None = None
    conditional_on_c2: bool = False
    threshold: int | None = None

    def to_json(self) -> dict:
        return {
            "X": self.X,
            "value": self.value,
            "exponent_target": _q(self.exponent_target),
            "delta": _q(self.delta),
            "conditional_on_c2": self.conditional_on_c2,
            "threshold": self.threshold,
        }


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def dirichlet_coefficient(pool: PrimePool, n: int) -> int:
    """(ell-1)^omega(n) for squarefree n built from pool primes, else 0."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    r = 0
    for q in pool.primes:
        if q > n:
            break
        if n % q == 0:
            n //= q
            if n % q == 0:
                return 0
            r += 1
    return (pool.ell - 1) ** r if n == 1 else 0


def partial_sum(pool: PrimePool, X: int, *, cap: int = DFS_CAP) -> int:
    """S(X) = sum_{n <= X} a_n by depth-first search over ascending prime products."""
    if X < 1:
        raise InvalidInputError("X must be >= 1")
    w = pool.ell - 1
    primes = pool.primes
    total = 0
    nodes = 0
    # stack of (next index, product, weight)
    stack = [(0, 1, 1)]
    while stack:
        i, prod, weight = stack.pop()
        total += weight
        nodes += 1
        if nodes > cap:
            raise ResourceLimitError(f"partial_sum exceeded {cap} nodes", partial=total)
        for j in range(i, len(primes)):
            nxt = prod * primes[j]
            if nxt > X:
                break
            stack.append((j + 1, nxt, weight * w))
    return total


def admissible_sets(pool: PrimePool, bound: int) -> Iterable[tuple[int, ...]]:
    """Subsets T of the pool with prod T <= bound, in deterministic DFS order."""
    primes = pool.primes

    def rec(i, prod, chosen):
        yield tuple(chosen)
        for j in range(i, len(primes)):
            nxt = prod * primes[j]
            if nxt > bound:
                break
            chosen.append(primes[j])
            yield from rec(j + 1, nxt, chosen)
            chosen.pop()

    yield from rec(0, 1, [])


def product_threshold(X: int, n: int, ell: int, S0: Sequence[int], c2: Fraction | int = 1) -> int:
    """Largest integer m with c2 (m prod S0)^(ell^(n-1)(ell-1)) <= X, i.e. floor(c3 X^a)."""
    c2 = Fraction(c2)
    if c2 <= 0:
        raise PreconditionError("c2 must be positive")
    k = ell ** (n - 1) * (ell - 1)
    y = math.floor(Fraction(X) / c2)
    if y < 1:
        return 0
    root, _ = integer_nthroot(y, k)
    return int(root) // math.prod(S0)


@dataclass
class S0Data:
    """Data of the twisting family: S0, its Selmer dimension and the conditioned primes."""

    S0: tuple[int, ...]
    dim_V: int
    spec: object | None = None  # SelmerSpec, needed for the true-discriminant census


def count_lower_bound_M(pool: PrimePool, s0: S0Data, X: int, n: int, ell: int,
                        c2: Fraction | int | None = None) -> CountReport:
    """Lower bound ell^dim V_S0 * S(c3 X^a) for Selmer-stable G-extensions with |disc| <= X.

    For n = 1 the twisted field is cut out by a single character whose
    conductor divides prod_{S0 u T} q, so |disc| <= (prod q)^(ell-1) holds
    exactly and c2 = 1 is proved rather than assumed. For n >= 2 the constant
    is not effective; the default c2 = 1 is flagged as conditional.
    """
    if pool.ell != ell:
        raise InvalidInputError("pool built for a different ell")
    a = malle_a(ell, n)
    d = delta(ell, n)
    conditional = n > 1
    if n == 1:
        if c2 not in (None, 1):
            raise PreconditionError("for n = 1 the discriminant bound is exact; c2 must be 1")
        c2 = 1
    elif c2 is None:
        warnings.warn("c2 defaults to 1; the true constant depends on the curve and group", stacklevel=2)
        c2 = 1
    m = product_threshold(X, n, ell, s0.S0, c2)
    value = ell**s0.dim_V * partial_sum(pool, m) if m >= 1 else 0
    return CountReport(X, value, a, d, conditional_on_c2=conditional, threshold=m)


def census_fields(pool: PrimePool, s0: S0Data, X: int):
    """Yield (T, f, |disc|) for every f in some W_T with |disc(field of f)| <= X."""
    from .selmer import enumerate_W_T

    ell = pool.ell
    spec = s0.spec
    root, _ = integer_nthroot(X, ell - 1)
    for T in admissible_sets(pool, int(root)):
        for f in sorted(enumerate_W_T(spec, T), key=lambda v: v.coefficients):
            disc = math.prod(f.ramified) ** (ell - 1)
            if disc <= X:
                yield T, f, disc


def exact_census(pool: PrimePool, s0: S0Data, X: int) -> int:
    """#{f in W : |disc(L^f)| <= X} with true discriminants (n = 1)."""
    if s0.spec is None:
        raise PreconditionError("the census needs the SelmerSpec of S0")
    count = 0
    for _T, f, disc in census_fields(pool, s0, X):
        if f.ramified:
            # cross-check the closed form against the conductor-discriminant product
            if discriminant_abs(f.field()) != disc:
                raise AssertionError("discriminant mismatch")
        count += 1
    return count


@dataclass
class FitResult:
    a: float
    delta_minus_one: float
    residual: float

    @property
    def delta(self) -> float:
        return self.delta_minus_one + 1


def fit_exponents(reports: Sequence[CountReport]) -> FitResult:
    """Least squares for log S = c + a log X + (delta-1) log log X."""
    pts = [(r.X, r.value) for r in reports if r.value > 0]
    if len(pts) < 5:
        raise PreconditionError("need at least 5 reports with positive counts")
    X = np.array([float(x) for x, _ in pts])
    if math.log10(X.max() / X.min()) < 3:
        raise PreconditionError("reports must span at least 3 decades of X")
    if X.min() <= math.e:
        raise PreconditionError("X must exceed e for log log X")
    y = np.log(np.array([float(v) for _, v in pts]))
    A = np.column_stack([np.ones_like(X), np.log(X), np.log(np.log(X))])
    if np.linalg.matrix_rank(A) < 3 or np.linalg.cond(A) > 1e12:
        raise PreconditionError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return FitResult(float(coef[1]), float(coef[2]), resid)


@dataclass
class MalleReference:
    a: Fraction
    description: str


def malle_reference(ell: int, n: int, table=None) -> MalleReference:
    if not is_prime(ell) or n < 1:
        raise InvalidInputError("need ell prime and n >= 1")
    a = malle_a(ell, n)
    if table is not None:
        from .groups import malle_invariant

        _, got = malle_invariant(table)
        if got != a:
            raise AssertionError(f"group table gives a = {got}, expected {a}")
    desc = f"c1 X^{_q(a)} <= N(G;X) <= c2(eps) X^({_q(a)}+eps)"
    return MalleReference(a, desc)


def reports_csv(rows: Iterable[tuple[int, int, int | None]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["X", "S", "M_lower"])
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def fit_json(fit: FitResult, ell: int, n: int) -> str:
    return json.dumps({
        "a_hat": fit.a,
        "delta_minus_one_hat": fit.delta_minus_one,
        "residual": fit.residual,
        "a_target": _q(malle_a(ell, n)),
        "delta_target": _q(delta(ell, n)),
    }, sort_keys=True)
