"""Elliptic curves over Q: reduction, point counts and Frobenius traces."""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
import sympy

from .errors import InvalidInputError, PreconditionError
from .modarith import is_prime, legendre_table, prime_factors

# Primes above this use the baby-step giant-step order finder.
BSGS_THRESHOLD = 2_000_000


@dataclass(frozen=True)
class CurveQ:
    """Integral long Weierstrass model y^2 + a1xy + a3y = x^3 + a2x^2 + a4x + a6.

    The model is taken as given: bad primes are read off its discriminant,
    so a non-minimal model reports spurious bad primes.
    """

    a1: int = 0
    a2: int = 0
    a3: int = 0
    a4: int = 0
    a6: int = 0

    def __post_init__(self):
        if self.disc == 0:
            raise InvalidInputError(f"singular model {self.key}")

    @classmethod
    def short(cls, a: int, b: int) -> "CurveQ":
        return cls(0, 0, 0, a, b)

    @classmethod
    def parse(cls, text: str) -> "CurveQ":
        parts = [int(t) for t in text.replace(".", ",").split(",") if t.strip()]
        if len(parts) == 2:
            return cls.short(*parts)
        if len(parts) != 5:
            raise InvalidInputError(f"curve needs 5 coefficients, got {text!r}")
        return cls(*parts)

    @property
    def coeffs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def key(self) -> str:
        """Canonical coefficient string "a1.a2.a3.a4.a6"."""
        return ".".join(str(c) for c in self.coeffs)

    @cached_property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.coeffs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @cached_property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        return b2 * b2 - 24 * b4, -(b2**3) + 36 * b2 * b4 - 216 * b6

    @cached_property
    def disc(self) -> int:
        return discriminant(self)

    @cached_property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(sympy.primefactors(self.disc))

    def sigma(self, ell: int) -> tuple[int, ...]:
        """Sigma = {ell} together with the primes dividing the discriminant."""
        return tuple(sorted(set(self.bad_primes) | {ell}))


def discriminant(curve: CurveQ) -> int:
    b2, b4, b6, b8 = curve.b_invariants
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def has_good_reduction(curve: CurveQ, p: int) -> bool:
    return curve.disc % p != 0


@dataclass(frozen=True)
class PrimeRecord:
    p: int
    ap: int
    good: bool


def _check_hasse(p: int, n: int) -> None:
    # (n - p - 1)^2 <= 4p is the integer form of |a_p| <= 2 sqrt(p)
    if (n - p - 1) ** 2 > 4 * p:
        raise AssertionError(f"Hasse bound violated: #E(F_{p}) = {n}")


def _count_p2(curve: CurveQ) -> int:
    a1, a2, a3, a4, a6 = (c % 2 for c in curve.coeffs)
    n = 1
    for x in (0, 1):
        for y in (0, 1):
            if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                n += 1
    return n


def _count_legendre(curve: CurveQ, p: int) -> int:
    # (2y + a1x + a3)^2 = 4x^3 + b2x^2 + 2b4x + b6 for odd p
    b2, b4, b6, _ = curve.b_invariants
    x = np.arange(p, dtype=np.int64)
    rhs = ((4 * x + b2 % p) % p * x % p + (2 * b4) % p) % p
    rhs = (rhs * x + b6 % p) % p
    squares = legendre_table(p)
    # 1 + sum_x (1 + chi(rhs)): two roots for nonzero squares, one for zero
    nonzero_sq = int(np.count_nonzero(squares[rhs])) - int(np.count_nonzero(rhs == 0))
    zeros = int(np.count_nonzero(rhs == 0))
    return 1 + 2 * nonzero_sq + zeros


def count_points(curve: CurveQ, p: int, *, bsgs_threshold: int = BSGS_THRESHOLD) -> int:
    """#E~(F_p) for a prime p of good reduction."""
    if not is_prime(p):
        raise InvalidInputError(f"{p} is not prime")
    if not has_good_reduction(curve, p):
        raise PreconditionError(f"bad reduction at {p}")
    if p == 2:
        n = _count_p2(curve)
    elif p > bsgs_threshold:
        n = _count_bsgs(curve, p)
    else:
        n = _count_legendre(curve, p)
    _check_hasse(p, n)
    return n


@lru_cache(maxsize=1 << 20)
def _trace(coeffs: tuple[int, ...], p: int) -> int:
    return p + 1 - count_points(CurveQ(*coeffs), p)


def trace_of_frobenius(curve: CurveQ, p: int, cache: "ApCache | None" = None) -> int:
    """a_p = p + 1 - #E~(F_p); memoised in-process and optionally on disk."""
    if cache is not None:
        hit = cache.get(p)
        if hit is not None:
            return hit
    ap = _trace(curve.coeffs, p)
    if cache is not None:
        cache.put(p, ap)
    return ap


def ell_torsion_trivial(curve: CurveQ, p: int, ell: int) -> bool:
    """True iff ell does not divide #E~(F_p)."""
    if not has_good_reduction(curve, p):
        raise PreconditionError(f"bad reduction at {p}")
    if ell > p + 1 + 2 * math.isqrt(p) + 1:
        return True
    return (p + 1 - trace_of_frobenius(curve, p)) % ell != 0


# --- baby-step giant-step order finding ---------------------------------------------


def _short_model(curve: CurveQ, p: int) -> tuple[int, int]:
    c4, c6 = curve.c_invariants
    return (-27 * c4) % p, (-54 * c6) % p


def _add(P, Q, a, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _mul(k, P, a, p):
    R = None
    if k < 0:
        k, P = -k, (P[0], -P[1] % p)
    while k:
        if k & 1:
            R = _add(R, P, a, p)
        P = _add(P, P, a, p)
        k >>= 1
    return R


def _random_point(a, b, p, rng):
    while True:
        x = rng.randrange(p)
        rhs = (x * x * x + a * x + b) % p
        if rhs == 0:
            return x, 0
        if pow(rhs, (p - 1) // 2, p) == 1:
            return x, sympy.sqrt_mod(rhs, p)


def _order_of_point(P, multiple, a, p):
    # reduce a known annihilator of P to its exact order
    order = multiple
    for r in prime_factors(multiple):
        while order % r == 0 and _mul(order // r, P, a, p) is None:
            order //= r
    return order


def _annihilator_in_interval(P, a, p):
    """Some N in the Hasse interval with N*P = O, via BSGS over the interval."""
    lo = p + 1 - 2 * math.isqrt(p) - 2
    width = 4 * math.isqrt(p) + 5
    m = math.isqrt(width) + 1
    baby = {}
    R = None
    for j in range(m):
        baby.setdefault(R, j)
        R = _add(R, P, a, p)
    step = _mul(m, P, a, p)
    neg_step = None if step is None else (step[0], -step[1] % p)
    # want (lo + i*m + j) P = O, i.e. j P = -(lo + i m) P
    G = _mul(lo, P, a, p)
    G = None if G is None else (G[0], -G[1] % p)
    for i in range(m + 1):
        if G in baby:
            return lo + i * m + baby[G]
        G = _add(G, neg_step, a, p)
    raise AssertionError("no annihilator found in Hasse interval")


def _count_bsgs(curve: CurveQ, p: int, attempts: int = 40) -> int:
    """Group order via point orders on E and its quadratic twist (Mestre's trick)."""
    a, b = _short_model(curve, p)
    # nonsquare d gives the twist y^2 = x^3 + a d^2 x + b d^3
    d = 2
    while pow(d, (p - 1) // 2, p) == 1:
        d += 1
    at, bt = a * d * d % p, b * d * d * d % p
    lo = p + 1 - 2 * math.isqrt(p) - 1
    hi = p + 1 + 2 * math.isqrt(p) + 1
    rng = random.Random(p)
    lcm_e = lcm_t = 1
    for _ in range(attempts):
        P = _random_point(a, b, p, rng)
        lcm_e = math.lcm(lcm_e, _order_of_point(P, _annihilator_in_interval(P, a, p), a, p))
        Q = _random_point(at, bt, p, rng)
        lcm_t = math.lcm(lcm_t, _order_of_point(Q, _annihilator_in_interval(Q, at, p), at, p))
        cands = [
            n for n in range(lo - lo % lcm_e, hi + 1, lcm_e)
            if lo <= n <= hi and (2 * p + 2 - n) % lcm_t == 0 and (n - p - 1) ** 2 <= 4 * p
        ]
        if len(cands) == 1:
            return cands[0]
    return _count_legendre(curve, p)


# --- on-disk a_p cache --------------------------------------------------------------


class ApCache:
    """Append-only "p,a_p" text file for one curve model.

    Lines are ascending in p; every line is re-checked against the Hasse
    bound on load and a corrupt file is rejected rather than trusted.
    """

    def __init__(self, cache_dir: str | os.PathLike, curve: CurveQ):
        self.path = Path(cache_dir) / f"ap_{curve.key}.csv"
        self.curve = curve
        self._data: dict[int, int] = {}
        self._last = 0
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        for lineno, line in enumerate(self.path.read_text().splitlines(), 1):
            if not line.strip():
                continue
            p_s, ap_s = line.split(",")
            p, ap = int(p_s), int(ap_s)
            if p <= self._last or ap * ap > 4 * p:
                raise InvalidInputError(f"{self.path}:{lineno}: invalid cache line {line!r}")
            self._data[p] = ap
            self._last = p

    def get(self, p: int) -> int | None:
        return self._data.get(p)

    def put(self, p: int, ap: int) -> None:
        if p in self._data:
            return
        self._data[p] = ap
        # only ascending entries go to disk; out-of-order values stay in memory
        if p > self._last:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(f"{p},{ap}\n")
            self._last = p

    def __len__(self) -> int:
        return len(self._data)
