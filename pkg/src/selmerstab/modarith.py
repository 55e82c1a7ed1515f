"""Modular arithmetic kernel: primes, powers, primitive roots, power-residue indices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, PreconditionError, ResourceLimitError

# Largest table (in entries) that legendre_table / sieve_primes will allocate.
MAX_TABLE_ENTRIES = 200_000_000

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def sieve_primes(bound: int) -> list[int]:
    """All primes <= bound in ascending order (empty list for bound < 2)."""
    if bound < 2:
        return []
    if bound + 1 > MAX_TABLE_ENTRIES:
        raise ResourceLimitError(f"sieve bound {bound} exceeds table cap {MAX_TABLE_ENTRIES}")
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, int(bound**0.5) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).tolist()


def mod_pow(a: int, e: int, m: int) -> int:
    """a**e mod m by left-to-right square-and-multiply."""
    if m < 2:
        raise InvalidInputError(f"modulus must be >= 2, got {m}")
    if e < 0:
        raise InvalidInputError("exponent must be nonnegative")
    a %= m
    result = 1
    for bit in bin(e)[2:]:
        result = result * result % m
        if bit == "1":
            result = result * a % m
    return result


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24 (covers all 64-bit input)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of |n| by trial division (n is expected to be smallish)."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def least_primitive_root(q: int) -> int:
    """Smallest generator of (Z/q)^x for an odd prime q (q = 2 gives 1)."""
    if not is_prime(q):
        raise InvalidInputError(f"{q} is not prime")
    if q == 2:
        return 1
    cofactors = [(q - 1) // r for r in prime_factors(q - 1)]
    g = 2
    while any(pow(g, c, q) == 1 for c in cofactors):
        g += 1
    return g


@lru_cache(maxsize=4096)
def _dlog_table(q: int, m: int) -> dict[int, int]:
    # powers of the order-m generator g^((q-1)/m), keyed by value
    h = pow(least_primitive_root(q), (q - 1) // m, q)
    table, x = {}, 1
    for k in range(m):
        table[x] = k
        x = x * h % q
    return table


def residue_index(a: int, q: int, m: int) -> int:
    """Discrete log of a^((q-1)/m) to base g^((q-1)/m), g the least primitive root.

    This is the canonical order-m character of conductor q evaluated at a,
    valued in Z/m. Requires m | q - 1 and q not dividing a.
    """
    if (q - 1) % m:
        raise PreconditionError(f"{q} is not 1 mod {m}")
    if a % q == 0:
        raise PreconditionError(f"{q} divides {a}")
    return _dlog_table(q, m)[pow(a, (q - 1) // m, q)]


@dataclass(frozen=True)
class ResidueIndex:
    """Value in Z/ell of the canonical order-ell character of conductor q.

    ``value`` is 0 exactly when the argument is an ell-th power mod q; the
    identification of mu_ell with Z/ell is fixed by ``generator``, the least
    primitive root of q.
    """

    value: int
    generator: int

    def __int__(self) -> int:
        return self.value


def ell_power_residue_index(a: int, q: int, ell: int) -> ResidueIndex:
    if not is_prime(q) or not is_prime(ell):
        raise InvalidInputError("q and ell must be prime")
    return ResidueIndex(residue_index(a, q, ell), least_primitive_root(q))


@lru_cache(maxsize=64)
def legendre_table(p: int) -> np.ndarray:
    """Read-only flags: table[x] is True iff x is a square mod p (0 included)."""
    if p + 1 > MAX_TABLE_ENTRIES:
        raise ResourceLimitError(f"square table for p={p} exceeds cap {MAX_TABLE_ENTRIES}")
    if p < 3 or not is_prime(p):
        raise InvalidInputError(f"legendre_table needs an odd prime, got {p}")
    y = np.arange((p + 1) // 2, dtype=np.int64)
    flags = np.zeros(p, dtype=bool)
    flags[y * y % p] = True
    flags.flags.writeable = False
    return flags


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise InvalidInputError("valuation of 0")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k
