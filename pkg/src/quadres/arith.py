"""Exact integer arithmetic underneath every evaluator.

Primes, factorization, square-free decomposition, Kronecker symbols and
fundamental-discriminant enumeration.  All functions are pure and safe to
call from several threads at once.  The enumeration paths sieve square-free
flags in fixed-size segments, so memory stays bounded even for limits near
10^9; nothing here does per-element trial division on hot paths.

Integers are kept inside signed 64-bit range; larger inputs are rejected.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import InitVar, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

INT63_MAX = 2**63 - 1

# Segment width for sieving and the unit of work handed to worker threads.
# Blocks are merged in index order, so results never depend on scheduling.
SEGMENT = 1 << 20
BLOCK = 1 << 16


def _check_range(n: int, what: str = "argument") -> int:
    n = int(n)
    if abs(n) > INT63_MAX:
        raise ValueError(f"{what} {n} outside signed 64-bit range")
    return n


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------

def _small_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_primes(limit: int, segment_size: int = SEGMENT) -> np.ndarray:
    """All primes <= limit, ascending, as an int64 array.

    Sieves segment by segment above sqrt(limit): one boolean block of
    `segment_size` entries is live at a time, so limits up to 10^9 are
    feasible without holding a full-range sieve.
    """
    limit = _check_range(limit, "limit")
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    if limit <= segment_size:
        return _small_sieve(limit)
    root = math.isqrt(limit)
    base = _small_sieve(root)
    chunks = [base]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + segment_size, limit + 1)
        flags = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start < hi:
                flags[start - lo :: p] = False
        chunks.append((lo + np.flatnonzero(flags)).astype(np.int64))
        lo = hi
    return np.concatenate(chunks)


_prime_cache = np.empty(0, dtype=np.int64)
_prime_cache_limit = 1
_prime_cache_lock = threading.Lock()


def primes_upto(limit: int) -> np.ndarray:
    """Cached prime list; grows geometrically so repeated callers share work."""
    global _prime_cache, _prime_cache_limit
    limit = int(limit)
    if limit > _prime_cache_limit:
        with _prime_cache_lock:
            if limit > _prime_cache_limit:
                new_limit = max(limit, 2 * _prime_cache_limit, 1 << 12)
                _prime_cache = sieve_primes(new_limit)
                _prime_cache_limit = new_limit
    cut = np.searchsorted(_prime_cache, limit, side="right")
    return _prime_cache[:cut]


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    """Ordered (prime, exponent) pairs; the backbone of every multiplicative
    evaluation in the package."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        last = 1
        for p, e in self.pairs:
            if p <= last:
                raise ValueError("primes must be strictly increasing")
            if e < 1:
                raise ValueError("exponents must be >= 1")
            last = p

    def value(self) -> int:
        n = 1
        for p, e in self.pairs:
            n *= p**e
        return n

    def radical(self) -> int:
        n = 1
        for p, _ in self.pairs:
            n *= p
        return n

    def __iter__(self):
        return iter(self.pairs)


def factorize(n: int) -> Factorization:
    """Trial-division factorization of n >= 1."""
    n = _check_range(n, "n")
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    pairs = []
    rem = n
    for p in primes_upto(math.isqrt(n)):
        p = int(p)
        if p * p > rem:
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            pairs.append((p, e))
    if rem > 1:
        pairs.append((rem, 1))
    return Factorization(tuple(pairs))


@dataclass(frozen=True)
class SquarefreeSplit:
    """n = n0 * n1**2 with n0 square-free."""

    n0: int
    n1: int


def squarefree_decompose(n: int) -> SquarefreeSplit:
    n0 = 1
    n1 = 1
    for p, e in factorize(n):
        if e % 2:
            n0 *= p
        n1 *= p ** (e // 2)
    return SquarefreeSplit(n0, n1)


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(abs(n))) if n not in (1, -1) else True


def orthogonality_mass(n) -> Fraction:
    """h(n) = prod_{p | n} p/(p+1); h(1) = 1.  Depends only on the radical."""
    fac = n if isinstance(n, Factorization) else factorize(n)
    out = Fraction(1)
    for p, _ in fac:
        out *= Fraction(p, p + 1)
    return out


# ---------------------------------------------------------------------------
# Kronecker symbol
# ---------------------------------------------------------------------------

def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 0.

    Standard reduction: the factor-of-2 rule by d mod 8, then quadratic
    reciprocity on the odd part.  Completely multiplicative in n, zero
    exactly when gcd(d, n) > 1.
    """
    d = _check_range(d, "d")
    n = _check_range(n, "n")
    if n < 0:
        raise ValueError("kronecker is defined here for n >= 0")
    if d == 0 and n == 0:
        raise ValueError("kronecker(0, 0) is undefined")
    if n == 0:
        return 1 if abs(d) == 1 else 0
    result = 1
    while n % 2 == 0:
        n //= 2
        r = d % 8
        if r % 2 == 0:
            return 0
        if r in (3, 5):
            result = -result
    # n odd and positive: Jacobi loop, valid for negative d after reduction
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


_TAB2 = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int8)  # (d/2) by d mod 8


@lru_cache(maxsize=4096)
def _legendre_table(p: int) -> np.ndarray:
    """Table of Legendre symbols (r/p) for r = 0..p-1, odd prime p."""
    tab = np.full(p, -1, dtype=np.int8)
    tab[0] = 0
    r = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    tab[(r * r) % p] = 1
    tab.setflags(write=False)
    return tab


def _as_d_array(d_range) -> np.ndarray:
    if isinstance(d_range, np.ndarray) and d_range.dtype.kind == "i":
        return d_range.astype(np.int64, copy=False)
    return np.asarray(
        [d.d if isinstance(d, FundamentalDiscriminant) else int(d) for d in d_range],
        dtype=np.int64,
    )


def _chi_prime_block(ds: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        return _TAB2[ds % 8]
    return _legendre_table(p)[ds % p]


def batch_character(d_range, n: int, threads: int = 1) -> np.ndarray:
    """chi_d(n) for every d in d_range, as an int8 array.

    Factors n once and combines per-prime symbol tables across the range;
    element-wise equal to kronecker(d, n).  The range is split into fixed
    blocks written to pre-assigned slots, so output is deterministic no
    matter how blocks are scheduled.
    """
    n = _check_range(n, "n")
    if n < 1:
        raise ValueError("batch_character expects n >= 1")
    ds = _as_d_array(d_range)
    fac = factorize(n)
    out = np.empty(len(ds), dtype=np.int8)

    def fill(lo: int, hi: int):
        block = np.ones(hi - lo, dtype=np.int8)
        sub = ds[lo:hi]
        for p, e in fac:
            chi = _chi_prime_block(sub, p)
            block *= chi if e % 2 else np.abs(chi)
        out[lo:hi] = block

    bounds = [(lo, min(lo + BLOCK, len(ds))) for lo in range(0, len(ds), BLOCK)]
    if not bounds:
        return out
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: fill(*b), bounds))
    else:
        for b in bounds:
            fill(*b)
    return out


@lru_cache(maxsize=512)
def character_table(d: int) -> np.ndarray:
    """chi_d(r) for r = 0..|d|-1 (int8); requires d = 0 or 1 mod 4.

    Built by a completely multiplicative sieve: one kronecker() call per
    prime below |d|, composites filled through slice sign-flips.
    """
    d = int(d)
    if d % 4 not in (0, 1):
        raise ValueError("character_table needs d = 0,1 (mod 4) for period |d|")
    size = abs(d)
    tab = np.ones(size, dtype=np.int8)
    tab[0] = 0
    for p in primes_upto(size - 1):
        p = int(p)
        chi = kronecker(d, p)
        if chi == 0:
            tab[p::p] = 0
        elif chi == -1:
            pk = p
            while pk < size:
                tab[pk::pk] *= -1
                pk *= p
    tab.setflags(write=False)
    return tab


def chi_sequence(d: int, length: int) -> np.ndarray:
    """chi_d(1), ..., chi_d(length) via period tiling of character_table."""
    tab = character_table(d)
    size = len(tab)
    reps = (length + size) // size + 1
    return np.tile(tab, reps)[1 : length + 1]


# ---------------------------------------------------------------------------
# fundamental discriminants
# ---------------------------------------------------------------------------

def is_fundamental_discriminant(d: int, include_one: bool = False) -> bool:
    """True iff d = 1 (mod 4) square-free, or d = 4m with m = 2,3 (mod 4)
    square-free.  d = 1 is excluded unless include_one is set (its character
    is principal and the attached L-function is zeta)."""
    d = _check_range(d, "d")
    if d == 0:
        raise ValueError("0 is not a discriminant")
    if d == 1:
        return include_one
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class FundamentalDiscriminant:
    """A validated fundamental discriminant.

    The factorization of |d| is exposed lazily; bulk enumeration constructs
    instances with check=False since the sieve already guarantees validity.
    """

    d: int
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check and not is_fundamental_discriminant(self.d):
            raise ValueError(f"{self.d} is not a fundamental discriminant")

    @property
    def abs_factorization(self) -> Factorization:
        return factorize(abs(self.d))

    def __int__(self) -> int:
        return self.d


def _squarefree_flags(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Square-free flags for the integers in [lo, hi)."""
    flags = np.ones(hi - lo, dtype=bool)
    for p in base:
        p = int(p)
        p2 = p * p
        if p2 >= hi:
            break
        start = ((lo + p2 - 1) // p2) * p2
        if start < hi:
            flags[start - lo :: p2] = False
    if lo == 0:
        flags[0] = False
    return flags


def fundamental_d_values(
    X: int, sign_filter: str = "both", include_one: bool = False
) -> np.ndarray:
    """All fundamental discriminants with 2 <= |d| <= X as an int64 array,
    ascending by |d|, negative sign first when both signs share one |d|.

    Sieved from square-free flags segment by segment; no per-element trial
    division.
    """
    X = _check_range(X, "X")
    if sign_filter not in ("both", "positive", "negative"):
        raise ValueError(f"unknown sign_filter {sign_filter!r}")
    if X < 2:
        base_out = np.empty(0, dtype=np.int64)
    else:
        base = primes_upto(math.isqrt(X))
        parts = []
        lo = 2
        while lo <= X:
            hi = min(lo + SEGMENT, X + 1)
            k = np.arange(lo, hi, dtype=np.int64)
            sf = _squarefree_flags(lo, hi, base)
            qlo, qhi = lo // 4, (hi - 1) // 4 + 1
            sfq = _squarefree_flags(qlo, qhi, base)
            mod4 = k % 4
            is_mult4 = mod4 == 0
            q = np.where(is_mult4, k // 4, qlo)
            qmod4 = np.where(is_mult4, q % 4, -1)
            q_sf = sfq[q - qlo]
            pos = ((mod4 == 1) & sf) | (is_mult4 & ((qmod4 == 2) | (qmod4 == 3)) & q_sf)
            neg = ((mod4 == 3) & sf) | (is_mult4 & ((qmod4 == 1) | (qmod4 == 2)) & q_sf)
            if sign_filter == "positive":
                parts.append(k[pos])
            elif sign_filter == "negative":
                parts.append(-k[neg])
            else:
                kn, kp = k[neg], k[pos]
                keys = np.concatenate([2 * kn, 2 * kp + 1])
                vals = np.concatenate([-kn, kp])
                order = np.argsort(keys, kind="stable")
                parts.append(vals[order])
            lo = hi
        base_out = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    if include_one and sign_filter in ("both", "positive"):
        base_out = np.concatenate([np.array([1], dtype=np.int64), base_out])
    return base_out


def enumerate_fundamental_discriminants(
    X: int, sign_filter: str = "both", include_one: bool = False
) -> list[FundamentalDiscriminant]:
    """fundamental_d_values wrapped into validated objects (validation is
    skipped per element; the sieve already enforced it)."""
    return [
        FundamentalDiscriminant(int(d), check=False)
        for d in fundamental_d_values(X, sign_filter, include_one)
    ]


def neumaier_sum(values: Iterable[float]) -> float:
    """Compensated (Neumaier) summation; used to merge block partial sums in
    a fixed order so reductions are bit-stable under threading."""
    total = 0.0
    comp = 0.0
    for x in values:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
    return total + comp
