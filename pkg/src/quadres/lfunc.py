"""Evaluators for the three L-quantities the experiments resonate against.

Central-point values through the smooth-cutoff expansion, truncated Euler
products at the edge sigma = 1, and the prime sums that stand in for
log L(sigma, chi_d) inside the critical strip.  Long smoothed character-sum
oracles live here as well so the test suite and the cache share one
implementation.

All arithmetic is real double precision; sums go through numpy's pairwise
reduction and error estimates carry an n_terms * 2^-52 rounding allowance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import (
    FundamentalDiscriminant,
    chi_sequence,
    is_fundamental_discriminant,
    kronecker,
    primes_upto,
)
from .specfn import BudgetError, PrecisionBudget, weight_U

HARD_TERM_CAP = 10**8

METHODS = ("afe", "euler_trunc", "prime_sum", "oracle")

DEFAULT_L_BUDGET = PrecisionBudget(abs_tol=1e-9, rel_tol=0.0, max_subdivisions=2000)


@dataclass(frozen=True)
class LValueRecord:
    """One evaluated L-quantity.

    For sigma = 1/2 the value is the L-value itself; for sigma in (1/2, 1)
    it is the log-L prime-sum approximation; for sigma = 1 the truncated
    Euler product (or the oracle's full value).
    """

    d: int
    sigma: float
    value: float
    method: str
    err_estimate: float

    def __post_init__(self):
        # normalize to builtin types so csv_row() emits clean round-trip decimals
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "err_estimate", float(self.err_estimate))
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not self.err_estimate >= 0:
            raise ValueError("err_estimate must be >= 0")

    def csv_row(self) -> str:
        # repr() gives the shortest decimal that round-trips a float
        return f"{self.d},{self.sigma!r},{self.value!r},{self.method},{self.err_estimate!r}"

    @classmethod
    def from_csv_row(cls, row: str) -> "LValueRecord":
        d, sigma, value, method, err = row.strip().split(",")
        return cls(int(d), float(sigma), float(value), method, float(err))


CSV_HEADER = "d,sigma,value,method,err_estimate"


def _d_int(d) -> int:
    dd = d.d if isinstance(d, FundamentalDiscriminant) else int(d)
    if not is_fundamental_discriminant(dd):
        raise ValueError(f"{dd} is not a fundamental discriminant")
    return dd


_decay_constant_cache: float | None = None


def _afe_decay_constant() -> float:
    """max of U(x) e^x over [5, 40]: the constant in the tail bound
    U(x) <= C e^-x used to pick the expansion cutoff."""
    global _decay_constant_cache
    if _decay_constant_cache is None:
        grid = np.linspace(5.0, 40.0, 141)
        _decay_constant_cache = max(weight_U(x) * math.exp(min(x, 700.0)) for x in grid)
    return _decay_constant_cache


def afe_cutoff(d: int, abs_tol: float) -> int:
    """Smallest term count whose dropped tail (via U(x) <= C e^-x) is below
    abs_tol: n_cut = ceil(sqrt|d| * max(12, log(1/abs_tol)))."""
    x_max = 12.0
    if 0 < abs_tol < 1:
        x_max = max(x_max, math.log(1.0 / abs_tol))
    return int(math.ceil(x_max * math.sqrt(abs(d))))


def l_half(d, budget: PrecisionBudget | None = None) -> LValueRecord:
    """L(1/2, chi_d) = 2 sum_n chi_d(n) n^-1/2 U(n / sqrt|d|).

    Exact for d > 0 (even character, root number +1).  For d < 0 the same
    formula is evaluated with sqrt|d|, which ignores the odd character's
    different gamma factor; such records keep method tag "afe" but should
    not be trusted as exact values.
    """
    budget = budget or DEFAULT_L_BUDGET
    dd = _d_int(d)
    if abs(dd) < 3:
        raise ValueError("l_half needs |d| >= 3")
    n_cut = afe_cutoff(dd, budget.abs_tol)
    if n_cut > HARD_TERM_CAP:
        raise BudgetError(f"cutoff {n_cut} exceeds the {HARD_TERM_CAP}-term cap")
    s = math.sqrt(abs(dd))
    n = np.arange(1, n_cut + 1, dtype=np.float64)
    chi = chi_sequence(dd, n_cut).astype(np.float64)
    weights = np.array([weight_U(x) for x in n / s]) / np.sqrt(n)
    value = 2.0 * float(np.dot(chi, weights))
    c_decay = _afe_decay_constant()
    tail = 2.0 * c_decay * math.exp(-(n_cut + 1) / s) / ((1.0 - math.exp(-1.0 / s)) * math.sqrt(n_cut))
    fuzz = 2.0 * float(np.sum(weights)) * n_cut * 2.0**-52
    return LValueRecord(dd, 0.5, value, "afe", float(tail + fuzz))


def l_half_series_oracle(
    d, length_factor: float = 100.0, exponents: tuple[int, ...] = (6, 8)
) -> LValueRecord:
    """Independent check of l_half: a long smoothed partial sum
    sum_n chi_d(n) n^-1/2 exp(-(n/L)^m) with cutoff length L >> sqrt|d|,
    evaluated for two cutoff shapes whose spread feeds the error estimate.
    Shares nothing with the expansion path except the character table.
    """
    dd = _d_int(d)
    if abs(dd) < 3:
        raise ValueError("l_half_series_oracle needs |d| >= 3")
    L = max(1000.0, length_factor * abs(dd))
    n_terms = int(math.ceil(1.9 * L))
    if n_terms > HARD_TERM_CAP:
        raise BudgetError("oracle length exceeds the term cap")
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    base = chi_sequence(dd, n_terms).astype(np.float64) / np.sqrt(n)
    x = n / L
    vals = [float(np.dot(base, np.exp(-(x**m)))) for m in exponents]
    spread = max(abs(a - b) for a in vals for b in vals)
    fuzz = float(np.sum(np.abs(base))) * n_terms * 2.0**-52
    return LValueRecord(dd, 0.5, vals[-1], "oracle", spread + fuzz)


def l_one_truncated(d, y: float) -> LValueRecord:
    """Truncated Euler product prod_{p <= y} (1 - chi_d(p)/p)^-1, computed in
    log space.  Empty product (value 1) below y = 2."""
    dd = _d_int(d)
    log_total = 0.0
    count = 0
    if y >= 2:
        for p in primes_upto(int(math.floor(y))):
            p = int(p)
            chi = _kron_cached(dd, p)
            if chi:
                log_total -= math.log1p(-chi / p)
                count += 1
    value = math.exp(log_total)
    return LValueRecord(dd, 1.0, value, "euler_trunc", abs(value) * count * 2.0**-52)


def prime_sum_sigma(d, sigma: float, y: float) -> LValueRecord:
    """S_{chi_d}(sigma, y) = sum_{p <= y} chi_d(p) p^-sigma."""
    if not 0.5 < sigma < 1:
        raise ValueError("prime_sum_sigma needs 1/2 < sigma < 1")
    dd = _d_int(d)
    total = 0.0
    count = 0
    if y >= 2:
        for p in primes_upto(int(math.floor(y))):
            p = int(p)
            chi = _kron_cached(dd, p)
            if chi:
                total += chi * p**-sigma
                count += 1
    return LValueRecord(dd, sigma, total, "prime_sum", count * 2.0**-52)


def log_l_sigma_approx(
    d, sigma: float, y: float, include_prime_powers: bool = False
) -> LValueRecord:
    """Prime(-power) sum approximation to log L(sigma, chi_d).

    Without prime powers this is prime_sum_sigma; with them, each p^k <= y
    contributes chi_d(p)^k p^(-k sigma) / k.
    """
    base = prime_sum_sigma(d, sigma, y)
    if not include_prime_powers:
        return base
    dd = base.d
    extra = 0.0
    count = 0
    if y >= 4:
        for p in primes_upto(int(math.isqrt(int(y)))):
            p = int(p)
            chi = _kron_cached(dd, p)
            if chi == 0:
                continue
            pk = p * p
            k = 2
            while pk <= y:
                extra += (chi**k) * pk**-sigma / k
                count += 1
                pk *= p
                k += 1
    return LValueRecord(
        dd, sigma, base.value + extra, "prime_sum", base.err_estimate + count * 2.0**-52
    )


def l_one_oracle(
    d,
    budget: PrecisionBudget | None = None,
    length_factor: float = 1000.0,
    exponents: tuple[int, ...] = (6, 8),
) -> LValueRecord:
    """L(1, chi_d) by a long smoothed character sum sum chi_d(n)/n with
    cutoff length >= |d| * length_factor; the spread between two cutoff
    shapes is the error estimate.  Independent of the Euler-product path."""
    dd = _d_int(d)
    if abs(dd) < 3:
        raise ValueError("l_one_oracle needs |d| >= 3")
    L = max(2000.0, length_factor * abs(dd))
    n_terms = int(math.ceil(1.9 * L))
    if n_terms > HARD_TERM_CAP:
        raise BudgetError("oracle length exceeds the term cap")
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    base = chi_sequence(dd, n_terms).astype(np.float64) / n
    x = n / L
    vals = [float(np.dot(base, np.exp(-(x**m)))) for m in exponents]
    spread = max(abs(a - b) for a in vals for b in vals)
    fuzz = float(np.sum(np.abs(base))) * n_terms * 2.0**-52
    return LValueRecord(dd, 1.0, vals[-1], "oracle", spread + fuzz)


# small per-(d, p) memo: the single-d evaluators walk the same primes often
@lru_cache(maxsize=1 << 18)
def _kron_cached(d: int, p: int) -> int:
    return kronecker(d, p)
