"""Both resonator families and the square-decomposition quadratic forms.

The square-free-set family: a prime window split into sub-windows, a
multiplicative weight psi supported on square-free products of window
primes, and per-window caps on how many primes a member may use.  The
default window formulas are astronomically sparse at desk scale, so an
explicit window_override is required whenever they come up empty.

The Euler-product families: completely multiplicative coefficients, either
r_p = 1 - p/z below z (central point / sigma = 1) or a constant band value
r_p = b up to Y (sigma strip).

The quadratic-form identities that drive the constants are provided three
ways: an exhaustive pair/triple enumeration in exact rational arithmetic
(the oracle), the diagonal k-sum, and the Euler-product closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from .arith import factorize, kronecker, primes_upto

ENUM_HARD_LIMIT = 2_000_000


class CapExceededError(RuntimeError):
    """Full enumeration of the resonator set would exceed the caller's cap."""


# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowOverride:
    """Explicit prime windows (lo, hi] with per-window member caps.

    thresholds[k] = t means a member is rejected once it has >= t prime
    factors in window k; None leaves the window unconstrained.
    """

    windows: tuple[tuple[float, float], ...]
    thresholds: tuple[int | None, ...]

    def __post_init__(self):
        if len(self.windows) != len(self.thresholds):
            raise ValueError("windows and thresholds must have equal length")
        for lo, hi in self.windows:
            if not lo < hi:
                raise ValueError(f"empty window ({lo}, {hi}]")
        for t in self.thresholds:
            if t is not None and t < 1:
                raise ValueError("thresholds must be >= 1")


@dataclass(frozen=True)
class BsParams:
    """Square-free-set resonator parameters.

    N is the size parameter; the member-count bound |R| <= N is only
    meaningful for N large, but stays checkable at override scale.
    Requires 1 < a < 1/delta.
    """

    N: float
    a: float = 1.2
    delta: float = 0.5
    window_override: WindowOverride | None = None

    def __post_init__(self):
        if not self.N >= 16:
            raise ValueError("N must be >= 16")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 1 < self.a < 1.0 / self.delta:
            raise ValueError("need 1 < a < 1/delta")

    @property
    def family(self) -> str:
        return "bs"


@dataclass(frozen=True)
class EulerParams:
    """Completely multiplicative resonator coefficients.

    variant="central_one": r_p = 1 - p/z for p < z, else 0.
    variant="sigma_band":  r_p = b for p <= Y, else 0.
    """

    variant: str
    z: float | None = None
    Y: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.variant == "central_one":
            if self.z is None or not self.z > 2:
                raise ValueError("central_one needs z > 2")
            if self.Y is not None or self.b is not None:
                raise ValueError("central_one takes only z")
        elif self.variant == "sigma_band":
            if self.Y is None or not self.Y > 2:
                raise ValueError("sigma_band needs Y > 2")
            if self.b is None or not 0 < self.b < 1:
                raise ValueError("sigma_band needs 0 < b < 1")
            if self.z is not None:
                raise ValueError("sigma_band takes Y and b, not z")
        else:
            raise ValueError(f"unknown Euler variant {self.variant!r}")

    @property
    def family(self) -> str:
        return "euler"


ResonatorSpec = Union[BsParams, EulerParams]


def spec_to_config(spec: ResonatorSpec) -> dict:
    """Human-readable config block for a resonator spec."""
    if isinstance(spec, BsParams):
        cfg = {"family": "bs", "N": spec.N, "a": spec.a, "delta": spec.delta}
        if spec.window_override is not None:
            cfg["window_override"] = {
                "windows": [list(w) for w in spec.window_override.windows],
                "thresholds": list(spec.window_override.thresholds),
            }
        return cfg
    if isinstance(spec, EulerParams):
        cfg = {"family": "euler", "variant": spec.variant}
        if spec.variant == "central_one":
            cfg["z"] = spec.z
        else:
            cfg["Y"] = spec.Y
            cfg["b"] = spec.b
        return cfg
    raise TypeError(f"not a resonator spec: {spec!r}")


def spec_from_config(cfg: dict) -> ResonatorSpec:
    family = cfg.get("family")
    if family == "bs":
        override = None
        if "window_override" in cfg and cfg["window_override"] is not None:
            ov = cfg["window_override"]
            override = WindowOverride(
                tuple((float(lo), float(hi)) for lo, hi in ov["windows"]),
                tuple(None if t is None else int(t) for t in ov["thresholds"]),
            )
        return BsParams(float(cfg["N"]), float(cfg.get("a", 1.2)),
                        float(cfg.get("delta", 0.5)), override)
    if family == "euler":
        if cfg["variant"] == "central_one":
            return EulerParams("central_one", z=float(cfg["z"]))
        return EulerParams("sigma_band", Y=float(cfg["Y"]), b=float(cfg["b"]))
    raise ValueError(f"unknown resonator family {family!r}")


# ---------------------------------------------------------------------------
# square-free-set construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BsSupport:
    windows: tuple[tuple[float, float], ...]
    thresholds: tuple[int | None, ...]          # reject once count >= threshold
    window_primes: tuple[tuple[int, ...], ...]

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for ws in self.window_primes for p in ws)


def _log3(N: float) -> float:
    l2 = math.log(math.log(N))
    if l2 <= 0:
        raise ValueError("N too small for iterated logs")
    return math.log(l2)


def bs_support_primes(params: BsParams) -> BsSupport:
    """The prime window, its partition into sub-windows, and the per-window
    member caps.  Raises when the derived window holds no primes and no
    override was supplied (the usual situation at desk scale)."""
    if params.window_override is not None:
        windows = params.window_override.windows
        thresholds = params.window_override.thresholds
        edge = max(hi for _, hi in windows)
    else:
        # sub-window k is (e^k m0, e^{k+1} m0] for k = 1..floor((log_2 N)^delta);
        # the overall support is cut at e^((log_2 N)^delta) m0, so the last
        # sub-window may hold no primes
        N = params.N
        m0 = math.log(N) * math.log(math.log(N))
        log3 = _log3(N)
        edge = math.exp(math.log(math.log(N)) ** params.delta) * m0
        k_max = max(int(math.floor(math.log(math.log(N)) ** params.delta)), 1)
        windows = tuple(
            (math.exp(k) * m0, math.exp(k + 1) * m0) for k in range(1, k_max + 1)
        )
        thresholds = tuple(
            int(math.ceil(params.a * math.log(N) / (k * k * log3)))
            for k in range(1, k_max + 1)
        )
    window_primes = []
    for lo, hi in windows:
        top = min(hi, edge)
        ps = primes_upto(int(math.floor(top))) if top >= 2 else []
        window_primes.append(tuple(int(p) for p in ps if p > lo))
    support = BsSupport(tuple(windows), tuple(thresholds), tuple(window_primes))
    if not support.primes:
        raise ValueError(
            "derived prime window is empty at this N; supply window_override"
        )
    m0 = math.log(params.N) * math.log(math.log(params.N))
    if min(support.primes) <= m0:
        raise ValueError(
            f"window primes must exceed log N * log_2 N = {m0:.3f} "
            "or the weight at p is not positive"
        )
    return support


def bs_psi_prime(p: int, params: BsParams) -> float:
    """Weight at a window prime:
    sqrt(log N log_2 N / log_3 N) p^-1/2 (log p - log(log N log_2 N))^-1."""
    N = params.N
    m0 = math.log(N) * math.log(math.log(N))
    gap = math.log(p) - math.log(m0)
    if gap <= 0:
        raise ValueError(f"prime {p} too small for the weight formula at N={N}")
    return math.sqrt(m0 / _log3(N)) / (math.sqrt(p) * gap)


def bs_psi(m: int, params: BsParams) -> float:
    """psi(m): multiplicative, supported on square-free products of window
    primes; zero elsewhere."""
    if m < 1:
        raise ValueError("psi is defined on positive integers")
    if m == 1:
        return 1.0
    support = bs_support_primes(params)
    pset = set(support.primes)
    out = 1.0
    for p, e in factorize(m):
        if e > 1 or p not in pset:
            return 0.0
        out *= bs_psi_prime(p, params)
    return out


def bs_membership(m: int, params: BsParams) -> bool:
    """m belongs to the resonator set iff psi(m) > 0 and every window's
    prime-divisor count stays strictly below that window's threshold."""
    if m < 1:
        raise ValueError("membership is defined on positive integers")
    if m == 1:
        return True
    support = bs_support_primes(params)
    pset = set(support.primes)
    fac = factorize(m)
    for p, e in fac:
        if e > 1 or p not in pset:
            return False
    mprimes = {p for p, _ in fac}
    for ws, t in zip(support.window_primes, support.thresholds):
        if t is None:
            continue
        if len(mprimes.intersection(ws)) >= t:
            return False
    return True


@dataclass(frozen=True)
class BsEnumeration:
    members: tuple[int, ...]
    total_count: int
    truncated: bool


def _window_subset_products(
    primes: Sequence[int], max_size: int, psi_of: Callable[[int], float]
) -> list[tuple[int, float, tuple[int, ...]]]:
    out = [(1, 1.0, ())]
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(primes, size):
            m = 1
            w = 1.0
            for p in combo:
                m *= p
                w *= psi_of(p)
            out.append((m, w, combo))
    return out


@lru_cache(maxsize=32)
def _bs_member_data(params: BsParams) -> tuple[tuple[int, float, tuple[int, ...]], ...]:
    """All members as (m, psi(m), prime factors), ascending by m."""
    support = bs_support_primes(params)
    psi_cache = {p: bs_psi_prime(p, params) for p in support.primes}
    total = 1
    per_window = []
    for ws, t in zip(support.window_primes, support.thresholds):
        max_size = len(ws) if t is None else min(len(ws), t - 1)
        count = sum(math.comb(len(ws), j) for j in range(max_size + 1))
        total *= count
        per_window.append((ws, max_size))
    if total > ENUM_HARD_LIMIT:
        raise ValueError(
            f"resonator set has {total} members, beyond the enumeration limit"
        )
    members = [(1, 1.0, ())]
    for ws, max_size in per_window:
        block = _window_subset_products(ws, max_size, psi_cache.__getitem__)
        members = [
            (m1 * m2, w1 * w2, f1 + f2)
            for (m1, w1, f1) in members
            for (m2, w2, f2) in block
        ]
    members.sort(key=lambda t: t[0])
    return tuple(members)


def bs_enumerate(params: BsParams, count_cap: int) -> BsEnumeration:
    """Members of the resonator set in ascending order, truncated at
    count_cap; the full count is always reported so the |R| <= N bound can
    be checked whenever enumeration completes."""
    if count_cap < 1:
        raise ValueError("count_cap must be positive")
    data = _bs_member_data(params)
    support = bs_support_primes(params)
    # definitional check: no member may reach a window's threshold
    for m, _, fac in data[: min(len(data), count_cap)]:
        for ws, t in zip(support.window_primes, support.thresholds):
            if t is not None:
                assert sum(1 for p in fac if p in ws) < t, (m, t)
    members = tuple(m for m, _, _ in data[:count_cap])
    return BsEnumeration(members, len(data), len(data) > count_cap)


def bs_resonator_value(d, params: BsParams, count_cap: int = 200_000) -> float:
    """R_d = sum over members of psi(m) chi_d(m)."""
    dd = d.d if hasattr(d, "d") else int(d)
    data = _bs_member_data(params)
    if len(data) > count_cap:
        raise CapExceededError(
            f"{len(data)} members exceed the cap {count_cap} for resonator sums"
        )
    chi_p = {p: kronecker(dd, p) for p in bs_support_primes(params).primes}
    total = 0.0
    for _, w, fac in data:
        chi = 1
        for p in fac:
            chi *= chi_p[p]
            if chi == 0:
                break
        if chi:
            total += w * chi
    return total


def a_n_product(params: BsParams) -> float:
    """The finite orthogonality-mass product over the window primes:
    prod_p (1 + psi(p) h(p) p^-1/2 + psi(p)^2 h(p)) / (1 + psi(p)^2),
    computed in log space."""
    support = bs_support_primes(params)
    log_total = 0.0
    for p in support.primes:
        psi = bs_psi_prime(p, params)
        h = p / (p + 1.0)
        num = 1.0 + psi * h / math.sqrt(p) + psi * psi * h
        den = 1.0 + psi * psi
        log_total += math.log(num) - math.log(den)
    return math.exp(log_total)


# ---------------------------------------------------------------------------
# Euler-product families
# ---------------------------------------------------------------------------

def euler_window(params: EulerParams) -> list[tuple[int, float]]:
    """Window primes with their coefficient values."""
    if params.variant == "central_one":
        z = params.z
        return [(int(p), 1.0 - int(p) / z) for p in primes_upto(int(math.ceil(z)) - 1)
                if int(p) < z]
    Y = params.Y
    return [(int(p), params.b) for p in primes_upto(int(math.floor(Y)))]


def euler_r_prime(p: int, params: EulerParams) -> float:
    if params.variant == "central_one":
        return 1.0 - p / params.z if p < params.z else 0.0
    return params.b if p <= params.Y else 0.0


def euler_r_coefficient(k: int, params: EulerParams) -> float:
    """r_k extended completely multiplicatively from the prime values;
    r_1 = 1 and r_k = 0 as soon as k has a factor outside the window."""
    if k < 1:
        raise ValueError("coefficients are indexed by positive integers")
    out = 1.0
    for p, e in factorize(k):
        rp = euler_r_prime(p, params)
        if rp == 0.0:
            return 0.0
        out *= rp**e
    return out


def euler_resonator_value(d, params: EulerParams) -> float:
    """R_d = prod over window primes of (1 - r_p chi_d(p))^-1 in log space;
    strictly positive since every factor is (1 -+ r_p)^-1 or 1 with
    0 <= r_p < 1."""
    dd = d.d if hasattr(d, "d") else int(d)
    log_total = 0.0
    for p, rp in euler_window(params):
        chi = kronecker(dd, p)
        if chi:
            log_total -= math.log1p(-rp * chi)
    return math.exp(log_total)


# ---------------------------------------------------------------------------
# square-decomposition quadratic forms
# ---------------------------------------------------------------------------
# A window with coefficients is a sequence of (prime, r_p) pairs; r_p may be
# a Fraction for the exact oracles or a float for the closed forms.

WindowR = Sequence[tuple[int, object]]


def _h_exact(p: int) -> Fraction:
    return Fraction(p, p + 1)


def square_pair_ksum(window_r: WindowR, exponent_cap: int):
    """Diagonal form sum_k r_k^2 d(k^2) h(k) over window-supported k whose
    prime exponents are all <= exponent_cap.  Exact when the coefficients
    are Fractions."""
    if exponent_cap < 0:
        raise ValueError("exponent_cap must be >= 0")
    primes = [p for p, _ in window_r]
    rvals = [r for _, r in window_r]
    exact = all(isinstance(r, Fraction) for r in rvals)
    one = Fraction(1) if exact else 1.0
    total = one * 0
    for exps in itertools.product(range(exponent_cap + 1), repeat=len(primes)):
        term = one
        for p, r, e in zip(primes, rvals, exps):
            if e == 0:
                continue
            term *= r ** (2 * e) * (2 * e + 1)
            term *= _h_exact(p) if exact else p / (p + 1.0)
        total += term
    return total


def square_pair_bruteforce(window_r: WindowR, exponent_cap: int) -> Fraction:
    """Exhaustive oracle for the off-diagonal form sum_{mn = square}
    r_m r_n h(mn): every pair of window-supported (m, n) is enumerated and
    filtered on 'mn is a square whose root has exponents <= exponent_cap'.

    Exact arithmetic: every term is scaled onto one common denominator so
    the accumulation runs over Python integers, and a single Fraction is
    formed at the end.
    """
    if not window_r:
        return Fraction(1)
    primes = [p for p, _ in window_r]
    rvals = [r if isinstance(r, Fraction) else Fraction(r) for _, r in window_r]
    w = len(primes)
    emax = 2 * exponent_cap
    tuples = np.array(
        list(itertools.product(range(emax + 1), repeat=w)), dtype=np.int16
    )
    ok = np.ones((len(tuples), len(tuples)), dtype=bool)
    for j in range(w):
        s_j = tuples[:, j][:, None] + tuples[:, j][None, :]
        ok &= (s_j % 2 == 0) & (s_j <= emax)
    idx_m, idx_n = np.nonzero(ok)
    # per prime: scaled factor for joint exponent s = a + b, denominator
    # den^emax (p+1); r^s h(p)^[s>0] = num^s den^(emax-s) (p or p+1) / that
    scaled = []
    denom = 1
    for p, r in zip(primes, rvals):
        num, den = r.numerator, r.denominator
        scaled.append(
            [num**s * den ** (emax - s) * (p if s else p + 1) for s in range(emax + 1)]
        )
        denom *= den**emax * (p + 1)
    joint = (tuples[idx_m] + tuples[idx_n]).tolist()
    total = 0
    for row in joint:
        term = 1
        for j, s in enumerate(row):
            term *= scaled[j][s]
        total += term
    return Fraction(total, denom)


def square_pair_closed_form(window_r: WindowR) -> float:
    """Euler-product closed form of the full (uncapped) diagonal sum:
    prod_p (1 - h(p) + h(p) (1 + r_p^2) (1 - r_p^2)^-2)."""
    out = 1.0
    for p, r in window_r:
        r = float(r)
        h = p / (p + 1.0)
        out *= 1.0 - h + h * (1.0 + r * r) / (1.0 - r * r) ** 2
    return out


@dataclass(frozen=True)
class SquarePairSum:
    k_sum: float
    closed_form: float


def square_pair_sum(params: EulerParams, exponent_cap: int) -> SquarePairSum:
    """Capped diagonal sum and the uncapped closed form, side by side."""
    window = euler_window(params)
    return SquarePairSum(
        float(square_pair_ksum(window, exponent_cap)),
        square_pair_closed_form(window),
    )


def a_of_z_product(window_r: WindowR) -> float:
    """prod_p (1 - (1-r)^2 / ((p+1)(1+r^2)) + (1 - 1/p)(1-r^2)^2 / (p(1+r^2)))."""
    out = 1.0
    for p, r in window_r:
        r = float(r)
        one_r2 = 1.0 + r * r
        out *= (
            1.0
            - (1.0 - r) ** 2 / ((p + 1.0) * one_r2)
            + (1.0 - 1.0 / p) * (1.0 - r * r) ** 2 / (p * one_r2)
        )
    return out


def b_of_z_product(window_r: WindowR) -> float:
    """prod_p (1 - 3 r^2 / ((p+1)(1+r^2)) + r^4 / ((p+1)(1+r^2)))."""
    out = 1.0
    for p, r in window_r:
        r = float(r)
        one_r2 = 1.0 + r * r
        out *= 1.0 - 3.0 * r * r / ((p + 1.0) * one_r2) + r**4 / ((p + 1.0) * one_r2)
    return out


@dataclass(frozen=True)
class MczResult:
    M: float
    S: float
    s_ksum: float        # capped diagonal sum companion to S
    s_tail_bound: float  # geometric bound on what the cap dropped


def mcz_scz(params: EulerParams, exponent_cap: int = 24) -> MczResult:
    """Closed forms of the two optimization sums for the central-one family:

    M = A(z) prod_{p<z} (1 - 1/p)^-1 h(p) prod_{p<z} (1 - r^2)^-2 (1 + r^2)
    S = B(z) prod_{p<z} (1 - r^2)^-2 (1 + r^2)

    The capped diagonal k-sum for S and a geometric bound on its cap tail
    ride along for diagnostics.
    """
    if params.variant != "central_one":
        raise ValueError("mcz_scz applies to the central_one family")
    window = euler_window(params)
    common = 1.0
    mertens_h = 1.0
    for p, r in window:
        r = float(r)
        common *= (1.0 + r * r) / (1.0 - r * r) ** 2
        mertens_h *= (1.0 - 1.0 / p) ** -1 * (p / (p + 1.0))
    M = a_of_z_product(window) * mertens_h * common
    S = b_of_z_product(window) * common
    s_lo = float(square_pair_ksum(window, exponent_cap))
    s_hi = float(square_pair_ksum(window, exponent_cap + 4))
    s_tail = abs(s_hi - s_lo) * 3.0
    return MczResult(M, S, s_lo, s_tail)


def _mcz_prime_factor(p: int, r: Fraction, cap: int) -> Fraction:
    """Exhaustive Euler factor of the triple form at one prime: all exponent
    triples (a, b, c) with a + b + c even and each <= cap, where a carries
    the 1/l weight, b and c the resonator coefficients, and any nonzero
    total picks up the orthogonality mass h(p)."""
    h = _h_exact(p)
    inv_p = Fraction(1, p)
    rp = [r**e for e in range(cap + 1)]
    pp = [inv_p**e for e in range(cap + 1)]
    total = Fraction(0)
    for a in range(cap + 1):
        for b in range(cap + 1):
            # c must match parity of a+b
            for c in range((a + b) % 2, cap + 1, 2):
                term = pp[a] * rp[b] * rp[c]
                if a + b + c:
                    term *= h
                total += term
    return total


@dataclass(frozen=True)
class MczBrute:
    value: Fraction
    tail_bound: float


def mcz_triple_bruteforce(window_r: WindowR, exponent_cap: int) -> MczBrute:
    """Oracle for M: the triple sum over (l, m, n) with l m n a square,
    window-supported, each prime exponent <= exponent_cap.  The constraint
    and every weight are per-prime, so the sum is the product of exhaustive
    per-prime factors; each factor enumerates its exponent triples directly
    in exact arithmetic.  The reported tail bound comes from extending the
    cap and scaling the observed geometric decay."""
    value = Fraction(1)
    value_ext = Fraction(1)
    for p, r in window_r:
        r = r if isinstance(r, Fraction) else Fraction(r)
        value *= _mcz_prime_factor(p, r, exponent_cap)
        value_ext *= _mcz_prime_factor(p, r, exponent_cap + 4)
    return MczBrute(value, abs(float(value_ext - value)) * 3.0)
