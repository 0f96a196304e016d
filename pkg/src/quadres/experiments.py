"""Desk-scale empirical studies.

Character-sum verification against the density main term, resonance ratios
for all three targets, extreme-value searches (exhaustive and
resonator-guided), and proportion estimates with their theoretical
comparators.

Determinism contract: discriminant ranges are cut into fixed 2^16-wide
blocks; per-block partial sums may be computed on any thread but are merged
in ascending block order with compensated summation, so identical configs
give bit-identical reports at any thread count.  The theoretical comparator
lines are asymptotic statements evaluated at finite X; they are labeled as
such and never used as pass/fail.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arith import (
    BLOCK,
    _chi_prime_block,
    batch_character,
    fundamental_d_values,
    neumaier_sum,
    orthogonality_mass,
    primes_upto,
)
from .consts import (
    EULER_GAMMA,
    ZETA2,
    alpha_sigma_b,
    const_C2,
    proportion_exponent,
    tau_eta,
)
from .lfunc import LValueRecord, l_half
from .resonator import BsParams, EulerParams, ResonatorSpec, _bs_member_data, euler_window

ASYMPTOTIC_NOTE = "asymptotic, not expected to bind at desk scale"

# Desk-scale caps for truncation lengths whose asymptotic defaults blow up
# at finite X; both are recorded in the reports that use them.
SIGMA_Y_CAP = 1e5


def desk_y_for_sigma(X: float, sigma: float) -> float:
    """min((log X)^(4/(sigma-1/2)), cap): the strip evaluator's cut length."""
    return min(math.log(X) ** (4.0 / (sigma - 0.5)), SIGMA_Y_CAP)


def desk_y_for_one(X: float) -> float:
    """Default Euler-product cut for sigma = 1 counting runs."""
    return min(math.log(X) ** 3, SIGMA_Y_CAP)


# ---------------------------------------------------------------------------
# deterministic block reductions
# ---------------------------------------------------------------------------

def _block_bounds(n: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + BLOCK, n)) for lo in range(0, n, BLOCK)]


def _block_reduce(arrays: list[np.ndarray], threads: int = 1) -> list[float]:
    """Sum each array by fixed blocks merged in ascending order."""
    n = len(arrays[0])
    bounds = _block_bounds(n)

    def partials(bound):
        lo, hi = bound
        return [float(np.sum(a[lo:hi])) for a in arrays]

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(partials, bounds))
    else:
        rows = [partials(b) for b in bounds]
    return [neumaier_sum(row[i] for row in rows) for i in range(len(arrays))]


# ---------------------------------------------------------------------------
# batched per-prime character machinery
# ---------------------------------------------------------------------------

def _batch_log_l_one(ds: np.ndarray, y: float) -> np.ndarray:
    """log L(1, chi_d; y) for every d at once."""
    out = np.zeros(len(ds), dtype=np.float64)
    if y >= 2:
        for p in primes_upto(int(math.floor(y))):
            p = int(p)
            chi = _chi_prime_block(ds, p)
            out -= np.where(
                chi == 1, math.log1p(-1.0 / p), np.where(chi == -1, math.log1p(1.0 / p), 0.0)
            )
    return out


def _batch_prime_sum(ds: np.ndarray, sigma: float, y: float) -> np.ndarray:
    out = np.zeros(len(ds), dtype=np.float64)
    if y >= 2:
        for p in primes_upto(int(math.floor(y))):
            p = int(p)
            chi = _chi_prime_block(ds, p).astype(np.float64)
            out += chi * p**-sigma
    return out


def _batch_euler_log_r(ds: np.ndarray, params: EulerParams) -> np.ndarray:
    out = np.zeros(len(ds), dtype=np.float64)
    for p, rp in euler_window(params):
        chi = _chi_prime_block(ds, p)
        out -= np.where(
            chi == 1, math.log1p(-rp), np.where(chi == -1, math.log1p(rp), 0.0)
        )
    return out


def _batch_bs_r(ds: np.ndarray, params: BsParams) -> np.ndarray:
    members = _bs_member_data(params)
    support_primes = sorted({p for _, _, fac in members for p in fac})
    chi = {p: _chi_prime_block(ds, p).astype(np.float64) for p in support_primes}
    out = np.zeros(len(ds), dtype=np.float64)
    for _, w, fac in members:
        term = np.full(len(ds), w)
        for p in fac:
            term = term * chi[p]
        out += term
    return out


def resonator_weights(ds: np.ndarray, spec: ResonatorSpec) -> np.ndarray:
    """R_d across a discriminant array."""
    if isinstance(spec, EulerParams):
        return np.exp(_batch_euler_log_r(ds, spec))
    return _batch_bs_r(ds, spec)


def _batch_values(
    ds: np.ndarray,
    target: str,
    sigma: float | None,
    y: float,
    budget=None,
    value_cache=None,
):
    """Evaluator values across a discriminant array, optionally backed by an
    LValueCache keyed on (d, sigma, method, parameter hash).  Reuse is
    all-or-nothing per run: a complete hit skips evaluation entirely."""
    if target == "one":
        method, sig_out = "euler_trunc", 1.0
    elif target == "sigma":
        method, sig_out = "prime_sum", sigma
    elif target == "half":
        method, sig_out = "afe", 0.5
    else:
        raise ValueError(f"unknown target {target!r}")
    ph = None
    if value_cache is not None:
        from .cache import params_hash
        from .lfunc import DEFAULT_L_BUDGET

        abs_tol = (budget or DEFAULT_L_BUDGET).abs_tol
        ph = params_hash(
            {"target": target, "sigma": sigma, "y": y, "abs_tol": abs_tol}
        )
        cached = [value_cache.get(int(d), sig_out, method, ph) for d in ds]
        if cached and all(c is not None for c in cached):
            return np.array([c.value for c in cached]), method, sig_out
    if target == "one":
        values = np.exp(_batch_log_l_one(ds, y))
    elif target == "sigma":
        values = _batch_prime_sum(ds, sigma, y)
    else:
        values = np.array([l_half(int(d), budget).value for d in ds])
    if value_cache is not None:
        value_cache.put_many(
            (
                LValueRecord(int(d), sig_out, float(v), method, 0.0)
                for d, v in zip(ds, values)
            ),
            ph,
        )
    return values, method, sig_out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharsumReport:
    X: int
    n: int
    sign_filter: str
    empirical_sum: int
    main_term: float
    residual: float
    is_square: bool
    d_count: int

    def to_payload(self) -> dict:
        return {
            "X": self.X,
            "n": self.n,
            "sign_filter": self.sign_filter,
            "empirical_sum": self.empirical_sum,
            "main_term": self.main_term,
            "residual": self.residual,
            "is_square": self.is_square,
            "d_count": self.d_count,
        }


@dataclass(frozen=True)
class ScalingFit:
    n: int
    X_grid: tuple[int, ...]
    residuals: tuple[float, ...]
    slope: float | None
    intercept: float | None
    degenerate: bool
    reference_exponent: float = 0.55  # 1/2 + eps with the report convention eps = 0.05

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "X_grid": list(self.X_grid),
            "residuals": list(self.residuals),
            "slope": self.slope,
            "intercept": self.intercept,
            "degenerate": self.degenerate,
            "reference_exponent": self.reference_exponent,
        }


@dataclass(frozen=True)
class ExperimentReport:
    spec: dict
    X: int
    target: str
    sigma: float | None
    y: float
    S1: float
    S2: float
    ratio: float
    top_k: tuple[LValueRecord, ...]
    theoretical_comparator: float
    comparator_note: str
    unweighted_mean: float
    littlewood_flag: bool
    runtime_ms: int

    def to_payload(self) -> dict:
        return {
            "spec": self.spec,
            "X": self.X,
            "target": self.target,
            "sigma": self.sigma,
            "y": self.y,
            "S1": self.S1,
            "S2": self.S2,
            "ratio": self.ratio,
            "top_k": [
                {
                    "d": r.d,
                    "sigma": r.sigma,
                    "value": r.value,
                    "method": r.method,
                    "err_estimate": r.err_estimate,
                }
                for r in self.top_k
            ],
            "theoretical_comparator": self.theoretical_comparator,
            "comparator_note": self.comparator_note,
            "unweighted_mean": self.unweighted_mean,
            "littlewood_flag": self.littlewood_flag,
        }


@dataclass(frozen=True)
class ProportionReport:
    X: int
    target: str
    eta: float
    sigma: float | None
    b: float | None
    y: float
    tau: float
    empirical_count: int
    total_count: int
    empirical_exponent: float | None
    theoretical_exponent: float

    def to_payload(self) -> dict:
        return {
            "X": self.X,
            "target": self.target,
            "eta": self.eta,
            "sigma": self.sigma,
            "b": self.b,
            "y": self.y,
            "tau": self.tau,
            "empirical_count": self.empirical_count,
            "total_count": self.total_count,
            "empirical_exponent": self.empirical_exponent,
            "theoretical_exponent": self.theoretical_exponent,
        }


@dataclass(frozen=True)
class SearchReport:
    X: int
    target: str
    strategy: str
    k: int
    records: tuple[LValueRecord, ...]
    evaluated: int
    total: int
    quantile: float | None
    overlap_with_exhaustive: float | None

    def to_payload(self) -> dict:
        return {
            "X": self.X,
            "target": self.target,
            "strategy": self.strategy,
            "k": self.k,
            "records": [
                {
                    "d": r.d,
                    "sigma": r.sigma,
                    "value": r.value,
                    "method": r.method,
                    "err_estimate": r.err_estimate,
                }
                for r in self.records
            ],
            "evaluated": self.evaluated,
            "total": self.total,
            "evaluated_fraction": self.evaluated / self.total if self.total else 0.0,
            "quantile": self.quantile,
            "overlap_with_exhaustive": self.overlap_with_exhaustive,
        }


# ---------------------------------------------------------------------------
# character-sum experiment
# ---------------------------------------------------------------------------

def charsum_empirical(
    X: int, n: int, sign_filter: str = "both", threads: int = 1
) -> CharsumReport:
    """Exact sum of chi_d(n) over fundamental |d| <= X, with the density
    main term (X / zeta(2)) prod_{p|n} p/(p+1) on squares.

    The main term carries a factor 1/2 under a single-sign filter since the
    density statement counts both signs.
    """
    if X < 16:
        raise ValueError("charsum_empirical needs X >= 16")
    if n < 1:
        raise ValueError("charsum_empirical needs n >= 1")
    ds = fundamental_d_values(X, sign_filter)
    chi = batch_character(ds, n, threads=threads)
    bounds = _block_bounds(len(ds))
    partials = [int(np.sum(chi[lo:hi], dtype=np.int64)) for lo, hi in bounds]
    empirical = sum(partials)
    root = math.isqrt(n)
    is_square = root * root == n
    if is_square:
        main = X / ZETA2 * float(orthogonality_mass(n))
        if sign_filter != "both":
            main *= 0.5
    else:
        main = 0.0
    return CharsumReport(
        X, n, sign_filter, empirical, main, empirical - main, is_square, len(ds)
    )


def residual_scaling(
    n: int, X_grid, sign_filter: str = "both", threads: int = 1
) -> ScalingFit:
    """Least-squares slope of log|residual| against log X.

    Purely diagnostic: the error statement it shadows is a conditional
    upper bound, so no pass/fail is attached to the fitted exponent.
    """
    grid = tuple(int(x) for x in X_grid)
    if len(grid) < 3 or list(grid) != sorted(grid):
        raise ValueError("X_grid must be ascending with at least 3 points")
    residuals = tuple(
        charsum_empirical(x, n, sign_filter, threads).residual for x in grid
    )
    usable = [(x, abs(r)) for x, r in zip(grid, residuals) if r != 0.0]
    if not usable:
        return ScalingFit(n, grid, residuals, None, None, True)
    if len(usable) < 3:
        raise ValueError("fewer than 3 usable (nonzero-residual) points")
    lx = np.log([x for x, _ in usable])
    ly = np.log([r for _, r in usable])
    slope, intercept = np.polyfit(lx, ly, 1)
    return ScalingFit(n, grid, residuals, float(slope), float(intercept), False)


# ---------------------------------------------------------------------------
# resonance ratios
# ---------------------------------------------------------------------------

def littlewood_ceiling(X: float) -> float:
    """2 e^gamma log_2 X: the conditional asymptotic bound on |L(1, chi_d)|,
    used only as a sanity ceiling (an exceedance means an evaluator bug at
    desk scale, not number theory)."""
    if X <= math.e**math.e:
        raise ValueError("littlewood_ceiling needs X > e^e")
    return 2.0 * math.exp(EULER_GAMMA) * math.log(math.log(X))


def _comparator(target: str, X: int, sigma: float | None, spec) -> float:
    l2 = math.log(math.log(X))
    l3 = math.log(l2) if l2 > 0 else float("nan")
    if target == "half":
        return math.exp(0.5 * math.sqrt(math.log(X) * l3 / l2))
    if target == "one":
        return math.exp(EULER_GAMMA) * (l2 + l3 - const_C2().value)
    b = spec.b if isinstance(spec, EulerParams) and spec.b is not None else 0.9
    return alpha_sigma_b(sigma, b).value * math.log(X) ** (1.0 - sigma) * l2**-sigma


def _check_compat(spec: ResonatorSpec, target: str):
    fam = (
        "bs"
        if isinstance(spec, BsParams)
        else ("central_one" if spec.variant == "central_one" else "sigma_band")
    )
    wanted = {"half": "bs", "one": "central_one", "sigma": "sigma_band"}[target]
    if fam != wanted:
        raise ValueError(f"resonator family {fam!r} is incompatible with target {target!r}")


def _top_k_records(
    ds: np.ndarray, values: np.ndarray, k: int, sigma: float, method: str
) -> tuple[LValueRecord, ...]:
    order = np.lexsort((np.abs(ds), -values))
    picked = order[: min(k, len(order))]
    return tuple(
        LValueRecord(int(ds[i]), sigma, float(values[i]), method, 0.0) for i in picked
    )


def resonance_ratio(
    X: int,
    spec: ResonatorSpec,
    target: str,
    sigma: float | None = None,
    y: float | None = None,
    sign_filter: str = "both",
    top_k: int = 10,
    weight_scale: float = 1.0,
    threads: int = 1,
    budget=None,
    value_cache=None,
) -> ExperimentReport:
    """S1 = sum value(d) R_d^2 and S2 = sum R_d^2 over fundamental |d| <= X,
    their ratio, and the argmax trail.

    weight_scale multiplies every R_d; the ratio is invariant under it (the
    scale cancels), which the test suite pins to 10^-12.
    """
    t0 = time.perf_counter()
    _check_compat(spec, target)
    if target == "sigma":
        if sigma is None or not 0.5 < sigma < 1:
            raise ValueError("target 'sigma' needs 1/2 < sigma < 1")
    elif sigma is not None:
        raise ValueError("sigma only applies to target 'sigma'")
    if not weight_scale > 0:
        raise ValueError("weight_scale must be positive")
    if y is None:
        if target == "one":
            y = spec.z
        elif target == "sigma":
            y = desk_y_for_sigma(X, sigma)
        else:
            y = 0.0
    ds = fundamental_d_values(X, sign_filter)
    if len(ds) == 0:
        raise ValueError("no fundamental discriminants below X")
    r = resonator_weights(ds, spec) * weight_scale
    values, method, sig_out = _batch_values(ds, target, sigma, y, budget, value_cache)
    r2 = r * r
    s1, s2, vsum = _block_reduce([values * r2, r2, values], threads=threads)
    if not s2 > 0:
        raise ValueError("S2 vanished; resonator weights are degenerate")
    records = _top_k_records(ds, values, top_k, sig_out, method)
    flag = False
    if target == "one":
        ceiling = littlewood_ceiling(X)
        flag = bool(np.any(values > ceiling))
    return ExperimentReport(
        spec=_spec_config(spec),
        X=X,
        target=target,
        sigma=sigma,
        y=float(y),
        S1=s1,
        S2=s2,
        ratio=s1 / s2,
        top_k=records,
        theoretical_comparator=_comparator(target, X, sigma, spec),
        comparator_note=ASYMPTOTIC_NOTE,
        unweighted_mean=vsum / len(ds),
        littlewood_flag=flag,
        runtime_ms=int(1000 * (time.perf_counter() - t0)),
    )


def _spec_config(spec: ResonatorSpec) -> dict:
    from .resonator import spec_to_config

    return spec_to_config(spec)


# ---------------------------------------------------------------------------
# extreme-value search
# ---------------------------------------------------------------------------

def extreme_search(
    X: int,
    target: str,
    k: int,
    strategy: str = "exhaustive",
    spec: ResonatorSpec | None = None,
    quantile: float = 0.99,
    sigma: float | None = None,
    y: float | None = None,
    sign_filter: str = "both",
    compare: bool = False,
    threads: int = 1,
    budget=None,
    value_cache=None,
) -> SearchReport:
    """Top-k records by value.

    exhaustive evaluates every fundamental |d| <= X.  resonator_guided
    evaluates only discriminants whose R_d^2 reaches the given quantile,
    reporting how much evaluation was saved; with compare=True the
    exhaustive pass also runs and the top-k overlap is reported.
    """
    if strategy not in ("exhaustive", "resonator_guided"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if k < 1:
        raise ValueError("k must be positive")
    if target == "sigma" and (sigma is None or not 0.5 < sigma < 1):
        raise ValueError("target 'sigma' needs 1/2 < sigma < 1")
    if y is None:
        # same default for both strategies so guided and exhaustive rank
        # the same quantity
        if target == "one":
            y = desk_y_for_one(X)
        elif target == "sigma":
            y = desk_y_for_sigma(X, sigma)
        else:
            y = 0.0
    ds = fundamental_d_values(X, sign_filter)
    total = len(ds)
    if total == 0:
        raise ValueError("no fundamental discriminants below X")

    def top_of(sub: np.ndarray) -> tuple[LValueRecord, ...]:
        values, method, sig_out = _batch_values(sub, target, sigma, y, budget, value_cache)
        return _top_k_records(sub, values, k, sig_out, method)

    if strategy == "exhaustive":
        return SearchReport(
            X, target, strategy, k, top_of(ds), total, total, None, None
        )
    if spec is None:
        raise ValueError("resonator_guided needs a resonator spec")
    if not 0 <= quantile < 1:
        raise ValueError("quantile must lie in [0, 1)")
    r2 = resonator_weights(ds, spec) ** 2
    threshold = float(np.quantile(r2, quantile))
    sub = ds[r2 >= threshold]
    records = top_of(sub)
    overlap = None
    if compare:
        exhaustive = top_of(ds)
        got = {r.d for r in records}
        ref = {r.d for r in exhaustive}
        overlap = len(got & ref) / max(len(ref), 1)
    return SearchReport(
        X, target, strategy, k, records, len(sub), total, quantile, overlap
    )


# ---------------------------------------------------------------------------
# proportions
# ---------------------------------------------------------------------------

def proportion_phi(
    X: int,
    target: str,
    eta: float,
    sigma: float | None = None,
    b: float | None = None,
    y: float | None = None,
    sign_filter: str = "both",
    threads: int = 1,
) -> ProportionReport:
    """Proportion of fundamental |d| <= X whose evaluator value clears the
    exceedance threshold, next to the theoretical exponent it shadows.

    target "one":  counts value(d) > e^gamma tau with value = L(1, chi; y);
                   theoretical exponent -e^-eta / 2.
    target "sigma": counts log-value > tau with value the prime sum;
                   theoretical exponent -(1 - eta alpha(b)) / 2.
    """
    if target == "one":
        tau = tau_eta("one", X, eta)
        if tau <= 0:
            raise ValueError("tau is not positive at this (X, eta); nothing to count")
        if y is None:
            y = desk_y_for_one(X)
        cut = math.exp(EULER_GAMMA) * tau
        theo = -proportion_exponent("one", eta)
    elif target == "sigma":
        if sigma is None or b is None:
            raise ValueError("target 'sigma' needs sigma and b")
        tau = tau_eta("sigma", X, eta, sigma, b)
        if y is None:
            y = desk_y_for_sigma(X, sigma)
        cut = tau
        theo = -proportion_exponent("sigma", eta, b)
    else:
        raise ValueError(f"unknown proportion target {target!r}")
    ds = fundamental_d_values(X, sign_filter)
    if target == "one":
        values = np.exp(_batch_log_l_one(ds, y))
    else:
        values = _batch_prime_sum(ds, sigma, y)
    bounds = _block_bounds(len(ds))
    count = sum(int(np.sum(values[lo:hi] > cut)) for lo, hi in bounds)
    total = len(ds)
    emp = math.log(count / total) / math.log(X) if count > 0 else None
    return ProportionReport(
        X, target, eta, sigma, b, float(y), tau, count, total, emp, theo
    )
