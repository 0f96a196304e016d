"""Numerical realization of every constant, integral and parameter selector
used by the experiments, with closed forms cross-checked against quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfn import PrecisionBudget, integrate

EULER_GAMMA = 0.57721566490153286061
ZETA2 = math.pi**2 / 6.0

_QUAD_BUDGET = PrecisionBudget(abs_tol=1e-12, rel_tol=1e-12, max_subdivisions=4000)


@dataclass(frozen=True)
class ConstantReport:
    name: str
    value: float
    method: str  # closed_form | quadrature | both
    discrepancy: float = 0.0

    def __post_init__(self):
        if self.method not in ("closed_form", "quadrature", "both"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.discrepancy < 0:
            raise ValueError("discrepancy must be nonnegative")


def const_C1(budget: PrecisionBudget | None = None) -> ConstantReport:
    """int_0^1 tanh(y)/y dy + int_1^inf (tanh y - 1)/y dy = 0.8187..."""
    budget = budget or _QUAD_BUDGET
    head, e1 = integrate(lambda y: math.tanh(y) / y, 0.0, 1.0, budget)
    # tanh y - 1 = -2 e^{-2y} / (1 + e^{-2y}); split at y = 4, tail is geometric
    tail, e2 = integrate(
        lambda y: (math.tanh(y) - 1.0) / y, 1.0, math.inf, budget, tail_split=4.0
    )
    return ConstantReport("C1", head + tail, "quadrature", e1 + e2)


def c2_threshold() -> float:
    return 2.0 * (3.0 * math.log(2.0) - 0.5 * math.pi)


def c3_closed() -> float:
    return 0.25 * math.pi - 0.5 * math.log(2.0)


def const_C2() -> ConstantReport:
    """Both closed forms of the optimized sigma=1 constant; their difference
    is reported as the discrepancy and must vanish to rounding."""
    inner = 3.0 * math.log(2.0) - 0.5 * math.pi
    direct = 0.25 * math.pi + 0.5 * math.log(2.0) + math.log(inner)
    via_c3 = c3_closed() + math.log(2.0 * inner)
    return ConstantReport("C2", direct, "closed_form", abs(direct - via_c3))


def const_c3(budget: PrecisionBudget | None = None) -> ConstantReport:
    budget = budget or _QUAD_BUDGET
    quad, _ = integrate(lambda u: u / (2.0 - 2.0 * u + u * u), 0.0, 1.0, budget)
    return ConstantReport("c3", c3_closed(), "both", abs(quad - c3_closed()))


def const_cprime(budget: PrecisionBudget | None = None) -> ConstantReport:
    budget = budget or _QUAD_BUDGET
    quad, _ = integrate(
        lambda u: 2.0 * u * (1.0 - u) / (2.0 - 2.0 * u + u * u), 0.0, 1.0, budget
    )
    closed = math.log(2.0) + 0.5 * math.pi - 2.0
    return ConstantReport("c_prime", closed, "both", abs(quad - closed))


def const_c2_integral(budget: PrecisionBudget | None = None) -> ConstantReport:
    """int_0^1 u(2-u)^2/(2-2u+u^2) du; no closed form is on record, so the
    quadrature value stands alone."""
    budget = budget or _QUAD_BUDGET
    quad, err = integrate(
        lambda u: u * (2.0 - u) ** 2 / (2.0 - 2.0 * u + u * u), 0.0, 1.0, budget
    )
    return ConstantReport("c2_integral", quad, "quadrature", err)


def threshold_c() -> ConstantReport:
    """The floor 2(3 log 2 - pi/2) that the resonator cutoff constant c must
    exceed; about 1.0173."""
    return ConstantReport("c_threshold", c2_threshold(), "closed_form")


def choose_c(eta: float, X: float) -> float:
    """log c = log threshold + 5*eta - 1/sqrt(log_2 X)."""
    if eta <= 0:
        raise ValueError("choose_c requires eta > 0")
    l2 = math.log(math.log(X)) if X > 1 else float("nan")
    if not l2 > 0:
        raise ValueError("choose_c requires log_2 X > 0 (X > e)")
    return math.exp(math.log(c2_threshold()) + 5.0 * eta - 1.0 / math.sqrt(l2))


def alpha_b(b: float) -> ConstantReport:
    if not 0 < b < 1:
        raise ValueError("alpha_b requires 0 < b < 1")
    val = 2.0 * math.log((1.0 + b) ** 2 / (1.0 + b * b))
    return ConstantReport(f"alpha(b={b!r})", val, "closed_form")


def theta_b(b: float) -> ConstantReport:
    if not 0 <= b < 1:
        raise ValueError("theta_b requires 0 <= b < 1")
    val = math.log((1.0 + b * b) / (1.0 - b * b) ** 2)
    return ConstantReport(f"theta(b={b!r})", val, "closed_form")


def alpha_sigma_b(sigma: float, b: float) -> ConstantReport:
    if not 0.5 < sigma < 1:
        raise ValueError("alpha_sigma_b requires 1/2 < sigma < 1")
    a = alpha_b(b).value
    val = b / (1.0 - sigma) * a ** (sigma - 1.0)
    return ConstantReport(f"alpha(sigma={sigma!r},b={b!r})", val, "closed_form")


def const_sqrt_2_over_log2() -> ConstantReport:
    """sqrt(2/log 2) = 1.6986...; the limit of alpha_sigma_b as sigma -> 1/2
    and b -> 1."""
    return ConstantReport("sqrt_2_over_log2", math.sqrt(2.0 / math.log(2.0)), "closed_form")


def _log2x(X: float) -> float:
    if X <= 1:
        raise ValueError("iterated log needs X > e")
    l2 = math.log(math.log(X))
    if l2 <= 0:
        raise ValueError("iterated log needs X > e")
    return l2


def tau_eta(
    kind: str,
    X: float,
    eta: float,
    sigma: float | None = None,
    b: float | None = None,
) -> float:
    """Exceedance threshold of the proportion statements.

    kind="one":   log_2 X + log_3 X - C2 - eta          (X > e^e)
    kind="sigma": alpha(sigma,b) (1 - eta alpha(b))^(1-sigma)
                  (log X)^(1-sigma) (log_2 X)^(-sigma)  (0 < eta < 1/alpha(b))
    """
    if kind == "one":
        l2 = _log2x(X)
        if l2 <= 0 or X <= math.e**math.e:
            raise ValueError("kind='one' needs X > e^e")
        return l2 + math.log(l2) - const_C2().value - eta
    if kind == "sigma":
        if sigma is None or b is None:
            raise ValueError("kind='sigma' needs sigma and b")
        a = alpha_b(b).value
        if not 0 < eta < 1.0 / a:
            raise ValueError("kind='sigma' needs 0 < eta < 1/alpha(b)")
        l2 = _log2x(X)
        return (
            alpha_sigma_b(sigma, b).value
            * (1.0 - eta * a) ** (1.0 - sigma)
            * math.log(X) ** (1.0 - sigma)
            * l2 ** (-sigma)
        )
    raise ValueError(f"unknown tau kind {kind!r}")


def proportion_exponent(kind: str, eta: float, b: float | None = None) -> float:
    """Magnitude of the theoretical proportion exponent: e^-eta / 2 for the
    sigma=1 family, (1 - eta alpha(b)) / 2 on the sigma band."""
    if kind == "one":
        if eta < 0:
            raise ValueError("eta must be nonnegative")
        return 0.5 * math.exp(-eta)
    if kind == "sigma":
        if b is None:
            raise ValueError("kind='sigma' needs b")
        a = alpha_b(b).value
        if not 0 < eta < 1.0 / a:
            raise ValueError("kind='sigma' needs 0 < eta < 1/alpha(b)")
        return 0.5 * (1.0 - eta * a)
    raise ValueError(f"unknown proportion kind {kind!r}")


def const_prime_subfamily_offset() -> ConstantReport:
    """log(2 log 2) = 0.3266...: the smaller offset known for the prime
    subfamily, printed next to C2 for side-by-side comparison only."""
    return ConstantReport(
        "prime_subfamily_offset", math.log(2.0 * math.log(2.0)), "closed_form"
    )


def all_constant_reports() -> list[ConstantReport]:
    """Everything the constants CLI prints, in a fixed order."""
    reports = [
        const_C1(),
        const_C2(),
        const_prime_subfamily_offset(),
        const_c3(),
        const_cprime(),
        const_c2_integral(),
        threshold_c(),
        const_sqrt_2_over_log2(),
        alpha_b(0.9),
        theta_b(0.9),
        alpha_sigma_b(0.75, 0.9),
    ]
    return reports
