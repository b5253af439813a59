"""Critical exponents and regime classification.

The kernel constant C is strictly convex on (-1, 0) with C(0) = -1/(2*alpha)
and C -> +inf as tau -> -1+, so it has a unique root tau0(alpha) there.  tau0
fixes the upper critical power p* = 1 - 2*alpha/tau0 of the source-free
blow-up range, and together with the source growth exponent gamma it carves
the (alpha, p, gamma, tau) space into the existence / nonexistence zones that
`classify_regime` reports.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import AmbiguousRegimeError, ConvergenceError, DomainError
from .fields import ExteriorData, SourceField
from .quadrature import (
    DEFAULT_QUADRATURE,
    KernelConstants,
    QuadratureConfig,
    eval_C,
    eval_C_derivatives,
)

__all__ = [
    "ProblemParams",
    "RegimeZone",
    "RegimeReport",
    "find_tau0",
    "classify_regime",
    "special_window",
]


@dataclass(frozen=True)
class ProblemParams:
    """Equation parameters: fractional order alpha, reaction power p, data."""

    alpha: float
    p: float
    source: SourceField = field(default_factory=SourceField.zero)
    exterior: ExteriorData = field(default_factory=ExteriorData.zero)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha={self.alpha} outside (0, 1)")
        if not self.p > 1.0:
            raise DomainError(f"p={self.p} must exceed 1")
        if self.source.kind == "power_collar":
            self.source.validate_for(self.alpha)

    @property
    def interaction_exponent(self) -> float:
        """Boundary exponent -2*alpha/(p-1) of the pure interaction regime."""
        return -2.0 * self.alpha / (self.p - 1.0)


class RegimeZone(enum.Enum):
    EXISTENCE_INTERACTION = "existence_interaction"
    SPECIAL_TAU0 = "special_tau0"
    NONEXISTENCE_I = "nonexistence_i"
    NONEXISTENCE_II = "nonexistence_ii"
    NONEXISTENCE_III = "nonexistence_iii"
    WEAK_SOURCE = "weak_source"
    STRONG_SOURCE = "strong_source"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class RegimeReport:
    zone: RegimeZone
    predicted_exponent: float | None = None
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "zone": self.zone.value,
            "predicted_exponent": self.predicted_exponent,
            "notes": self.notes,
        }


def find_tau0(
    alpha: float,
    tol: float = 1e-10,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    method: str = "hybrid",
) -> KernelConstants:
    """Locate the unique root tau0(alpha) of C in (-1, 0).

    The bracket is seeded with C(0) = -1/(2*alpha) < 0 on the right and walks
    left toward -1 until C turns positive; "hybrid" then polishes by Newton
    (valid because C is strictly convex with C' < 0 at the root), while
    "bisect" refines by bisection only and serves as the independent slow path.
    Returns the constants bundle with the critical power p* and the sampled C
    values collected along the way.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if method not in ("hybrid", "bisect"):
        raise DomainError(f"unknown method {method!r}")

    samples: list[tuple[float, float]] = []

    def C(t: float) -> float:
        v = eval_C(t, alpha, cfg)
        samples.append((t, v))
        return v

    hi, f_hi = 0.0, -1.0 / (2.0 * alpha)
    lo = -0.5
    f_lo = C(lo)
    while f_lo <= 0.0:
        if f_lo <= 0.0 and lo < -1.0 + 1e-13:
            raise ConvergenceError(
                "could not bracket the kernel root: C stayed nonpositive up to -1 "
                "(quadrature misconfiguration?)"
            )
        hi, f_hi = lo, f_lo
        lo = -1.0 + 0.1 * (lo + 1.0)
        f_lo = C(lo)

    t, f_t = lo, f_lo
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        f_mid = C(mid)
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        t, f_t = mid, f_mid
        if abs(f_mid) < tol and method == "bisect":
            break
        if hi - lo < (1e-3 if method == "hybrid" else 1e-16):
            break
    else:
        raise ConvergenceError("bisection for tau0 did not terminate")

    if method == "hybrid":
        for _ in range(60):
            if abs(f_t) < tol:
                break
            d1, _ = eval_C_derivatives(t, alpha, cfg)
            step = f_t / d1 if d1 != 0 else 0.0
            cand = t - step
            if not lo < cand < hi or step == 0.0:
                cand = 0.5 * (lo + hi)
            f_cand = C(cand)
            if f_cand > 0.0:
                lo = cand
            else:
                hi = cand
            t, f_t = cand, f_cand
        else:
            raise ConvergenceError("Newton refinement of tau0 did not reach tolerance")

    return KernelConstants(
        alpha=alpha,
        tau0=t,
        p_star=1.0 - 2.0 * alpha / t,
        tau0_residual=f_t,
        c_of_tau_cache=samples,
    )


def _tie(x: float, y: float, rtol: float) -> bool:
    return abs(x - y) <= rtol * max(1.0, abs(x), abs(y))


def special_window(params: ProblemParams, kc: KernelConstants) -> tuple[float, float] | None:
    """Open p-interval on which the tau0-rate solution family exists, or None."""
    t0 = kc.tau0
    right = 1.0 - 2.0 * params.alpha / t0
    left = max(right + (t0 + 1.0) / t0, 1.0)
    if left >= right:
        return None
    return (left, right)


def classify_regime(
    params: ProblemParams,
    gamma: float | None = None,
    tau: float | None = None,
    kc: KernelConstants | None = None,
    boundary_rtol: float = 1e-9,
) -> RegimeReport:
    """Assign (alpha, p [, gamma] [, tau]) to its existence/nonexistence zone.

    gamma defaults to the exponent of a power-collar source on `params`; tau,
    when given, asks specifically about solutions with boundary rate d^tau.
    Comparisons that land within boundary_rtol of a zone boundary raise
    AmbiguousRegimeError instead of being silently resolved (the one exception
    is the weak-source lower endpoint, which the theory closes).
    """
    if kc is None:
        kc = find_tau0(params.alpha)
    if not math.isclose(kc.alpha, params.alpha, rel_tol=1e-12):
        raise DomainError("kernel constants were computed for a different alpha")
    alpha, p = params.alpha, params.p
    tau0, p_star = kc.tau0, kc.p_star
    p_low = 1.0 + 2.0 * alpha
    tau_inter = -2.0 * alpha / (p - 1.0)

    if gamma is None and params.source.kind == "power_collar":
        gamma = params.source.gamma
    if gamma is not None and not -1.0 - 2.0 * alpha < gamma < 0.0:
        raise DomainError(f"gamma={gamma} outside (-1-2*alpha, 0)")
    if tau is not None and not -1.0 < tau < 0.0:
        raise DomainError(f"tau={tau} outside (-1, 0)")

    def tie_check(x, y, what):
        if _tie(x, y, boundary_rtol):
            raise AmbiguousRegimeError(
                f"{what}: {x!r} ties {y!r} at floating-point resolution"
            )

    if gamma is not None:
        gamma_lo = -2.0 * alpha - 2.0 * alpha / (p - 1.0)
        # the weak-source range is closed at gamma_lo, so a tie there is fine
        weak_or_better = gamma >= gamma_lo or _tie(gamma, gamma_lo, boundary_rtol)
        if not weak_or_better:
            # strong source
            tie_check(p, p_low, "strong-source power bound")
            if p > p_low:
                predicted = gamma / p
                if tau is not None:
                    if _tie(tau, predicted, boundary_rtol):
                        return RegimeReport(RegimeZone.STRONG_SOURCE, predicted)
                    return RegimeReport(
                        RegimeZone.UNCLASSIFIED,
                        None,
                        f"strong source admits only rate d^{predicted:.6g}; "
                        f"rate d^{tau:.6g} is excluded",
                    )
                return RegimeReport(RegimeZone.STRONG_SOURCE, predicted)
            return RegimeReport(
                RegimeZone.UNCLASSIFIED, None, "strong source with p <= 1+2*alpha: not covered"
            )
        tie_check(gamma, -2.0 * alpha, "weak-source upper endpoint")
        if gamma < -2.0 * alpha:
            tie_check(p, p_star, "critical power")
            if p > p_star:
                predicted = gamma + 2.0 * alpha
                if tau is not None:
                    if _tie(tau, predicted, boundary_rtol):
                        return RegimeReport(RegimeZone.WEAK_SOURCE, predicted)
                    return RegimeReport(
                        RegimeZone.UNCLASSIFIED,
                        None,
                        f"weak source admits only rate d^{predicted:.6g}; "
                        f"rate d^{tau:.6g} is excluded",
                    )
                return RegimeReport(RegimeZone.WEAK_SOURCE, predicted)
            # p below critical with a source that still satisfies the growth cap
            tie_check(p, p_low, "interaction power range")
            if p > p_low:
                return RegimeReport(
                    RegimeZone.EXISTENCE_INTERACTION,
                    tau_inter,
                    "source within the admissible growth cap; interaction rate prevails",
                )
            return RegimeReport(
                RegimeZone.UNCLASSIFIED, None, "weak-range source with subcritical power"
            )
        # gamma in [-2*alpha, 0): source too tame to drive the explosion
        gamma = None

    # source-free (or tame-source) classification
    tie_check(p, p_low, "lower power bound")
    tie_check(p, p_star, "critical power")
    in_interaction = p_low < p < p_star

    if tau is None:
        if in_interaction:
            return RegimeReport(RegimeZone.EXISTENCE_INTERACTION, tau_inter)
        if p > p_star:
            return RegimeReport(
                RegimeZone.NONEXISTENCE_II, None, "no boundary power rate is attainable"
            )
        return RegimeReport(
            RegimeZone.NONEXISTENCE_III,
            None,
            "no boundary power rate is attainable except possibly d^tau0",
        )

    if in_interaction:
        if _tie(tau, tau_inter, boundary_rtol):
            return RegimeReport(RegimeZone.EXISTENCE_INTERACTION, tau_inter)
        if _tie(tau, tau0, boundary_rtol):
            window = special_window(params, kc)
            if window is not None and window[0] < p < window[1]:
                return RegimeReport(
                    RegimeZone.SPECIAL_TAU0,
                    tau0,
                    "one-parameter family with gap exponent "
                    f"{min(tau0 * p + 2.0 * alpha, 0.0):.6g}",
                )
            return RegimeReport(
                RegimeZone.UNCLASSIFIED, None, "tau0 rate outside the proven special window"
            )
        return RegimeReport(RegimeZone.NONEXISTENCE_I, None)
    if p > p_star:
        return RegimeReport(RegimeZone.NONEXISTENCE_II, None)
    # p < 1 + 2*alpha
    if _tie(tau, tau0, boundary_rtol):
        return RegimeReport(
            RegimeZone.UNCLASSIFIED, None, "tau0 rate with subcritical power: not covered"
        )
    return RegimeReport(RegimeZone.NONEXISTENCE_III, None)
