"""Explicit super/sub-solution candidates and their numerical verification.

Every comparison object the solver machinery needs is a linear combination of
four primitive shapes: the distance-power profile d^tau (collar singular), the
interval indicator, the torsion function (operator value exactly -1), and the
compactly supported smooth bump.  A BarrierSpec is such a combination together
with the fractional order; its operator values come from the semi-analytic
paths in `fraclap.operator`, so verification never depends on a grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DomainError, VerificationError
from .exponents import KernelConstants, ProblemParams, RegimeReport, RegimeZone
from .grid import Grid1D, GridFunction
from .operator import (
    DistanceProfile,
    assemble,
    eval_on_power,
    frac_lap_of_c2,
    tail_coefficient,
)

__all__ = [
    "BarrierSpec",
    "BarrierReport",
    "PowerTerm",
    "IndicatorTerm",
    "TorsionTerm",
    "BumpTerm",
    "make_existence_pair",
    "make_special_pair",
    "make_nonexistence_family",
    "verify_barrier",
    "torsion",
    "globalize_pair",
    "bump_admissible_scale",
    "collar_points",
]

MU_SWEEP_RANGE = 20  # geometric search mu in {2^k}, k in [-MU_SWEEP_RANGE, MU_SWEEP_RANGE]
_TERM_OP_CACHE: dict = {}


def collar_points(delta: float = 0.1, d_min: float = 1e-5, n: int = 64) -> np.ndarray:
    """Geometrically spaced boundary distances used for collar verification."""
    return np.geomspace(d_min, delta, n)


# ---------------------------------------------------------------------------
# primitive terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerTerm:
    """d^tau on the collar, positive C^2 continuation inside, zero outside."""

    profile: DistanceProfile

    @property
    def tau(self) -> float:
        return self.profile.tau

    def cache_key(self) -> tuple:
        return ("power", self.profile.tau, self.profile.delta)

    def value(self, x):
        return self.profile.value(x)

    def op(self, x: float, alpha: float, enforce_floor: bool = True) -> float:
        return eval_on_power(
            self.profile.tau, alpha, x, self.profile, _enforce_floor=enforce_floor
        )

    def describe(self) -> dict:
        return {"kind": "power_distance", "tau": self.profile.tau, "delta": self.profile.delta}


@dataclass(frozen=True)
class IndicatorTerm:
    """Characteristic function of the interval; operator known in closed form."""

    def cache_key(self) -> tuple:
        return ("indicator",)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return ((x > 0.0) & (x < 1.0)).astype(float)

    def op(self, x: float, alpha: float, enforce_floor: bool = True) -> float:
        return float(tail_coefficient(x, alpha))

    def describe(self) -> dict:
        return {"kind": "indicator"}


@dataclass(frozen=True)
class TorsionTerm:
    """Grid solution of (operator) V = -1 with zero exterior.

    Its operator value is -1 by construction (up to the linear solve residual,
    which is recorded); values at off-node points interpolate linearly.
    """

    values: GridFunction
    solve_residual: float = 0.0

    def cache_key(self) -> tuple:
        return ("torsion",)

    def value(self, x):
        return self.values.interp(x)

    def op(self, x: float, alpha: float, enforce_floor: bool = True) -> float:
        return -1.0

    def describe(self) -> dict:
        return {"kind": "torsion", "solve_residual": self.solve_residual}


@dataclass(frozen=True)
class BumpTerm:
    """c * (4x(1-x))^3 inside the interval, zero outside."""

    c: float = 1.0

    def cache_key(self) -> tuple:
        return ("bump", self.c)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 1.0)
        out = np.zeros_like(x)
        out[inside] = self.c * (4.0 * x[inside] * (1.0 - x[inside])) ** 3
        return out

    def _scalar(self, z: float) -> float:
        if 0.0 < z < 1.0:
            return self.c * (4.0 * z * (1.0 - z)) ** 3
        return 0.0

    def op(self, x: float, alpha: float, enforce_floor: bool = True) -> float:
        return frac_lap_of_c2(self._scalar, x, alpha)

    def describe(self) -> dict:
        return {"kind": "bump", "c": self.c}


# ---------------------------------------------------------------------------
# barrier combinations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierSpec:
    """Linear combination of primitive terms for a fixed fractional order."""

    alpha: float
    terms: tuple  # of (coefficient, term) pairs

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, term in self.terms:
            out = out + c * term.value(x)
        return out

    def op_values(self, xs, enforce_floor: bool = True) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.zeros_like(xs)
        for c, term in self.terms:
            out += c * np.array(
                [term.op(float(x), self.alpha, enforce_floor) for x in xs]
            )
        return out

    def term_arrays(self, xs) -> list[tuple[float, np.ndarray, np.ndarray]]:
        """(coefficient, values, operator values) per term; lets callers sweep
        coefficients without re-evaluating the semi-analytic integrals.
        Operator arrays are memoized per (term, point set)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = []
        for c, term in self.terms:
            key = (term.cache_key(), self.alpha, xs.tobytes())
            ops = _TERM_OP_CACHE.get(key)
            if ops is None:
                ops = np.array([term.op(float(x), self.alpha) for x in xs])
                if len(_TERM_OP_CACHE) > 256:
                    _TERM_OP_CACHE.clear()
                _TERM_OP_CACHE[key] = ops
            out.append((c, np.asarray(term.value(xs), dtype=float), ops))
        return out

    @property
    def leading_tau(self) -> float:
        taus = [term.tau for _, term in self.terms if isinstance(term, PowerTerm)]
        return min(taus) if taus else 0.0

    def scaled(self, factor: float) -> "BarrierSpec":
        return BarrierSpec(self.alpha, tuple((c * factor, t) for c, t in self.terms))

    def with_term(self, coef: float, term) -> "BarrierSpec":
        return BarrierSpec(self.alpha, self.terms + ((coef, term),))

    def describe(self) -> list:
        return [{"coefficient": c, **t.describe()} for c, t in self.terms]


@dataclass
class BarrierReport:
    """Outcome of a sign verification over a set of points."""

    role: str
    passed: bool
    worst_margin: float
    worst_x: float
    nodes: np.ndarray
    margins: np.ndarray
    mu: float | None = None
    zone: str | None = None
    notes: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "role": self.role,
                "passed": bool(self.passed),
                "worst_margin": float(self.worst_margin),
                "worst_x": float(self.worst_x),
                "mu": self.mu,
                "zone": self.zone,
                "notes": self.notes,
                "nodes": [float(v) for v in self.nodes],
                "margins": [float(v) for v in self.margins],
            },
            sort_keys=True,
        )


def _signed_power(u: np.ndarray, p: float) -> np.ndarray:
    return np.sign(u) * np.abs(u) ** p


def _margins(
    residuals: np.ndarray, d: np.ndarray, role: str, tau: float, p: float
) -> np.ndarray:
    scale = d ** (tau * p)
    m = residuals / scale
    return m if role == "super" else -m


def verify_barrier(
    b: BarrierSpec,
    params: ProblemParams,
    role: str,
    collar_nodes,
    tol_rel: float = 1e-6,
    _arrays=None,
) -> BarrierReport:
    """Check the defining inequality of a super- ("super") or sub-solution
    ("sub") at the given interior points.

    The residual op(b) + |b|^(p-1) b - f is normalized by d^(tau*p), the
    natural magnitude of its leading terms, and the verdict allows a relative
    slack tol_rel for quadrature noise.  Always returns a report; it never
    raises on failure.
    """
    if role not in ("super", "sub"):
        raise DomainError(f"role must be 'super' or 'sub', got {role!r}")
    xs = np.atleast_1d(np.asarray(collar_nodes, dtype=float))
    d = np.minimum(xs, 1.0 - xs)
    if _arrays is None:
        vals = np.asarray(b.value(xs), dtype=float)
        ops = b.op_values(xs)
    else:
        vals, ops = _arrays
    f_vals = params.source.value(xs)
    residuals = ops + _signed_power(vals, params.p) - f_vals
    margins = _margins(residuals, d, role, b.leading_tau, params.p)
    worst = int(np.argmin(margins))
    return BarrierReport(
        role=role,
        passed=bool(margins[worst] >= -tol_rel),
        worst_margin=float(margins[worst]),
        worst_x=float(xs[worst]),
        nodes=xs,
        margins=margins,
    )


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def _existence_tau(params: ProblemParams, regime: RegimeReport) -> float:
    if regime.zone is RegimeZone.EXISTENCE_INTERACTION:
        return params.interaction_exponent
    if regime.zone is RegimeZone.WEAK_SOURCE:
        return params.source.gamma + 2.0 * params.alpha
    if regime.zone is RegimeZone.STRONG_SOURCE:
        return params.source.gamma / params.p
    raise DomainError(f"no existence barrier construction for zone {regime.zone}")


def _sweep_mu(test_fn, mus, what: str):
    """Return the first mu accepted by test_fn, else raise with the last report."""
    last = None
    for mu in mus:
        report = test_fn(mu)
        if report.passed:
            report.mu = float(mu)
            return mu, report
        last = report
    msg = f"no admissible amplitude found for {what}"
    if last is not None:
        msg += f" (worst margin {last.worst_margin:.3e} at x={last.worst_x:.3e})"
    raise VerificationError(msg)


def make_existence_pair(
    params: ProblemParams,
    kc: KernelConstants,
    regime: RegimeReport,
    collar=None,
    delta: float = 0.1,
    tol_rel: float = 1e-6,
) -> tuple[BarrierSpec, BarrierSpec]:
    """Ordered (super, sub) pair mu_bar * V_tau >= mu * V_tau on the collar.

    tau is the regime's boundary exponent; the amplitudes come from a geometric
    sweep (large for the super-solution, small for the sub-solution), each kept
    at the first verifying value.
    """
    tau = _existence_tau(params, regime)
    profile = DistanceProfile(tau=tau, delta=delta)
    base = BarrierSpec(params.alpha, ((1.0, PowerTerm(profile)),))
    xs = collar_points(delta) if collar is None else np.asarray(collar, dtype=float)
    arrays = base.term_arrays(xs)
    _, vals, ops = arrays[0]

    def test(mu, role):
        d = np.minimum(xs, 1.0 - xs)
        resid = mu * ops + _signed_power(mu * vals, params.p) - params.source.value(xs)
        margins = _margins(resid, d, role, tau, params.p)
        worst = int(np.argmin(margins))
        return BarrierReport(
            role=role,
            passed=bool(margins[worst] >= -tol_rel),
            worst_margin=float(margins[worst]),
            worst_x=float(xs[worst]),
            nodes=xs,
            margins=margins,
        )

    ks = range(-MU_SWEEP_RANGE, MU_SWEEP_RANGE + 1)
    mu_super, _ = _sweep_mu(lambda m: test(m, "super"), [2.0**k for k in ks], "super-solution")
    mu_sub, _ = _sweep_mu(lambda m: test(m, "sub"), [2.0**k for k in reversed(ks)], "sub-solution")
    if mu_super < 2.0 * mu_sub:
        mu_super = 2.0 * mu_sub
        if not test(mu_super, "super").passed:
            raise VerificationError("super-solution amplitude lost admissibility when re-ordered")
    return base.scaled(mu_super), base.scaled(mu_sub)


def make_special_pair(
    params: ProblemParams,
    kc: KernelConstants,
    t: float,
    collar=None,
    delta: float = 0.1,
    tol_rel: float = 1e-6,
) -> tuple[BarrierSpec, BarrierSpec]:
    """Pair t*V_tau0 - mu*V_tau1 for the critical-rate family, mu growing from
    the super- to the sub-solution (the residual is strictly decreasing in mu,
    so the two amplitudes bracket the crossover).

    tau1 = min(tau0 * p + 2*alpha, 0); at tau1 = 0 the second term degenerates
    to the interval indicator.
    """
    if t <= 0:
        raise DomainError("family parameter t must be positive")
    from .exponents import special_window

    window = special_window(params, kc)
    if window is None or not window[0] < params.p < window[1]:
        raise DomainError(f"p={params.p} outside the special-existence window {window}")
    tau0 = kc.tau0
    tau1 = min(tau0 * params.p + 2.0 * params.alpha, 0.0)
    lead = PowerTerm(DistanceProfile(tau=tau0, delta=delta))
    second = IndicatorTerm() if tau1 == 0.0 else PowerTerm(DistanceProfile(tau=tau1, delta=delta))
    xs = collar_points(delta) if collar is None else np.asarray(collar, dtype=float)
    probe = BarrierSpec(params.alpha, ((t, lead), (-1.0, second)))
    arrays = probe.term_arrays(xs)
    (_, lead_vals, lead_ops), (_, sec_vals, sec_ops) = arrays
    d = np.minimum(xs, 1.0 - xs)

    def test(mu, role):
        vals = t * lead_vals - mu * sec_vals
        ops = t * lead_ops - mu * sec_ops
        resid = ops + _signed_power(vals, params.p) - params.source.value(xs)
        margins = _margins(resid, d, role, tau0, params.p)
        worst = int(np.argmin(margins))
        return BarrierReport(
            role=role,
            passed=bool(margins[worst] >= -tol_rel),
            worst_margin=float(margins[worst]),
            worst_x=float(xs[worst]),
            nodes=xs,
            margins=margins,
        )

    scale = t**params.p
    mus = [0.0] + [scale * 2.0**k for k in range(-MU_SWEEP_RANGE, MU_SWEEP_RANGE + 1)]
    mu1, _ = _sweep_mu(lambda m: test(m, "super"), mus, "critical-family super-solution")
    mu2, _ = _sweep_mu(lambda m: test(m, "sub"), mus[1:], "critical-family sub-solution")
    if not mu2 > mu1:
        raise VerificationError(
            f"critical-family amplitudes failed to order: mu_super={mu1}, mu_sub={mu2}"
        )
    mk = lambda mu: BarrierSpec(params.alpha, ((t, lead), (-mu, second)))
    return mk(mu1), mk(mu2)


_ZONE_ROLES = {1: "super", 2: "super", 3: "sub", 4: "super", 5: "sub"}


def classify_zone6(
    p: float, tau: float, kc: KernelConstants, rtol: float = 1e-9
) -> tuple[int, str]:
    """Map (p, tau) to the nonexistence-family zone {1..5} and its role.

    Zones 1, 2, 4 produce super-solutions (mu > 0); zones 3, 5 sub-solutions
    (mu < 0).  Parameters on a zone boundary raise.
    """
    alpha = kc.alpha
    tau0, p_star = kc.tau0, kc.p_star
    p_low = 1.0 + 2.0 * alpha
    tau_i = -2.0 * alpha / (p - 1.0)
    near = lambda a_, b_: abs(a_ - b_) <= rtol * max(1.0, abs(a_), abs(b_))
    if near(tau, tau0) and near(p, p_star):
        return 4, _ZONE_ROLES[4]
    if near(tau, tau0) or (near(p, p_low) and tau < tau0) or (near(tau, tau_i) and p > p_low):
        raise DomainError(
            f"(p={p}, tau={tau}) sits on a zone boundary of the nonexistence family"
        )
    if tau > tau0:
        return 1, _ZONE_ROLES[1]
    if p > p_low and tau < tau_i:
        return 2, _ZONE_ROLES[2]
    if p_low < p <= p_star and tau_i < tau < tau0:
        return 3, _ZONE_ROLES[3]
    if p <= p_low and tau < tau0:
        return 5, _ZONE_ROLES[5]
    raise DomainError(f"(p={p}, tau={tau}) is not covered by any nonexistence zone")


def make_nonexistence_family(
    params: ProblemParams,
    kc: KernelConstants,
    t: float,
    tau: float,
    collar=None,
    interior=None,
    delta: float = 0.1,
    tol_rel: float = 1e-6,
) -> tuple[BarrierSpec, BarrierReport]:
    """One member t*V_tau + mu(t)*V_0 of the rate-excluding family.

    mu is searched with the sign the zone prescribes (positive for
    super-solution zones, negative for sub-solution zones) over collar and
    interior points together; the report records the zone, role and amplitude.
    """
    if t <= 0:
        raise DomainError("family parameter t must be positive")
    zone, role = classify_zone6(params.p, tau, kc)
    xs_collar = collar_points(delta) if collar is None else np.asarray(collar, dtype=float)
    xs_int = np.linspace(delta, 0.5, 12) if interior is None else np.asarray(interior, dtype=float)
    xs = np.unique(np.concatenate([xs_collar, xs_int]))
    d = np.minimum(xs, 1.0 - xs)

    base = BarrierSpec(
        params.alpha,
        ((t, PowerTerm(DistanceProfile(tau=tau, delta=delta))), (1.0, IndicatorTerm())),
    )
    (_, lead_vals, lead_ops), (_, ind_vals, ind_ops) = base.term_arrays(xs)

    def test(mu):
        vals = t * lead_vals + mu * ind_vals
        ops = t * lead_ops + mu * ind_ops
        resid = ops + _signed_power(vals, params.p) - params.source.value(xs)
        margins = _margins(resid, d, role, tau, params.p)
        worst = int(np.argmin(margins))
        return BarrierReport(
            role=role,
            passed=bool(margins[worst] >= -tol_rel),
            worst_margin=float(margins[worst]),
            worst_x=float(xs[worst]),
            nodes=xs,
            margins=margins,
            zone=f"zone{zone}",
        )

    sign = 1.0 if role == "super" else -1.0
    mus = [sign * 2.0**k for k in range(-MU_SWEEP_RANGE, MU_SWEEP_RANGE + 1)]
    mu, report = _sweep_mu(test, mus, f"nonexistence family in zone {zone}")
    return BarrierSpec(
        params.alpha, ((t, base.terms[0][1]), (mu, base.terms[1][1]))
    ), report


def torsion(grid: Grid1D, alpha: float, op=None) -> tuple[GridFunction, TorsionTerm]:
    """Grid solution of (operator) V = -1 with zero exterior data.

    Strictly negative inside the interval; returned both as a grid function
    and as a barrier term whose operator value is -1 by definition.  Pass a
    pre-assembled operator to skip the assembly cost.
    """
    if op is None:
        op = assemble(grid, alpha)
    A = op.interaction + np.diag(op.tail)
    try:
        lu = lu_factor(A)
    except Exception as exc:  # pragma: no cover - assembly guards make this unreachable
        raise VerificationError(f"torsion linear solve failed: {exc}") from exc
    vals = lu_solve(lu, -np.ones(grid.n_interior))
    gf = GridFunction(grid, vals)
    resid = float(np.max(np.abs(A @ vals + 1.0)))
    if not np.all(vals < 0.0):
        raise VerificationError("torsion function is not negative everywhere")
    return gf, TorsionTerm(values=gf, solve_residual=resid)


def globalize_pair(
    pair: tuple[BarrierSpec, BarrierSpec],
    torsion_term: TorsionTerm,
    params: ProblemParams,
    nodes,
    tol_rel: float = 1e-6,
    max_doublings: int = 40,
) -> tuple[BarrierSpec, BarrierSpec]:
    """Extend a collar-verified pair to all of the interval by adding
    +-lambda times the torsion function (operator value -1), with lambda from
    a geometric search until both inequalities hold at every supplied node.

    The torsion term is negative, so the super-solution gains -lambda * V
    (pointwise increase, operator gain +lambda) and the sub-solution gains
    +lambda * V; ordering is preserved automatically.
    """
    sup, sub = pair
    xs = np.atleast_1d(np.asarray(nodes, dtype=float))
    d = np.minimum(xs, 1.0 - xs)
    f_vals = params.source.value(xs)
    tor_vals = np.asarray(torsion_term.value(xs), dtype=float)

    sup_arrays = sup.term_arrays(xs)
    sub_arrays = sub.term_arrays(xs)

    def margins_for(arrays, lam_signed, role):
        vals = sum(c * v for c, v, _ in arrays) + lam_signed * tor_vals
        ops = sum(c * o for c, _, o in arrays) + lam_signed * (-1.0)
        resid = ops + _signed_power(vals, params.p) - f_vals
        tau_lead = min(
            [t.tau for c, t in (sup if role == "super" else sub).terms if isinstance(t, PowerTerm)],
            default=0.0,
        )
        return _margins(resid, d, role, tau_lead, params.p)

    lam = 0.0
    for _ in range(max_doublings):
        m_sup = margins_for(sup_arrays, -lam, "super")
        m_sub = margins_for(sub_arrays, +lam, "sub")
        if m_sup.min() >= -tol_rel and m_sub.min() >= -tol_rel:
            sup_g = sup.with_term(-lam, torsion_term) if lam else sup
            sub_g = sub.with_term(+lam, torsion_term) if lam else sub
            return sup_g, sub_g
        lam = max(1.0, 2.0 * lam)
    raise VerificationError(
        f"global extension failed: worst margins super={m_sup.min():.3e}, sub={m_sub.min():.3e}"
    )


def bump_admissible_scale(alpha: float, n_probe: int = 101) -> float:
    """Largest bump amplitude c with operator values bounded by one.

    Scales the unit bump by the reciprocal of its operator supremum over a
    probe set (the supremum of a continuous function estimated on a fine grid).
    """
    xs = np.linspace(0.005, 0.995, n_probe)
    unit = BumpTerm(c=1.0)
    sup = max(unit.op(float(x), alpha) for x in xs)
    if sup <= 0:
        raise VerificationError("unit bump operator supremum came out nonpositive")
    return 1.0 / sup
