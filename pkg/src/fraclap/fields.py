"""Descriptors for the interior source f and the exterior data g.

Both are boundary-growth fields: the physically relevant shapes are a power of
the boundary distance d(x) on a collar, so the descriptors store (exponent,
amplitude) pairs and evaluate on demand.  Tabulated variants carry explicit
samples for data that comes from files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

__all__ = ["ExteriorData", "SourceField"]


@dataclass(frozen=True)
class ExteriorData:
    """Exterior values g on the complement of (0, 1).

    kind "zero":         g identically 0.
    kind "power_collar": g(z) = kappa_g * d(z)^beta for d(z) <= eta, frozen at
                         kappa_g * eta^beta further out (bounded continuation),
                         where d(z) is the distance from z to {0, 1}.
    kind "tabulated":    piecewise-linear through (z, g) samples outside [0,1],
                         zero beyond the sampled range.
    """

    kind: str = "zero"
    beta: float = -0.5
    kappa_g: float = 1.0
    eta: float = 0.5
    table_z: tuple = ()
    table_g: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "power_collar", "tabulated"):
            raise DomainError(f"unknown exterior kind {self.kind!r}")
        if self.kind == "power_collar":
            if not -1.0 < self.beta < 0.0:
                raise DomainError("power-collar exterior needs beta in (-1, 0)")
            if self.kappa_g <= 0:
                raise DomainError("power-collar exterior needs kappa_g > 0")
            if self.eta <= 0:
                raise DomainError("power-collar exterior needs eta > 0")
        if self.kind == "tabulated":
            z = np.asarray(self.table_z, dtype=float)
            if z.size < 2 or np.any((z > 0.0) & (z < 1.0)):
                raise DomainError("tabulated exterior needs >= 2 samples outside (0, 1)")

    @classmethod
    def zero(cls) -> "ExteriorData":
        return cls(kind="zero")

    @classmethod
    def power_collar(cls, beta: float, kappa_g: float = 1.0, eta: float = 0.5) -> "ExteriorData":
        return cls(kind="power_collar", beta=beta, kappa_g=kappa_g, eta=eta)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def value(self, z):
        """g at exterior points z (vectorized); zero inside [0, 1]."""
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        outside = (z <= 0.0) | (z >= 1.0)
        if self.kind == "power_collar":
            dist = np.where(z <= 0.0, -z, z - 1.0)
            dist = np.maximum(dist, 1e-300)
            out = np.where(
                outside,
                self.kappa_g * np.minimum(dist, self.eta) ** self.beta,
                0.0,
            )
            out[dist <= 0.0] = 0.0
        elif self.kind == "tabulated":
            zs = np.asarray(self.table_z, dtype=float)
            gs = np.asarray(self.table_g, dtype=float)
            order = np.argsort(zs)
            out = np.where(outside, np.interp(z, zs[order], gs[order], left=0.0, right=0.0), 0.0)
        return out

    def weighted_l1(self, alpha: float) -> float:
        """int over the exterior of |g(y)| / (1 + |y|^(1+2*alpha)) dy.

        Finite for every admissible descriptor (beta > -1); returned so callers
        can assert membership in the weighted-L1 class required of exterior data.
        """
        if self.is_zero:
            return 0.0

        def f(y):
            return abs(float(self.value(y))) / (1.0 + abs(y) ** (1.0 + 2.0 * alpha))

        left, _ = quad(f, -np.inf, 0.0, limit=200)
        right, _ = quad(f, 1.0, np.inf, limit=200)
        return left + right


@dataclass(frozen=True)
class SourceField:
    """Interior source f on (0, 1).

    kind "zero":         f identically 0.
    kind "power_collar": f(x) = kappa_f * d(x)^gamma with d(x) = min(x, 1-x).
    kind "tabulated":    piecewise-linear samples on (0, 1).
    """

    kind: str = "zero"
    gamma: float = -0.5
    kappa_f: float = 1.0
    sign_nonneg: bool = True
    table_x: tuple = ()
    table_f: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "power_collar", "tabulated"):
            raise DomainError(f"unknown source kind {self.kind!r}")
        if self.kind == "power_collar" and not self.gamma < 0:
            raise DomainError("power-collar source needs gamma < 0")

    @classmethod
    def zero(cls) -> "SourceField":
        return cls(kind="zero")

    @classmethod
    def power_collar(cls, gamma: float, kappa_f: float = 1.0) -> "SourceField":
        return cls(kind="power_collar", gamma=gamma, kappa_f=kappa_f, sign_nonneg=kappa_f >= 0)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def value(self, x):
        """f at interior points x (vectorized)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "power_collar":
            d = np.minimum(x, 1.0 - x)
            return self.kappa_f * d**self.gamma
        xs = np.asarray(self.table_x, dtype=float)
        fs = np.asarray(self.table_f, dtype=float)
        order = np.argsort(xs)
        return np.interp(x, xs[order], fs[order])

    def validate_for(self, alpha: float) -> None:
        """Check the exponent against the admissible growth range for this alpha."""
        if self.kind == "power_collar" and not -1.0 - 2.0 * alpha < self.gamma < 0.0:
            raise DomainError(
                f"source exponent gamma={self.gamma} outside (-1-2*alpha, 0) for alpha={alpha}"
            )
