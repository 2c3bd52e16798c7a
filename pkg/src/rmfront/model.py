"""Rosenzweig-MacArthur reaction terms, Jacobian, equilibria and validity checks.

The predator growth constant is fixed to one throughout.
"""

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DomainError, InvalidInput

__all__ = [
    "Check",
    "Equilibria",
    "ModelParams",
    "ValidityReport",
    "equilibria",
    "jacobian",
    "kzero_bound",
    "min_speed",
    "reaction",
    "validate",
]


@dataclass(frozen=True)
class ModelParams:
    """The five scalars that define a run.

    Only the structural conditions (0 < alpha < 1, eta > 0, nonnegative
    delta and epsilon, c > 0) are enforced here; everything else is
    reported by :func:`validate`.
    """

    alpha: float
    eta: float
    delta: float
    epsilon: float
    c: float

    def __post_init__(self):
        for name in ("alpha", "eta", "delta", "epsilon", "c"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidInput(f"{name} must be a finite real number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInput(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.eta > 0.0:
            raise InvalidInput(f"eta must be positive, got {self.eta}")
        if self.delta < 0.0 or self.epsilon < 0.0:
            raise InvalidInput("delta and epsilon must be nonnegative")
        if not self.c > 0.0:
            raise InvalidInput(f"c must be positive, got {self.c}")

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)

    @property
    def a_plus(self):
        """g_w at the prey-only state, (1 - alpha) / (1 + eta)."""
        return (1.0 - self.alpha) / (1.0 + self.eta)


def _check_domain(u, eta):
    u = np.asarray(u, dtype=float)
    if np.any(u <= -1.0) or np.any(u == -eta):
        raise DomainError("reaction terms are singular at u = -1 and u = -eta")


def reaction(u, w, params):
    """Return ``(f, g)`` at ``(u, w)``; arrays broadcast."""
    _check_domain(u, params.eta)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    f = u * (1.0 - u) - u * w / (1.0 + u)
    g = w * (u - params.alpha) / (params.eta + u)
    if f.ndim == 0:
        return float(f), float(g)
    return f, g


def jacobian(u, w, params):
    """Return ``(f_u, f_w, g_u, g_w)`` at ``(u, w)``; arrays broadcast."""
    _check_domain(u, params.eta)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    a, eta = params.alpha, params.eta
    fu = 1.0 - 2.0 * u - w / (1.0 + u) ** 2
    fw = -u / (1.0 + u)
    gu = (eta + a) * w / (eta + u) ** 2
    gw = (u - a) / (eta + u)
    fu, fw, gu, gw = np.broadcast_arrays(fu, fw, gu, gw)
    if fu.ndim == 0:
        return float(fu), float(fw), float(gu), float(gw)
    return fu, fw, gu, gw


@dataclass(frozen=True)
class Equilibria:
    A: tuple
    B: tuple
    O: tuple


def equilibria(params):
    """Coexistence state A, prey-only state B and the origin O."""
    a = params.alpha
    return Equilibria(A=(a, 1.0 - a * a), B=(1.0, 0.0), O=(0.0, 0.0))


def min_speed(params):
    """Minimal front speed 2 sqrt((1 - alpha) / (eta + 1))."""
    return 2.0 * math.sqrt((1.0 - params.alpha) / (params.eta + 1.0))


def kzero_bound(params):
    """Upper bound on delta below which the discriminant has two positive roots."""
    a, eta = params.alpha, params.eta
    return a**3 * (eta + a) / ((1.0 + a) * (1.0 - a * a))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]


def validate(params):
    """Run every parameter-validity check and report each individually."""
    checks = []
    checks.append(Check("alpha", 0.0 < params.alpha < 1.0, f"alpha={params.alpha}"))
    checks.append(Check("eta", params.eta > 0.0, f"eta={params.eta}"))
    cmin = min_speed(params)
    checks.append(Check("speed", params.c > cmin, f"c={params.c} vs min speed {cmin:.6g}"))
    regime = params.delta > 0.0 and params.epsilon <= params.delta
    checks.append(
        Check("regime", regime, f"need 0 <= epsilon <= delta, delta > 0 "
              f"(epsilon={params.epsilon}, delta={params.delta})")
    )
    kb = kzero_bound(params)
    checks.append(Check("kzero", params.delta < kb, f"delta={params.delta} vs bound {kb:.6g}"))
    return ValidityReport(tuple(checks))
