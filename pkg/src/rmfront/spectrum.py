"""Closed-form essential-spectrum boundaries and admissible weights.

Curves are the dispersion relations of the constant-coefficient limits
at either end of the front. At the prey-only end they are two parabolas;
at the coexistence end they solve a 2x2 determinant condition whose
discriminant in k^2 splits them into a complex-pair part on (k1, k2)
and a real-root part on the complement.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidInput
from .model import kzero_bound, min_speed

__all__ = [
    "SpectralCurve",
    "WeightInterval",
    "curve_residual",
    "disc_roots",
    "ess_curves_minus",
    "ess_curves_plus",
    "export_curves",
    "kpp_ess_curves",
    "minus_determinant",
    "spectral_gap",
    "spectrum_summary",
    "weight_interval",
    "weighted_curves_plus",
]


@dataclass
class SpectralCurve:
    """Samples k -> lambda(k) of one boundary branch."""

    label: str
    k: np.ndarray
    lam: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def max_real(self):
        return float(np.max(self.lam.real)) if self.lam.size else -math.inf

    def __len__(self):
        return self.k.size


def _as_grid(k_grid):
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1:
        raise InvalidInput("k_grid must be one-dimensional")
    return k


def _a_plus(p):
    return (1.0 - p.alpha) / (1.0 + p.eta)


def _minus_constants(p):
    """F = -f_u(A)/delta and P = -f_w(A) g_u(A)/delta."""
    a = p.alpha
    F = 2.0 * a * a / (p.delta * (1.0 + a))
    P = a * (1.0 - a) / (p.delta * (p.eta + a))
    return F, P


# ---------------------------------------------------------------------------
# prey-only end


def ess_curves_plus(params, k_grid):
    """The two parabolas at the prey-only end (first is fast, second slow)."""
    k = _as_grid(k_grid)
    p = params
    first = -p.epsilon * k**2 - (1.0 / p.delta if p.delta > 0 else math.inf) + 1j * p.c * k
    second = -(k**2) + _a_plus(p) + 1j * p.c * k
    return (
        SpectralCurve("plus-first", k, first),
        SpectralCurve("plus-second", k, second),
    )


def weighted_curves_plus(params, sigma, k_grid):
    """Prey-only end curves after the exponential weight with rate ``sigma``."""
    if sigma < 0:
        raise InvalidInput("sigma must be nonnegative")
    k = _as_grid(k_grid)
    p = params
    e, s = p.epsilon, sigma
    first = (-e * k**2 + s * (e * s - p.c) - 1.0 / p.delta) + 1j * (p.c - 2 * e * s) * k
    second = (-(k**2) + s * (s - p.c) + _a_plus(p)) + 1j * (p.c - 2 * s) * k
    curves = (
        SpectralCurve("plus-first-weighted", k, first, {"sigma": s}),
        SpectralCurve("plus-second-weighted", k, second, {"sigma": s}),
    )
    for cv in curves:
        cv.meta["max_real"] = cv.max_real
    return curves


def kpp_ess_curves(params, k_grid):
    """Essential-spectrum boundaries of the reduced scalar problem."""
    k = _as_grid(k_grid)
    p = params
    vert2 = -(1.0 - p.alpha**2) / (2.0 * p.alpha * (p.alpha + p.eta))
    return (
        SpectralCurve("kpp-first", k, -(k**2) + _a_plus(p) + 1j * p.c * k),
        SpectralCurve("kpp-second", k, -(k**2) + vert2 + 1j * p.c * k),
    )


# ---------------------------------------------------------------------------
# coexistence end


def disc_roots(params):
    """Positive roots k1 < k2 of the discriminant, a quadratic in k^2."""
    p = params
    if p.delta <= 0:
        raise DomainError("disc_roots needs delta > 0")
    if not 0.0 <= p.epsilon < 1.0:
        raise DomainError("disc_roots needs 0 <= epsilon < 1")
    F, P = _minus_constants(p)
    r = 2.0 * math.sqrt(P)
    if not F > r:
        raise DomainError(
            f"no real discriminant roots: delta={p.delta} is not below {kzero_bound(p):.6g}"
        )
    k1 = math.sqrt((F - r) / (1.0 - p.epsilon))
    k2 = math.sqrt((F + r) / (1.0 - p.epsilon))
    return k1, k2


def discriminant(params, k):
    """4 (P - q^2), positive exactly where the complex-pair branches live."""
    F, P = _minus_constants(params)
    q = 0.5 * ((params.epsilon - 1.0) * np.asarray(k, dtype=float) ** 2 + F)
    return 4.0 * (P - q * q)


def minus_determinant(params, k, lam):
    """Determinant of the coexistence-end symbol at (k, lambda)."""
    F, P = _minus_constants(params)
    k = np.asarray(k, dtype=float)
    mu = np.asarray(lam) - 1j * params.c * k
    return (mu + params.epsilon * k**2 + F) * (mu + k**2) + P


def _cos_cluster(a, b, n, include_ends):
    t = np.linspace(0.0, 1.0, n + (0 if include_ends else 2))
    if not include_ends:
        t = t[1:-1]
    return a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * t))


def _real_branch_roots(p, k):
    F, P = _minus_constants(p)
    s = 0.5 * ((p.epsilon + 1.0) * k**2 + F)
    q = 0.5 * ((p.epsilon - 1.0) * k**2 + F)
    rad = np.sqrt(np.maximum(q * q - P, 0.0))
    return -s - rad, -s + rad


def ess_curves_minus(params, n_samples=400, k_max=None):
    """Four boundary branches at the coexistence end.

    Complex-pair branches sit on (k1, k2) and its mirror, the real-root
    branches on the complement up to ``k_max``. When the discriminant has
    no real roots the complex-pair branches are absent and only the
    real-root branches are returned on the set where they are real.
    """
    p = params
    if p.delta <= 0:
        raise DomainError("ess_curves_minus needs delta > 0")
    if n_samples < 8:
        raise InvalidInput("n_samples must be at least 8")
    F, P = _minus_constants(p)
    half = n_samples // 2
    try:
        k1, k2 = disc_roots(p)
        kzero = True
    except DomainError:
        kzero = False
        k1 = None
        k2 = math.sqrt((F + 2 * math.sqrt(P)) / (1.0 - p.epsilon))
    if k_max is None:
        k_max = 2.0 * k2
    curves = []
    if kzero:
        kp = _cos_cluster(k1, k2, half, include_ends=False)
        k = np.concatenate([-kp[::-1], kp])
        s = 0.5 * ((p.epsilon + 1.0) * k**2 + F)
        q = 0.5 * ((p.epsilon - 1.0) * k**2 + F)
        im_off = np.sqrt(np.maximum(P - q * q, 0.0))
        re = -s
        curves.append(SpectralCurve("minus-pair-upper", k, re + 1j * (p.c * k + im_off)))
        curves.append(SpectralCurve("minus-pair-lower", k, re + 1j * (p.c * k - im_off)))
        n_in = half // 2
        inner = _cos_cluster(0.0, k1, n_in, include_ends=True)
        outer = _cos_cluster(k2, k_max, half - n_in, include_ends=True)
        kp = np.concatenate([inner, outer])
    else:
        kp = _cos_cluster(k2, k_max, half, include_ends=True)
    k = np.concatenate([-kp[::-1], kp[1:] if kp[0] == 0.0 else kp])
    r1, r2 = _real_branch_roots(p, k)
    curves.append(SpectralCurve("minus-real-root1", k, r1 + 1j * p.c * k))
    curves.append(SpectralCurve("minus-real-root2", k, r2 + 1j * p.c * k))
    for cv in curves:
        cv.meta["kzero"] = kzero
    return curves


def spectral_gap(params):
    """Real part of the rightmost coexistence-end boundary point (at k = 0)."""
    p = params
    if not p.delta < kzero_bound(p):
        raise DomainError(
            f"spectral_gap: delta={p.delta} is not below {kzero_bound(p):.6g}"
        )
    if not p.epsilon < 1.0:
        raise DomainError("spectral_gap needs epsilon < 1")
    a, e, d = p.alpha, p.eta, p.delta
    rad = a * (e + a) * (a**3 * (a + e) - d * (1 - a * a) * (1 + a))
    return (-a * a * (e + a) + math.sqrt(rad)) / (d * (1 + a) * (e + a))


# ---------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightInterval:
    """Admissible weight rates sigma_lo < sigma < sigma_hi.

    ``regime`` is "kppe" when the slow-parabola root is the binding upper
    limit and "general" when the fast parabola binds.
    """

    sigma_lo: float
    sigma_hi: float
    regime: str
    slow_root: float
    fast_root: float

    @property
    def midpoint(self):
        return 0.5 * (self.sigma_lo + self.sigma_hi)

    def contains(self, sigma):
        return self.sigma_lo < sigma < self.sigma_hi

    def to_dict(self):
        return {
            "sigma_lo": self.sigma_lo,
            "sigma_hi": self.sigma_hi,
            "regime": self.regime,
            "slow_root": self.slow_root,
            "fast_root": self.fast_root,
        }


def weight_inequalities(params, sigma):
    """Left-hand sides of the two weight conditions; both must be negative."""
    p = params
    first = sigma * (p.epsilon * sigma - p.c) - (1.0 / p.delta if p.delta > 0 else math.inf)
    second = sigma * (sigma - p.c) + _a_plus(p)
    return first, second


def weight_interval(params):
    """Interval of sigma moving both weighted parabolas into Re lambda < 0."""
    p = params
    disc = p.c**2 - 4.0 * _a_plus(p)
    if disc <= 0:
        raise DomainError(f"c={p.c} does not exceed the minimal speed {min_speed(p):.6g}")
    root = math.sqrt(disc)
    lo = 0.5 * (p.c - root)
    slow = 0.5 * (p.c + root)
    if p.epsilon > 0 and p.delta > 0:
        fast = (p.c + math.sqrt(p.c**2 + 4.0 * p.epsilon / p.delta)) / (2.0 * p.epsilon)
    else:
        fast = math.inf
    hi = min(slow, fast)
    if not lo < hi:
        raise DomainError("empty weight interval")
    wi = WeightInterval(lo, hi, "kppe" if slow <= fast else "general", slow, fast)
    mid = weight_inequalities(p, wi.midpoint)
    if not (mid[0] < 0 and mid[1] < 0):
        raise DomainError("midpoint weight fails the weight conditions")
    return wi


def resolve_sigma(params, sigma="auto"):
    """Map "auto" (midpoint), "sattinger" (c/2) or a number to a weight rate."""
    if isinstance(sigma, str):
        key = sigma.strip().lower()
        if key == "auto":
            return weight_interval(params).midpoint
        if key == "sattinger":
            return 0.5 * params.c
        try:
            sigma = float(key)
        except ValueError as exc:
            raise InvalidInput(f"sigma must be auto, sattinger or a number, got {sigma!r}") from exc
    return float(sigma)


# ---------------------------------------------------------------------------
# residuals and export


def curve_residual(curve, params):
    """Max relative residual of a curve's samples in their defining relation."""
    p = params
    k, lam = curve.k, curve.lam
    lab = curve.label
    if lab.startswith("minus-"):
        F, P = _minus_constants(p)
        mu = lam - 1j * p.c * k
        scale = np.abs(mu) ** 2 + np.abs(mu) * ((p.epsilon + 1) * k**2 + F) + (
            p.epsilon * k**4 + F * k**2 + P
        )
        return float(np.max(np.abs(minus_determinant(p, k, lam)) / scale))
    # the remaining branches come from scalar dispersion relations in
    # mu = ik - sigma: eps mu^2 + c mu - 1/delta = lambda (fast) and
    # mu^2 + c mu + v = lambda (slow, v the zeroth-order coefficient)
    sigma = curve.meta.get("sigma", 0.0) if lab.endswith("-weighted") else 0.0
    mu = 1j * k - sigma
    if lab.startswith("plus-first"):
        if not p.delta > 0:
            raise InvalidInput("the fast branch needs delta > 0")
        terms = (p.epsilon * mu**2, p.c * mu, np.full(k.shape, -1.0 / p.delta))
    elif lab.startswith("plus-second") or lab == "kpp-first":
        terms = (mu**2, p.c * mu, np.full(k.shape, _a_plus(p)))
    elif lab == "kpp-second":
        v = -(1.0 - p.alpha**2) / (2.0 * p.alpha * (p.alpha + p.eta))
        terms = (mu**2, p.c * mu, np.full(k.shape, v))
    else:
        raise InvalidInput(f"unknown curve label {lab!r}")
    scale = np.abs(lam) + sum(np.abs(t) for t in terms)
    return float(np.max(np.abs(sum(terms) - lam) / np.maximum(scale, 1e-300)))


def export_curves(curves, path):
    """Write (k, Re lambda, Im lambda, label) rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"columns": ["k", "re", "im", "label"]}) + "\n")
        for cv in curves:
            for k, lam in zip(cv.k, cv.lam):
                fh.write(f"{k:.17g} {lam.real:.17g} {lam.imag:.17g} {cv.label}\n")


def spectrum_summary(params):
    """k1, k2, gap and weight interval, with absent entries as None."""
    out = {"params": params.to_dict(), "kzero": params.delta < kzero_bound(params)}
    try:
        out["k1"], out["k2"] = disc_roots(params)
    except DomainError:
        out["k1"] = out["k2"] = None
    try:
        out["gap"] = spectral_gap(params)
    except DomainError:
        out["gap"] = None
    try:
        out["weight_interval"] = weight_interval(params).to_dict()
    except DomainError:
        out["weight_interval"] = None
    return out
