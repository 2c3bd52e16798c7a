"""Traveling fronts by collocation with singular-perturbation continuation.

The reduced scalar front seeds the epsilon = 0 system at a small delta,
delta is then raised geometrically to its target, and finally epsilon
is raised geometrically from a small fraction of its target.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _tw
from ._bvp import BvpProblem, fold, projection_rows, solve_heteroclinic
from ._tw import Profile, tail_slope
from .errors import ContinuationFailure, DomainError, FrontQualityError, InvalidInput
from .kpp import kpp_front_solve
from .model import jacobian, min_speed, validate

__all__ = [
    "BoundsReport",
    "FrontProfile",
    "SupNorms",
    "check_front_bounds",
    "decay_rate_plus",
    "default_length",
    "front_residual",
    "load_profile",
    "solve_front",
    "sup_norms",
    "translation_residual",
]

BOUND_SLACK = 0.05
DELTA_START = 1e-3


class FrontProfile(Profile):
    """Front of the full system in the eps-positive or eps-zero regime."""


def decay_rate_plus(params):
    """Leading-order decay rate of the front towards the prey-only state."""
    disc = params.c**2 - 4.0 * (1.0 - params.alpha) / (1.0 + params.eta)
    if disc <= 0.0:
        raise DomainError(
            f"decay rate is complex: c={params.c} does not exceed {min_speed(params):.6g}"
        )
    return 0.5 * (-params.c + math.sqrt(disc))


def _left_rate(regime, params):
    jl, _ = _tw.endpoint_jacobians(regime, params)
    mu = np.linalg.eigvals(jl)
    pos = mu.real[mu.real > 0]
    return float(pos.min())


def default_length(params):
    """max(50, 12 / slowest asymptotic rate), over both ends."""
    regime = _tw.regime_of(params)
    rate = min(abs(decay_rate_plus(params)), _left_rate(regime, params))
    return max(50.0, 12.0 / rate)


def _problem(regime, p):
    F, dF = _tw.vector_field(regime, p)
    left, right = _tw.endpoints(regime, p)
    jl, jr = _tw.endpoint_jacobians(regime, p)
    return BvpProblem(
        F, dF, left, right,
        rows_left=projection_rows(jl, keep_unstable=True),
        rows_right=projection_rows(jr, keep_unstable=False),
        phase_index=_tw.W_INDEX[regime], phase_value=0.5 * (1.0 - p.alpha**2),
    )


def _lift(prof_regime, target_regime, p, zeta, state):
    """Convert a solution to the state layout of the next regime."""
    vals = _tw.full_state(prof_regime, p, state)
    if target_regime == "eps-zero":
        return vals[:, [0, 2, 3]]
    if target_regime == "eps-positive":
        return vals
    raise InvalidInput(target_regime)


def _geometric(a, b, ratio):
    n = max(1, int(math.ceil(abs(math.log(b / a)) / math.log(ratio))))
    return list(np.geomspace(a, b, n + 1)[1:])


def solve_front(params, L=None, n_nodes=2001, tol=1e-8, delta_ratio=2.0,
                eps_ratio=2.0, eps_start_fraction=1 / 8, check=True):
    """Compute the front for ``params``.

    Raises :class:`ContinuationFailure` naming the failed step and
    :class:`InvalidInput` when the parameters are not admissible.
    """
    report = validate(params)
    bad = [n for n in report.failed() if n in ("speed", "regime")]
    if params.delta > 0 and bad:
        raise InvalidInput(
            "solve_front: parameters rejected (" + "; ".join(report[n].detail for n in bad) + ")"
        )
    if params.c <= min_speed(params):
        raise InvalidInput(report["speed"].detail)
    if n_nodes < 200:
        raise InvalidInput("n_nodes must be at least 200")
    target = _tw.regime_of(params)
    if L is None:
        L = default_length(params)
    L = float(L)
    if not L > 0:
        raise InvalidInput("L must be positive")
    x = np.linspace(0.0, L, (n_nodes + 1) // 2)

    kprof = kpp_front_solve(params, L=L, n_nodes=n_nodes, tol=tol)
    if target == "kpp":
        prof = FrontProfile(params=params, regime="kpp", L=L, zeta=kprof.zeta,
                            state=kprof.state)
        return _finish(prof, check)

    zeta, state, regime = kprof.zeta, kprof.state, "kpp"
    d0 = min(DELTA_START, params.delta)
    schedule = [("eps-zero", params.with_(epsilon=0.0, delta=d))
                for d in [d0] + (_geometric(d0, params.delta, delta_ratio)
                                 if params.delta > d0 else [])]
    if target == "eps-positive":
        e0 = params.epsilon * eps_start_fraction
        schedule += [("eps-positive", params.with_(epsilon=e))
                     for e in [e0] + _geometric(e0, params.epsilon, eps_ratio)]
    for k, (reg, p) in enumerate(schedule):
        label = f"step {k} ({reg}, delta={p.delta:.4g}, epsilon={p.epsilon:.4g})"
        start = _lift(regime, reg, p, zeta, state) if reg != regime else state
        problem = _problem(reg, p)
        guess = fold(zeta, start, x)
        try:
            zeta, state, _ = solve_heteroclinic(problem, L, x, guess, tol, step=label)
        except ContinuationFailure:
            raise
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise ContinuationFailure(f"collocation failed at {label}: {exc}", step=label) from exc
        regime = reg
    prof = FrontProfile(params=params, regime=regime, L=L, zeta=zeta, state=state)
    return _finish(prof, check)


def _finish(prof, check):
    prof.residual = front_residual(prof)
    left_err, right_err = prof.endpoint_errors()
    prof.meta = {
        "endpoint_error_left": left_err,
        "endpoint_error_right": right_err,
        "decay_measured": tail_slope(prof.zeta, prof.w),
        "decay_rate_plus": decay_rate_plus(prof.params),
        "nodes": int(prof.zeta.size),
    }
    if check:
        rep = check_front_bounds(prof)
        if not rep.range_ok:
            raise FrontQualityError("front violates the a priori bounds: " + rep.describe())
    return prof


def front_residual(profile):
    """Max over midpoints of the interpolant's vector-field defect."""
    return float(profile.midpoint_defect().max())


def translation_residual(profile):
    """Defect of the derivative profile in the linearized equation at lambda = 0.

    The derivative of the interpolant, Y = y', must satisfy Y' = J(y) Y.
    Both sides are taken from the quintic interpolant at the midpoints.
    """
    zm = 0.5 * (profile.zeta[1:] + profile.zeta[:-1])
    y = profile(zm)
    dy = profile(zm, 1)
    d2y = profile(zm, 2)
    J = profile._dF(y.T)
    rhs = np.einsum("ijm,mj->mi", J, dy)
    return float(np.max(np.abs(d2y - rhs)))


@dataclass
class BoundsReport:
    positivity: bool
    w_upper: bool
    u_lower: bool
    u_upper: bool
    decay_ok: bool
    decay_measured: float
    decay_expected: float
    slack: float = BOUND_SLACK

    @property
    def range_ok(self):
        return self.positivity and self.w_upper and self.u_lower and self.u_upper

    @property
    def ok(self):
        return self.range_ok and self.decay_ok

    def describe(self):
        parts = []
        for name in ("positivity", "w_upper", "u_lower", "u_upper", "decay_ok"):
            parts.append(f"{name}={'pass' if getattr(self, name) else 'FAIL'}")
        parts.append(f"decay {self.decay_measured:.5g} vs {self.decay_expected:.5g}")
        return ", ".join(parts)

    def to_dict(self):
        return {
            "positivity": self.positivity,
            "w_upper": self.w_upper,
            "u_lower": self.u_lower,
            "u_upper": self.u_upper,
            "decay_ok": self.decay_ok,
            "decay_measured": self.decay_measured,
            "decay_expected": self.decay_expected,
            "slack": self.slack,
        }


def check_front_bounds(profile, slack=BOUND_SLACK):
    """Check the a priori ranges of u_f, w_f and the right-tail decay rate."""
    p = profile.params
    vals = profile.values
    u, w = vals[:, 0], vals[:, 2]
    interior = slice(1, -1)
    expected = decay_rate_plus(p)
    measured = tail_slope(profile.zeta, w)
    decay_ok = bool(np.isfinite(measured) and abs(measured - expected) <= 0.2 * abs(expected))
    return BoundsReport(
        positivity=bool(np.all(w[interior] > 0.0)),
        w_upper=bool(np.all(w <= 1.0 - p.alpha**2 + slack)),
        u_lower=bool(np.all(u > p.alpha - slack)),
        u_upper=bool(np.all(u <= 1.0 + 1e-6)),
        decay_ok=decay_ok,
        decay_measured=measured,
        decay_expected=expected,
        slack=slack,
    )


@dataclass(frozen=True)
class SupNorms:
    fu_abs: float
    fw_abs: float
    gu_abs: float
    gw_abs: float
    fu_max: float

    def to_dict(self):
        return dict(self.__dict__)


def sup_norms(profile, strict=True):
    """Suprema of the Jacobian entries along the profile nodes."""
    u, w = profile.uw(profile.zeta)
    fu, fw, gu, gw = jacobian(u, w, profile.params)
    s = SupNorms(
        fu_abs=float(np.max(np.abs(fu))),
        fw_abs=float(np.max(np.abs(fw))),
        gu_abs=float(np.max(np.abs(gu))),
        gw_abs=float(np.max(np.abs(gw))),
        fu_max=float(np.max(fu)),
    )
    if strict and s.fu_max >= 0.0:
        raise FrontQualityError(f"sup f_u = {s.fu_max:.4g} is not negative along the front")
    return s


def load_profile(path):
    return FrontProfile.load(path)
