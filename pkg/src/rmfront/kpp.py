"""Scalar Fisher-KPP reduction on the slow nullcline.

In the double limit the prey sits on the nullcline u = sqrt(1 - w) and
the predator solves w'' + c w' + h(w) = 0 with
h(w) = w (sqrt(1 - w) - alpha) / (eta + sqrt(1 - w)). This module
solves that front, builds its linearization potential and scalar Evans
function, and compares eigenvalue counts with the full system.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _tw
from ._bvp import BvpProblem, projection_rows, solve_heteroclinic
from ._tw import Profile, kpp_dh, kpp_h
from .errors import DomainError, FrontQualityError, InvalidInput, NonComparable
from .model import jacobian, min_speed

__all__ = [
    "KppProfile",
    "compare_counts",
    "kpp_evans",
    "kpp_front_solve",
    "kpp_potential",
    "kpp_reaction",
    "kpp_reaction_deriv",
    "nullcline_u",
]


def nullcline_u(w):
    """Nonzero prey nullcline branch u = sqrt(1 - w)."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr > 1.0) or np.any(w_arr < 0.0):
        raise DomainError("nullcline is defined for w in [0, 1]")
    out = np.sqrt(1.0 - w_arr)
    return float(out) if out.ndim == 0 else out


def kpp_reaction(w, params):
    """Reduced predator kinetics h(w)."""
    nullcline_u(w)
    out = kpp_h(np.asarray(w, dtype=float), params)
    return float(out) if np.ndim(out) == 0 else out


def kpp_reaction_deriv(w, params):
    """Analytic h'(w)."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr >= 1.0) or np.any(w_arr < 0.0):
        raise DomainError("h' is defined for w in [0, 1)")
    out = kpp_dh(w_arr, params)
    return float(out) if out.ndim == 0 else out


class KppProfile(Profile):
    """Front of the reduced scalar equation, state (w, w')."""


def _kpp_params(params):
    return params.with_(delta=0.0, epsilon=0.0)


def default_length(params):
    """Half-length from the slow right tail, at least 50."""
    from .front import decay_rate_plus

    return max(50.0, 12.0 / abs(decay_rate_plus(params)))


def kpp_front_solve(params, L=None, n_nodes=2001, tol=1e-8):
    """Solve the scalar front with projection boundary conditions."""
    if params.c <= min_speed(params):
        raise DomainError(
            f"kpp_front_solve: c={params.c} is not above the minimal speed {min_speed(params):.6g}"
        )
    if n_nodes < 200:
        raise InvalidInput("n_nodes must be at least 200")
    p = _kpp_params(params)
    L = default_length(p) if L is None else float(L)
    F, dF = _tw.vector_field("kpp", p)
    left, right = _tw.endpoints("kpp", p)
    jl, jr = _tw.endpoint_jacobians("kpp", p)
    problem = BvpProblem(
        F, dF, left, right,
        rows_left=projection_rows(jl, keep_unstable=True),
        rows_right=projection_rows(jr, keep_unstable=False),
        phase_index=0, phase_value=0.5 * left[0],
    )
    x = np.linspace(0.0, L, (n_nodes + 1) // 2)
    # logistic guess with the slow right tail
    wa = left[0]
    nu = abs(_nu(p))
    zl = -x
    guess_l = wa / (1.0 + np.exp(nu * zl * 2.0))
    guess_r = wa / (1.0 + np.exp(nu * x * 2.0))
    dl = -2 * nu * guess_l * (1 - guess_l / wa)
    dr = -2 * nu * guess_r * (1 - guess_r / wa)
    guess = np.vstack([guess_l, dl, guess_r, dr])
    zeta, y, _ = solve_heteroclinic(problem, L, x, guess, tol, step="kpp front")
    prof = KppProfile(params=p, regime="kpp", L=L, zeta=zeta, state=y)
    prof.residual = float(prof.midpoint_defect().max())
    w = prof.w
    if np.any(w[1:-1] <= 0.0) or np.any(w >= 1.0):
        raise FrontQualityError("kpp front leaves (0, 1); speed below the KPP threshold?")
    return prof


def _nu(p):
    from .front import decay_rate_plus

    return decay_rate_plus(p)


def kpp_potential(profile, z=None):
    """V = -g_u f_w / f_u + g_w along (sqrt(1 - w_f), w_f).

    Evaluated at the nodes, or at abscissae ``z`` through the interpolant.
    """
    if z is None:
        w = profile.w
    else:
        w = profile(z)[..., 0]
    w = np.clip(w, 0.0, 1.0)
    u = np.sqrt(1.0 - w)
    fu, fw, gu, gw = jacobian(u, w, profile.params)
    fu = np.asarray(fu)
    if np.any(fu == 0.0):
        raise DomainError("f_u vanishes on the nullcline")
    return -gu * fw / fu + gw


def kpp_evans(profile, lam, sigma, **options):
    """Weighted scalar Evans function at ``lam`` (scalar or array)."""
    from .evans import build_kpp_system, evans_eval

    system = build_kpp_system(profile, sigma)
    return evans_eval(system, lam, **options)


@dataclass
class CountComparison:
    winding_full: int
    winding_kpp: int
    sigma: float
    radius: float
    equal: bool
    full_result: object = None
    kpp_result: object = None

    def to_dict(self):
        return {
            "winding_full": self.winding_full,
            "winding_kpp": self.winding_kpp,
            "sigma": self.sigma,
            "radius": self.radius,
            "equal": self.equal,
        }


def compare_counts(full_system, kpp_profile, sigma, radius, n_min=64, tol=1e-8,
                   kpp_sigma=None):
    """Winding of the full weighted Evans function and of the KPP one on one contour.

    ``full_system`` is an Evans system built with weight ``sigma``. A
    different ``kpp_sigma`` makes the runs non-comparable.
    """
    from .evans import build_contour, build_kpp_system, winding

    if kpp_sigma is not None and not math.isclose(kpp_sigma, sigma, rel_tol=0, abs_tol=1e-12):
        raise NonComparable(f"weights differ: full {sigma} vs kpp {kpp_sigma}")
    if not math.isclose(full_system.sigma, sigma, rel_tol=0, abs_tol=1e-12):
        raise NonComparable(f"full system was built with sigma={full_system.sigma}, not {sigma}")
    fp, kp = full_system.params, kpp_profile.params
    if (fp.alpha, fp.eta, fp.c) != (kp.alpha, kp.eta, kp.c):
        raise NonComparable("full and reduced fronts have different (alpha, eta, c)")
    contour = build_contour(radius, n_min)
    full = winding(full_system, contour, tol=tol)
    ksys = build_kpp_system(kpp_profile, sigma)
    red = winding(ksys, contour, tol=tol)
    return CountComparison(full.winding, red.winding, sigma, radius,
                           full.winding == red.winding, full, red)
