"""Front -> bounds -> Evans orchestration for a single parameter case."""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _tw
from .bounds import bound_report
from .errors import (
    ContinuationFailure,
    DomainError,
    FrontQualityError,
    InvalidInput,
    IntegrationFailure,
    SplittingDegenerate,
    UnresolvedWinding,
)
from .evans import build_contour, build_kpp_system, build_system, winding
from .front import solve_front, sup_norms
from .kpp import kpp_front_solve, kpp_potential
from .spectrum import resolve_sigma, weight_interval

__all__ = ["STATUSES", "CaseResult", "prepare_case", "run_case", "system_bound"]

STATUSES = ("ok", "splitting-degenerate", "unresolved-winding", "front-failure")


@dataclass
class CaseResult:
    params: object
    sigma: float = math.nan
    bound: float = math.nan
    radius: float = math.nan
    winding: int = None
    status: str = "ok"
    seconds: float = 0.0
    message: str = ""
    bound_report: object = None
    evans: object = None
    profile: object = field(default=None, repr=False)
    system: object = field(default=None, repr=False)

    def row(self, timing=True):
        """CSV fields in the sweep column order."""
        p = self.params

        def num(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))

        return [
            repr(p.alpha), repr(p.eta), repr(p.delta), repr(p.epsilon), repr(p.c),
            num(self.sigma), num(self.bound), num(self.radius),
            "" if self.winding is None else str(self.winding),
            self.status,
            f"{self.seconds:.3f}" if timing else "",
        ]


def system_bound(profile):
    """Bound report for the regime of ``profile``."""
    if profile.regime == "kpp":
        sup_h = float(np.max(np.abs(kpp_potential(profile))))
        return bound_report(profile.params, sup_ftilde=sup_h)
    return bound_report(profile.params, sups=sup_norms(profile))


def prepare_case(params, sigma="auto", L=None, nodes=2001, tol=1e-8):
    """Solve the front and build its weighted Evans system and bound."""
    sig = resolve_sigma(params, sigma)
    if _tw.regime_of(params) == "kpp":
        profile = kpp_front_solve(params, L=L, n_nodes=nodes, tol=tol)
    else:
        profile = solve_front(params, L=L, n_nodes=nodes, tol=tol)
    rep = system_bound(profile)
    if profile.regime == "kpp":
        system = build_kpp_system(profile, sig, lam_ref=rep.contour_radius)
    else:
        system = build_system(profile, sig, lam_ref=rep.contour_radius)
    return profile, system, rep


def run_case(params, sigma="auto", radius=None, radius_scale=1.0, n_min=64, tol=1e-8,
             L=None, nodes=2001, method="compound"):
    """Run one case and classify the outcome instead of raising.

    ``radius`` overrides the bound-derived radius; ``radius_scale``
    multiplies whichever radius is used. Structural parameter errors
    (alpha, eta) still raise :class:`InvalidInput`.
    """
    t0 = time.perf_counter()
    res = CaseResult(params=params)
    try:
        res.sigma = resolve_sigma(params, sigma)
        interval = weight_interval(params)
    except DomainError as exc:
        res.status, res.message = "front-failure", f"spectrum.weight_interval: {exc}"
        res.seconds = time.perf_counter() - t0
        return res
    if res.sigma != 0.0 and not interval.contains(res.sigma):
        # the weighted essential spectrum is not pushed off the axis
        res.status = "splitting-degenerate"
        res.message = (f"spectrum.weight_interval: sigma={res.sigma:.6g} outside "
                       f"({interval.sigma_lo:.6g}, {interval.sigma_hi:.6g})")
        res.seconds = time.perf_counter() - t0
        return res
    try:
        profile, system, rep = prepare_case(params, res.sigma, L=L, nodes=nodes, tol=tol)
    except (ContinuationFailure, FrontQualityError, DomainError, InvalidInput) as exc:
        res.status, res.message = "front-failure", f"front.solve_front: {exc}"
        res.seconds = time.perf_counter() - t0
        return res
    except SplittingDegenerate as exc:
        res.status, res.message = "splitting-degenerate", f"evans.build_system: {exc}"
        res.seconds = time.perf_counter() - t0
        return res
    res.profile, res.system, res.bound_report = profile, system, rep
    res.bound = rep.bound
    res.radius = (rep.contour_radius if radius is None else float(radius)) * radius_scale
    try:
        ev = winding(system, build_contour(res.radius, n_min), tol=tol, method=method)
    except SplittingDegenerate as exc:
        res.status, res.message = "splitting-degenerate", f"evans.winding: {exc}"
    except (UnresolvedWinding, IntegrationFailure) as exc:
        res.status, res.message = "unresolved-winding", f"evans.winding: {exc}"
    else:
        res.evans, res.winding = ev, ev.winding
    res.seconds = time.perf_counter() - t0
    return res
