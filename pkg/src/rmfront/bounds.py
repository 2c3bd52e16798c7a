"""Magnitude bounds on unstable point spectrum and the Evans contour radius.

The epsilon > 0 bound depends on four positive Young-inequality
constants beta_1..beta_4, chosen by exhaustive search over a small grid.
"""

import itertools
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InvalidInput

__all__ = [
    "BETA_GRID",
    "BoundReport",
    "bound_eps_positive",
    "bound_eps_zero",
    "bound_kpp",
    "bound_report",
    "contour_radius",
    "optimize_betas",
    "re_bound",
]

BETA_GRID = (0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0)
RADIUS_FACTOR = 1.05


def _check_betas(betas, count=4):
    b = tuple(float(x) for x in betas)
    if len(b) < count or any(not x > 0 for x in b[:count]):
        raise InvalidInput(f"betas must be {count} positive numbers, got {betas!r}")
    return b


def _a_plus(p):
    return (1.0 - p.alpha) / (p.eta + 1.0)


def bound_eps_positive(params, sups, betas):
    """(M1, M2) for epsilon > 0 with the given betas."""
    p = params
    if not p.epsilon > 0 or not p.delta > 0:
        raise InvalidInput("bound_eps_positive needs epsilon > 0 and delta > 0")
    b1, b2, b3, b4 = _check_betas(betas)
    fu, gu = sups.fu_abs, sups.gu_abs
    c4 = p.c**4
    m1 = c4 / (4 * p.epsilon) + (fu + 1 / (8 * b1) + 1 / (8 * b3)) / p.delta + gu * (b2 + 1 / (4 * b4))
    m2 = c4 / 4 + _a_plus(p) + (1 / (4 * b2) + b4) * gu + (b1 + b3) / (2 * p.delta)
    return m1, m2


def _grid_values(params, sups, grid):
    g = np.asarray(grid, dtype=float)
    b1, b2, b3, b4 = np.meshgrid(g, g, g, g, indexing="ij")
    p = params
    fu, gu = sups.fu_abs, sups.gu_abs
    c4 = p.c**4
    m1 = c4 / (4 * p.epsilon) + (fu + 1 / (8 * b1) + 1 / (8 * b3)) / p.delta + gu * (b2 + 1 / (4 * b4))
    m2 = c4 / 4 + _a_plus(p) + (1 / (4 * b2) + b4) * gu + (b1 + b3) / (2 * p.delta)
    return np.maximum(m1, m2)


def optimize_betas(params, sups, grid=BETA_GRID):
    """Exhaustive minimisation of max(M1, M2) over grid^4.

    Ties go to the lexicographically smallest beta tuple.
    """
    g = sorted({float(x) for x in grid})
    if not g:
        raise InvalidInput("beta grid is empty")
    if any(not x > 0 for x in g):
        raise InvalidInput("beta grid values must be positive")
    vals = _grid_values(params, sups, g)
    best = vals.min()
    # first index in C order is the lexicographically smallest tuple of a sorted grid
    idx = np.unravel_index(int(np.flatnonzero(vals.ravel() == best)[0]), vals.shape)
    betas = tuple(g[i] for i in idx)
    return betas, float(best)


def re_bound(params, sups, betas):
    """Bound on the real part of unstable eigenvalues."""
    p = params
    if not p.delta > 0:
        raise InvalidInput("re_bound needs delta > 0")
    b = _check_betas(betas, count=2)
    b1, b2 = b[0], b[1]
    first = sups.fu_abs / p.delta + b2 * sups.gu_abs + sups.fw_abs / (4 * b1 * p.delta)
    second = sups.gw_abs + b1 * sups.fw_abs / p.delta + sups.gu_abs / (4 * b2)
    return max(first, second)


def bound_eps_zero(params, sups):
    """Magnitude bound for epsilon = 0."""
    if params.epsilon != 0:
        raise InvalidInput("bound_eps_zero is for epsilon = 0")
    if not sups.fu_abs > 0:
        raise DomainError("sup |f_u| vanishes; the front is inconsistent")
    p = params
    return p.c**2 / 4 + sups.gu_abs / (2 * sups.fu_abs) + (1 - p.alpha) / (p.eta + p.alpha)


def bound_kpp(params, sup_ftilde):
    """Magnitude bound for the reduced scalar problem."""
    if sup_ftilde < 0:
        raise InvalidInput("sup |h'| must be nonnegative")
    return float(params.c**2 / 4 + sup_ftilde)


def contour_radius(report_or_bound):
    """Radius of the Evans contour: a 5% margin over the bound."""
    bound = getattr(report_or_bound, "bound", report_or_bound)
    if not bound > 0:
        raise InvalidInput("bound must be positive")
    return RADIUS_FACTOR * float(bound)


@dataclass
class BoundReport:
    regime: str
    bound: float
    contour_radius: float
    M1: float = math.nan
    M2: float = math.nan
    betas: tuple = ()
    re_bound: float = math.nan

    def to_dict(self):
        d = asdict(self)
        d["betas"] = list(self.betas)
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def bound_report(params, sups=None, sup_ftilde=None, grid=BETA_GRID):
    """Bound for the active regime of ``params``.

    ``sups`` are the front's Jacobian suprema (full system);
    ``sup_ftilde`` is sup |h'(w_f)| for the reduced problem.
    """
    p = params
    if p.epsilon > 0:
        betas, best = optimize_betas(p, sups, grid)
        m1, m2 = bound_eps_positive(p, sups, betas)
        rb = re_bound(p, sups, betas)
        return BoundReport("eps-positive", best, contour_radius(best), m1, m2, betas, rb)
    if p.delta > 0:
        b = bound_eps_zero(p, sups)
        # only beta_1, beta_2 enter the real-part bound; take its grid minimum
        rb, betas = min((re_bound(p, sups, (b1, b2)), (b1, b2))
                        for b1, b2 in itertools.product(sorted(grid), repeat=2))
        return BoundReport("eps-zero", b, contour_radius(b), betas=betas, re_bound=rb)
    if sup_ftilde is None:
        raise InvalidInput("reduced regime needs sup |h'|")
    b = bound_kpp(p, sup_ftilde)
    return BoundReport("kpp", b, contour_radius(b))
