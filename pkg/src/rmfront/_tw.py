"""Traveling-wave vector fields in the three regimes and a common profile type.

States:
  eps-positive  (u, u', w, w')
  eps-zero      (u, w, w')
  kpp           (w, w')
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._bvp import QuinticHermite
from .errors import InvalidInput
from .model import ModelParams

REGIMES = ("eps-positive", "eps-zero", "kpp")
DIMS = {"eps-positive": 4, "eps-zero": 3, "kpp": 2}
# position of w in each state
W_INDEX = {"eps-positive": 2, "eps-zero": 1, "kpp": 0}


def regime_of(params):
    if params.epsilon > 0:
        if params.delta <= 0:
            raise InvalidInput("epsilon > 0 requires delta > 0")
        return "eps-positive"
    if params.delta > 0:
        return "eps-zero"
    return "kpp"


def _safe_sqrt(x):
    return np.sqrt(np.maximum(x, 0.0))


def kpp_h(w, p):
    u = _safe_sqrt(1.0 - w)
    return w * (u - p.alpha) / (p.eta + u)


def kpp_dh(w, p):
    u = _safe_sqrt(1.0 - w)
    u = np.maximum(u, 1e-300)
    return (u - p.alpha) / (p.eta + u) - w * (p.eta + p.alpha) / (2.0 * u * (p.eta + u) ** 2)


def kpp_d2h(w, p):
    # derivative of kpp_dh with respect to w
    u = np.maximum(_safe_sqrt(1.0 - w), 1e-300)
    e, a = p.eta, p.alpha
    du = -0.5 / u
    d_first = (e + a) / (e + u) ** 2 * du
    # second term: -w (e+a) / (2 u (e+u)^2)
    q = 2.0 * u * (e + u) ** 2
    dq = (2.0 * (e + u) ** 2 + 4.0 * u * (e + u)) * du
    d_second = -(e + a) * (q - w * dq) / q**2
    return d_first + d_second


def _fg(u, w, p):
    # reaction terms without the domain guard (Newton iterates may stray)
    f = u * (1.0 - u) - u * w / (1.0 + u)
    g = w * (u - p.alpha) / (p.eta + u)
    return f, g


def _jac(u, w, p):
    a, e = p.alpha, p.eta
    fu = 1.0 - 2.0 * u - w / (1.0 + u) ** 2
    fw = -u / (1.0 + u)
    gu = (e + a) * w / (e + u) ** 2
    gw = (u - a) / (e + u)
    return fu, fw, gu, gw


def vector_field(regime, p):
    """Return (F, dF) acting on states of shape (n, m)."""
    c, d, eps = p.c, p.delta, p.epsilon
    if regime == "eps-positive":
        def F(y):
            u, up, w, wp = y
            f, g = _fg(u, w, p)
            return np.array([up, -(c * up + f / d) / eps, wp, -c * wp - g])

        def dF(y):
            u, up, w, wp = y
            fu, fw, gu, gw = _jac(u, w, p)
            z = np.zeros_like(u)
            o = np.ones_like(u)
            return np.array([
                [z, o, z, z],
                [-fu / (eps * d), -c / eps * o, -fw / (eps * d), z],
                [z, z, z, o],
                [-gu, z, -gw, -c * o],
            ])
    elif regime == "eps-zero":
        def F(y):
            u, w, wp = y
            f, g = _fg(u, w, p)
            return np.array([-f / (c * d), wp, -c * wp - g])

        def dF(y):
            u, w, wp = y
            fu, fw, gu, gw = _jac(u, w, p)
            z = np.zeros_like(u)
            o = np.ones_like(u)
            return np.array([
                [-fu / (c * d), -fw / (c * d), z],
                [z, z, o],
                [-gu, -gw, -c * o],
            ])
    elif regime == "kpp":
        def F(y):
            w, wp = y
            return np.array([wp, -c * wp - kpp_h(w, p)])

        def dF(y):
            w, wp = y
            z = np.zeros_like(w)
            o = np.ones_like(w)
            return np.array([[z, o], [-kpp_dh(w, p), -c * o]])
    else:
        raise InvalidInput(f"unknown regime {regime!r}")
    return F, dF


def endpoints(regime, p):
    """States at the coexistence end (left) and prey-only end (right)."""
    a = p.alpha
    wa = 1.0 - a * a
    if regime == "eps-positive":
        return np.array([a, 0.0, wa, 0.0]), np.array([1.0, 0.0, 0.0, 0.0])
    if regime == "eps-zero":
        return np.array([a, wa, 0.0]), np.array([1.0, 0.0, 0.0])
    return np.array([wa, 0.0]), np.array([0.0, 0.0])


def endpoint_jacobians(regime, p):
    F, dF = vector_field(regime, p)
    left, right = endpoints(regime, p)
    return dF(left[:, None])[..., 0], dF(right[:, None])[..., 0]


def full_state(regime, p, state):
    """Map a native state array (m, n) to columns (u, u', w, w')."""
    state = np.asarray(state)
    if regime == "eps-positive":
        return state.copy()
    if regime == "eps-zero":
        u, w, wp = state.T
        f, _ = _fg(u, w, p)
        return np.column_stack([u, -f / (p.c * p.delta), w, wp])
    w, wp = state.T
    u = _safe_sqrt(1.0 - w)
    return np.column_stack([u, -wp / (2.0 * np.maximum(u, 1e-300)), w, wp])


@dataclass
class Profile:
    """Discrete front on [-L, L] with quintic Hermite interpolation.

    ``state`` holds the native state of the regime, shape (m, n). The
    derivatives used for interpolation come from the vector field.
    """

    params: ModelParams
    regime: str
    L: float
    zeta: np.ndarray
    state: np.ndarray
    residual: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.state = np.asarray(self.state, dtype=float)
        if self.state.shape != (self.zeta.size, DIMS[self.regime]):
            raise InvalidInput("profile state has the wrong shape")
        F, dF = vector_field(self.regime, self.params)
        ys = self.state.T
        d1 = F(ys)
        d2 = np.einsum("ijm,jm->im", dF(ys), d1)
        self._interp = QuinticHermite(self.zeta, self.state, d1.T, d2.T)
        self._F = F
        self._dF = dF

    @property
    def dim(self):
        return DIMS[self.regime]

    def __call__(self, z, nu=0):
        return self._interp(z, nu)

    @property
    def values(self):
        """Columns (u, u', w, w') at the nodes."""
        return full_state(self.regime, self.params, self.state)

    @property
    def u(self):
        return self.values[:, 0]

    @property
    def w(self):
        return self.state[:, W_INDEX[self.regime]]

    def uw(self, z):
        """(u, w) at arbitrary abscissae, each of the shape of ``z``."""
        s = self._interp(z)
        if self.regime == "eps-positive":
            return s[..., 0], s[..., 2]
        if self.regime == "eps-zero":
            return s[..., 0], s[..., 1]
        w = s[..., 0]
        return _safe_sqrt(1.0 - w), w

    def midpoint_defect(self):
        """Per-midpoint max-norm defect of the interpolant against the field."""
        zm = 0.5 * (self.zeta[1:] + self.zeta[:-1])
        s = self._interp(zm)
        ds = self._interp(zm, 1)
        return np.max(np.abs(ds - self._F(s.T).T), axis=1)

    def endpoint_errors(self):
        left, right = endpoints(self.regime, self.params)
        return (
            float(np.max(np.abs(self.state[0] - left))),
            float(np.max(np.abs(self.state[-1] - right))),
        )

    # ------------------------------------------------------------------
    # columnar text serialisation

    def header(self):
        return {
            "kind": type(self).__name__,
            "regime": self.regime,
            "params": self.params.to_dict(),
            "L": self.L,
            "residual": _finite_or_none(self.residual),
            "columns": ["zeta", "u", "u_prime", "w", "w_prime"],
            "native": DIMS[self.regime],
            "meta": {k: _finite_or_none(v) for k, v in self.meta.items()},
        }

    def save(self, path):
        vals = self.values
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.header(), sort_keys=True) + "\n")
            for z, row in zip(self.zeta, vals):
                fh.write(" ".join(f"{v:.17g}" for v in (z, *row)) + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline())
            data = np.loadtxt(fh, ndmin=2)
        params = ModelParams(**head["params"])
        regime = head["regime"]
        cols = {"eps-positive": [1, 2, 3, 4], "eps-zero": [1, 3, 4], "kpp": [3, 4]}[regime]
        residual = head["residual"]
        return cls(
            params=params,
            regime=regime,
            L=head["L"],
            zeta=data[:, 0],
            state=data[:, cols],
            residual=float("nan") if residual is None else residual,
            meta=head.get("meta", {}),
        )


def _finite_or_none(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def tail_slope(zeta, w, lo_frac=0.45, hi_frac=0.8):
    """Least-squares slope of log w over a window of the right tail."""
    L = zeta[-1]
    sel = (zeta > lo_frac * L) & (zeta < hi_frac * L) & (w > 0)
    if np.count_nonzero(sel) < 5:
        return math.nan
    return float(np.polyfit(zeta[sel], np.log(w[sel]), 1)[0])
