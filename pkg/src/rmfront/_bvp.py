"""Shared machinery for heteroclinic boundary-value problems.

The orbit on [-L, L] is folded onto [0, L] as the pair
Y1(x) = y(-x), Y2(x) = y(x). Continuity at x = 0 and the phase condition
then become ordinary two-point boundary conditions, and the asymptotic
projection conditions sit at x = L.
"""

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_bvp

from .errors import ContinuationFailure, InvalidInput

# Quintic Hermite on t in [0, 1]: rows give coefficients of t^0..t^5 for
# (y0, h y0', h^2 y0'', y1, h y1', h^2 y1'').
_QH = np.array(
    [
        [1, 0, 0, -10, 15, -6],
        [0, 1, 0, -6, 8, -3],
        [0, 0, 0.5, -1.5, 1.5, -0.5],
        [0, 0, 0, 10, -15, 6],
        [0, 0, 0, -4, 7, -3],
        [0, 0, 0, 0.5, -1, 0.5],
    ],
    dtype=float,
)


class QuinticHermite:
    """Piecewise quintic Hermite interpolant from values and two derivatives.

    ``y``, ``dy`` and ``d2y`` have shape (m, n) for m nodes. Evaluation
    returns shape (n,) for scalar abscissae and (k, n) for arrays.
    """

    def __init__(self, x, y, dy, d2y):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise InvalidInput("interpolation nodes must be strictly increasing")
        self.x = x
        h = np.diff(x)[:, None]
        data = np.stack(
            [y[:-1], h * dy[:-1], h**2 * d2y[:-1], y[1:], h * dy[1:], h**2 * d2y[1:]],
            axis=1,
        )  # (m-1, 6, n)
        self._coef = np.einsum("jk,ijn->ikn", _QH, data)  # (m-1, 6 powers, n)
        self._h = h[:, 0]
        self._xl = x.tolist()

    def _scalar(self, z):
        # fast path for the per-step calls of the ODE integrators
        i = min(max(bisect_right(self._xl, z) - 1, 0), len(self._xl) - 2)
        t = (z - self._xl[i]) / self._h[i]
        c = self._coef[i]
        return ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0]

    def _locate(self, z):
        i = np.clip(np.searchsorted(self.x, z, side="right") - 1, 0, self.x.size - 2)
        t = (z - self.x[i]) / self._h[i]
        return i, t

    def __call__(self, z, nu=0):
        if nu == 0 and isinstance(z, float):
            return self._scalar(z)
        z_arr = np.asarray(z, dtype=float)
        i, t = self._locate(z_arr)
        coef = self._coef[i]  # (..., 6, n)
        t = np.asarray(t)[..., None]
        if nu == 0:
            out = coef[..., 5, :]
            for p in range(4, -1, -1):
                out = out * t + coef[..., p, :]
            return out
        if nu == 1:
            out = 5 * coef[..., 5, :]
            for p in range(4, 0, -1):
                out = out * t + p * coef[..., p, :]
            return out / self._h[i][..., None]
        if nu == 2:
            out = 20 * coef[..., 5, :]
            for p in range(4, 1, -1):
                out = out * t + p * (p - 1) * coef[..., p, :]
            return out / self._h[i][..., None] ** 2
        raise InvalidInput("only derivatives up to order 2 are available")


def projection_rows(jac, keep_unstable):
    """Real rows whose null space is the unstable (or stable) subspace of ``jac``.

    With ``keep_unstable`` the rows annihilate the unstable subspace's
    complement, i.e. they are the left eigenvectors of the stable
    eigenvalues (made real). Otherwise the roles swap.
    """
    mu, left = np.linalg.eig(np.asarray(jac, dtype=float).T)
    if np.any(np.abs(mu.real) < 1e-12):
        raise InvalidInput("asymptotic linearization has a center direction")
    select = mu.real < 0 if keep_unstable else mu.real > 0
    k = int(np.count_nonzero(select))
    if k == 0:
        return np.zeros((0, jac.shape[0]))
    rows = left[:, select].T
    stacked = np.vstack([rows.real, rows.imag])
    _, s, vt = np.linalg.svd(stacked)
    if s[k - 1] < 1e-12 * s[0]:
        raise InvalidInput("boundary-condition rows are rank deficient")
    return vt[:k]


@dataclass
class BvpProblem:
    """Autonomous heteroclinic problem y' = F(y) from ``left`` to ``right``."""

    fun: object  # F(y) with y of shape (n, m)
    jac: object  # dF(y) with shape (n, n, m)
    left: np.ndarray
    right: np.ndarray
    rows_left: np.ndarray  # conditions at -L
    rows_right: np.ndarray  # conditions at +L
    phase_index: int
    phase_value: float

    @property
    def n(self):
        return self.left.size


def solve_heteroclinic(problem, L, x_nodes, guess, tol, max_nodes=200000, step=None):
    """Solve the folded problem; ``guess`` has shape (2n, len(x_nodes)).

    Returns (zeta, y, result) with zeta strictly increasing on [-L, L]
    and y of shape (len(zeta), n).
    """
    n = problem.n
    if problem.rows_left.shape[0] + problem.rows_right.shape[0] != n - 1:
        raise InvalidInput("boundary conditions do not match the system dimension")

    def fun(x, z):
        return np.vstack([-problem.fun(z[:n]), problem.fun(z[n:])])

    def fun_jac(x, z):
        m = z.shape[1]
        out = np.zeros((2 * n, 2 * n, m))
        out[:n, :n] = -problem.jac(z[:n])
        out[n:, n:] = problem.jac(z[n:])
        return out

    def bc(za, zb):
        return np.concatenate(
            [
                za[:n] - za[n:],
                [za[n + problem.phase_index] - problem.phase_value],
                problem.rows_left @ (zb[:n] - problem.left),
                problem.rows_right @ (zb[n:] - problem.right),
            ]
        )

    def bc_jac(za, zb):
        ja = np.zeros((2 * n, 2 * n))
        jb = np.zeros((2 * n, 2 * n))
        ja[:n, :n] = np.eye(n)
        ja[:n, n:] = -np.eye(n)
        ja[n, n + problem.phase_index] = 1.0
        kl = problem.rows_left.shape[0]
        jb[n + 1 : n + 1 + kl, :n] = problem.rows_left
        jb[n + 1 + kl :, n:] = problem.rows_right
        return ja, jb

    # solve_bvp scales its residual by 1 + |f|; a 10x margin keeps the
    # absolute midpoint defect under ``tol``
    res = solve_bvp(
        fun, bc, x_nodes, guess, fun_jac=fun_jac, bc_jac=bc_jac, tol=0.1 * tol,
        max_nodes=max_nodes, bc_tol=0.1 * tol,
    )
    if not res.success:
        raise ContinuationFailure(
            f"collocation failed{'' if step is None else ' at ' + step}: {res.message}",
            step=step,
        )
    x = res.x
    z = res.y
    zeta = np.concatenate([-x[::-1], x[1:]])
    y = np.concatenate([z[:n, ::-1], z[n:, 1:]], axis=1).T
    return zeta, y, res


def fold(zeta, y, x_nodes):
    """Sample a profile given on [-L, L] onto the folded representation."""
    n = y.shape[1]
    out = np.empty((2 * n, x_nodes.size))
    for j in range(n):
        out[j] = np.interp(-x_nodes, zeta, y[:, j])
        out[n + j] = np.interp(x_nodes, zeta, y[:, j])
    return out
