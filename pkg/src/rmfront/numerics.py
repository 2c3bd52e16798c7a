"""Small dense numerical kernel.

Polynomial roots, sorted eigen-decomposition, a batched Dormand-Prince
5(4) integrator for complex states, and the second compound (wedge)
lift of a square matrix.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import IntegrationFailure, InvalidInput

__all__ = [
    "IvpSolution",
    "companion",
    "compound2",
    "eig",
    "integrate_ivp",
    "poly_eval",
    "poly_roots",
    "wedge2",
]


# ---------------------------------------------------------------------------
# polynomials


def _trim(coeffs):
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    if c.ndim != 1:
        raise InvalidInput("polynomial coefficients must be one-dimensional")
    if not np.all(np.isfinite(c)):
        raise InvalidInput("polynomial coefficients must be finite")
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise InvalidInput("degenerate polynomial: all coefficients are zero")
    return c[: nz[-1] + 1]


def poly_eval(coeffs, x):
    """Evaluate a polynomial given by ascending coefficients at ``x``."""
    c = np.asarray(coeffs, dtype=complex)
    return np.polynomial.polynomial.polyval(x, c)


def companion(coeffs):
    """Companion matrix of a polynomial with ascending coefficients.

    The characteristic polynomial of the result is the monic version of
    the input.
    """
    c = _trim(coeffs)
    n = c.size - 1
    if n < 1:
        raise InvalidInput("companion matrix needs degree >= 1")
    m = np.zeros((n, n), dtype=complex)
    m[1:, :-1] = np.eye(n - 1)
    m[:, -1] = -c[:-1] / c[-1]
    return m


def poly_roots(coeffs):
    """All roots of a polynomial with ascending coefficients.

    Roots come from the companion eigenvalues, then each root gets one
    Newton step on the polynomial (kept only if it lowers the residual).
    Returned sorted by ascending real part.
    """
    c = _trim(coeffs)
    if c.size < 2:
        raise InvalidInput("polynomial of degree 0 has no roots")
    roots = np.linalg.eigvals(companion(c))
    dc = np.polynomial.polynomial.polyder(c)
    p = poly_eval(c, roots)
    dp = poly_eval(dc, roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = roots - p / dp
    better = np.isfinite(polished) & (np.abs(poly_eval(c, polished)) < np.abs(p))
    roots = np.where(better, polished, roots)
    return roots[np.lexsort((roots.imag, roots.real))]


# ---------------------------------------------------------------------------
# eigenproblems


def eig(m):
    """Eigenvalues and unit right eigenvectors, sorted by ascending real part.

    Ties in the real part are broken by the imaginary part so the order is
    deterministic. Column ``j`` of the returned matrix pairs with value ``j``.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"eig needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix entries must be finite")
    w, v = np.linalg.eig(a)
    order = np.lexsort((w.imag, w.real))
    return w[order], v[:, order]


# ---------------------------------------------------------------------------
# exterior algebra


def _pairs(n):
    return list(combinations(range(n), 2))


def compound2(a):
    """Second additive compound of an n-by-n matrix (n >= 2).

    Acts on the lexicographically ordered basis e_i ^ e_j, i < j, by
    x ^ y -> (a x) ^ y + x ^ (a y). Leading batch axes are allowed.
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 2:
        raise InvalidInput(f"compound2 needs square matrices, got shape {a.shape}")
    n = a.shape[-1]
    pairs = _pairs(n)
    index = {p: k for k, p in enumerate(pairs)}
    out = np.zeros(a.shape[:-2] + (len(pairs), len(pairs)), dtype=np.result_type(a, float))
    for col, (i, j) in enumerate(pairs):
        # (a e_i) ^ e_j + e_i ^ (a e_j)
        for k in range(n):
            for (p, q), coef_src in (((k, j), (k, i)), ((i, k), (k, j))):
                if p == q:
                    continue
                sign = 1.0
                if p > q:
                    p, q, sign = q, p, -1.0
                out[..., index[(p, q)], col] += sign * a[..., coef_src[0], coef_src[1]]
    return out


def wedge2(a):
    """Induced operator of a 4x4 matrix on the 6-dimensional wedge space.

    Basis order: e1^e2, e1^e3, e1^e4, e2^e3, e2^e4, e3^e4.
    """
    a = np.asarray(a)
    if a.shape[-2:] != (4, 4):
        raise InvalidInput(f"wedge2 needs 4x4 input, got shape {a.shape}")
    return compound2(a)


def wedge_vectors(vecs):
    """Plucker coordinates of v_1 ^ v_2 for the two columns of ``vecs``.

    ``vecs`` has shape (..., n, 2); the result has shape (..., n(n-1)/2)
    in the same basis order as :func:`compound2`.
    """
    v = np.asarray(vecs)
    n = v.shape[-2]
    pairs = _pairs(n)
    i = np.array([p[0] for p in pairs])
    j = np.array([p[1] for p in pairs])
    return v[..., i, 0] * v[..., j, 1] - v[..., j, 0] * v[..., i, 1]


# ---------------------------------------------------------------------------
# adaptive integration

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_LOW

_SAFETY = 0.9
_K_BETA1 = 0.7 / 5
_K_BETA2 = 0.4 / 5
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class IvpSolution:
    """Result of :func:`integrate_ivp`.

    ``t`` holds the output abscissae and ``y`` the states there, with the
    abscissa along axis 0 (shape ``(len(t),) + y0.shape``).
    """

    t: np.ndarray
    y: np.ndarray
    n_accepted: int = 0
    n_rejected: int = 0
    n_evals: int = 0
    steps: list = field(default_factory=list, repr=False)

    @property
    def y_end(self):
        return self.y[-1]


def _scaled_error(err, y, y_new, rtol, atol):
    # norm-wise relative error over the last axis, worst over batch axes
    e = np.abs(err)
    size = np.maximum(np.abs(y), np.abs(y_new))
    if e.ndim == 0:
        return float(e / (atol + rtol * size))
    en = e.max(axis=-1)
    sn = size.max(axis=-1)
    ratio = en / (atol + rtol * sn + 1e-300)
    return float(np.max(ratio))


def integrate_ivp(fun, y0, span, tol=1e-8, *, atol=0.0, t_eval=None, h0=None,
                  max_steps=200000, record_steps=False, fixed_step=None):
    """Integrate ``y' = fun(t, y)`` with an embedded 5(4) pair and PI control.

    ``y0`` may be real or complex and carry leading batch axes; the last
    axis is the state dimension and the step size is shared across the
    batch. Error control is relative to the state norm (``tol``) plus an
    optional absolute floor ``atol``. ``span`` may run backwards.

    By default only the endpoints are returned. With ``t_eval`` (monotone
    in the direction of integration, inside the span) the stepper lands
    exactly on each requested abscissa and records the state there.

    ``fixed_step`` disables adaptivity: every step is accepted with that
    size (clipped at output points). Used for convergence-order checks.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    t0, t1 = float(span[0]), float(span[1])
    y = np.array(y0, dtype=np.result_type(np.asarray(y0), float), copy=True)
    if not np.all(np.isfinite(y)):
        raise InvalidInput("initial state must be finite")
    direction = 1.0 if t1 >= t0 else -1.0
    length = abs(t1 - t0)

    if t_eval is None:
        targets = [t1]
    else:
        targets = [float(t) for t in np.asarray(t_eval, dtype=float)]
        if any(direction * (b - a) < 0 for a, b in zip(targets[:-1], targets[1:])):
            raise InvalidInput("t_eval must be monotone in the integration direction")
        if targets and any(direction * (t - t0) < 0 or direction * (t - t1) > 0 for t in targets):
            raise InvalidInput("t_eval must lie inside the span")
        if not targets or targets[-1] != t1:
            targets = targets + [t1]
    out_t = [t0] if t_eval is None or (targets and targets[0] != t0) else []
    out_y = [y.copy()] if out_t else []
    if t_eval is not None and targets[0] == t0:
        out_t.append(t0)
        out_y.append(y.copy())
        targets = targets[1:]

    def f(t, state):
        return np.asarray(fun(t, state))

    stats = {"acc": 0, "rej": 0, "nfev": 0}
    steps = []
    if length == 0.0:
        return IvpSolution(np.array([t0, t1]), np.stack([y, y.copy()]), 0, 0, 0, steps)

    k1 = f(t0, y)
    stats["nfev"] += 1
    if h0 is None:
        d0 = np.max(np.abs(y)) if y.size else 0.0
        d1 = np.max(np.abs(k1)) if k1.size else 0.0
        if d0 < 1e-12 or d1 < 1e-12:
            h = 1e-6 * max(1.0, length)
        else:
            h = 0.01 * d0 / d1
        h = min(h, length)
    else:
        h = min(abs(float(h0)), length)
    if fixed_step is not None:
        if not fixed_step > 0:
            raise InvalidInput("fixed_step must be positive")
        h = float(fixed_step)

    t = t0
    err_prev = 1.0
    k = [None] * 7
    n_out = len(targets)
    target_idx = 0
    while target_idx < n_out:
        target = targets[target_idx]
        if stats["acc"] + stats["rej"] > max_steps:
            raise IntegrationFailure(f"step budget exhausted at t={t:.6g}", abscissa=t)
        remaining = direction * (target - t)
        hit = False
        if h >= remaining:
            h_try = remaining
            hit = True
        else:
            h_try = h
        min_h = 16 * np.spacing(max(abs(t), 1.0))
        if h_try < min_h and not hit:
            raise IntegrationFailure(f"step size underflow at t={t:.6g}", abscissa=t)
        hs = direction * h_try
        k[0] = k1
        # oversized trial steps may overflow; they are rejected below
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(1, 7):
                acc = y + hs * sum(a * k[j] for j, a in enumerate(_A[s]) if a != 0.0)
                k[s] = f(t + _C[s] * hs, acc)
            y_new = acc  # FSAL: stage 7 argument is the 5th-order solution
            err = hs * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
            ratio = _scaled_error(err, y, y_new, tol, atol)
        stats["nfev"] += 6
        if not np.isfinite(ratio):
            ratio = 1e10
        if fixed_step is not None:
            ratio = min(ratio, 1.0)
        if ratio <= 1.0:
            t = target if hit else t + hs
            y = y_new
            k1 = k[6]
            stats["acc"] += 1
            if record_steps:
                steps.append((t, h_try, ratio))
            r = max(ratio, 1e-10)
            factor = _SAFETY * r ** (-_K_BETA1) * err_prev ** _K_BETA2
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = r
            if hit:
                out_t.append(t)
                out_y.append(y.copy())
                target_idx += 1
                # keep the controller's step rather than the clipped one
                h = max(h, h_try * factor) if h_try < h else h_try * factor
            else:
                h = h_try * factor
            if fixed_step is not None:
                h = float(fixed_step)
        else:
            stats["rej"] += 1
            factor = max(_MIN_FACTOR, _SAFETY * ratio ** (-0.2))
            h = h_try * factor
            if h < 16 * np.spacing(max(abs(t), 1.0)):
                raise IntegrationFailure(f"step size underflow at t={t:.6g}", abscissa=t)
    return IvpSolution(
        np.asarray(out_t), np.stack(out_y), stats["acc"], stats["rej"], stats["nfev"], steps
    )
