"""Evans function of the weighted linearization and its winding number.

The eigenvalue problem is written as U' = A~(zeta, lambda) U with
A~ = A(zeta, lambda) + s(zeta) I and s(zeta) = sigma e^{sigma zeta} / (1 + e^{sigma zeta}),
the logarithmic derivative of the weight 1 + e^{sigma zeta}. Because A is
affine in lambda, the lifted field for any batch of lambda values is
W0(zeta) + lambda W1 + (k s(zeta) - mu(lambda)) I.

Decaying subspaces are carried as Plucker vectors (compound method) or as
an orthonormal frame plus a scalar (polar method). The two are paired at
the matching point by the top exterior power.
"""

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.integrate import quad
from scipy.special import expit

from ._tw import kpp_dh
from .errors import InvalidInput, SplittingDegenerate, UnresolvedWinding
from .numerics import compound2, integrate_ivp, wedge_vectors

__all__ = [
    "asymptotic_matrix",
    "Contour",
    "EvansResult",
    "EvansSystem",
    "build_contour",
    "build_kpp_system",
    "build_system",
    "evans_eval",
    "export_trace",
    "splitting",
    "winding",
    "winding_from_values",
]

SPLIT_TOL = 1e-10
# eig resolves a double root only to O(sqrt(machine eps))
COLLIDE_TOL = 1e-6
# positions of u and w in the native front state of each regime
_UW_INDEX = {"eps-positive": (0, 2), "eps-zero": (0, 1), "kpp": (None, 0)}
CONVERGED = 1e-10  # front-to-equilibrium distance at which integration starts


# ---------------------------------------------------------------------------
# exterior algebra helpers


def _lift_map(n, k):
    """Matrix taking vec(A) (row-major n x n) to vec of its k-th additive compound."""
    if k == 1:
        return np.eye(n * n)
    m = n * (n - 1) // 2
    out = np.zeros((m * m, n * n))
    for j in range(n * n):
        e = np.zeros(n * n)
        e[j] = 1.0
        out[:, j] = compound2(e.reshape(n, n)).ravel()
    return out


def _pairing_table(n, k_left, k_right):
    """Index pairs and signs for the top-degree product of a k_left and a k_right vector."""
    left = list(combinations(range(n), k_left))
    right = list(combinations(range(n), k_right))
    ia, ib, sg = [], [], []
    for a, I in enumerate(left):
        for b, J in enumerate(right):
            if set(I) & set(J):
                continue
            perm = list(I) + list(J)
            inversions = sum(1 for x in range(n) for y in range(x + 1, n) if perm[x] > perm[y])
            ia.append(a)
            ib.append(b)
            sg.append(-1.0 if inversions % 2 else 1.0)
    return np.array(ia), np.array(ib), np.array(sg)


def _plucker(vecs):
    """k-vector coordinates of the columns of ``vecs`` (..., n, k), k in {1, 2}."""
    if vecs.shape[-1] == 1:
        return vecs[..., 0]
    return wedge_vectors(vecs)


# ---------------------------------------------------------------------------
# systems


@dataclass
class EvansSystem:
    """Weighted eigenvalue system along a computed front.

    ``dim`` is 4 (epsilon > 0), 3 (epsilon = 0) or 2 (reduced scalar
    problem). ``k_minus`` decaying directions are tracked from the
    coexistence end and ``k_plus`` from the prey-only end.
    """

    profile: object
    sigma: float
    regime: str
    dim: int
    k_minus: int
    k_plus: int
    B: np.ndarray  # d A / d lambda
    lam_ref: float = 1.0
    zeta_minus: float = None
    zeta_plus: float = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def params(self):
        return self.profile.params

    # coefficient matrices ------------------------------------------------

    def base_matrix(self, zeta):
        """A(zeta, 0) for an array of abscissae, shape (len(zeta), n, n)."""
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        p = self.params
        n = self.dim
        out = np.zeros((zeta.size, n, n))
        if self.regime == "kpp":
            w = np.clip(self.profile(zeta)[..., 0], 0.0, 1.0)
            out[:, 0, 1] = 1.0
            out[:, 1, 0] = -kpp_dh(w, p)
            out[:, 1, 1] = -p.c
            return out
        u, w = self.profile.uw(zeta)
        return self._from_uw(u, w, out)

    def _from_uw(self, u, w, out):
        p = self.params
        a, e, c, d = p.alpha, p.eta, p.c, p.delta
        fu = 1.0 - 2.0 * u - w / (1.0 + u) ** 2
        fw = -u / (1.0 + u)
        gu = (e + a) * w / (e + u) ** 2
        gw = (u - a) / (e + u)
        if self.regime == "eps-positive":
            eps = p.epsilon
            out[..., 0, 1] = 1.0
            out[..., 1, 0] = -fu / (eps * d)
            out[..., 1, 1] = -c / eps
            out[..., 1, 2] = -fw / (eps * d)
            out[..., 2, 3] = 1.0
            out[..., 3, 0] = -gu
            out[..., 3, 2] = -gw
            out[..., 3, 3] = -c
        else:
            out[..., 0, 0] = -fu / (c * d)
            out[..., 0, 1] = -fw / (c * d)
            out[..., 1, 2] = 1.0
            out[..., 2, 0] = -gu
            out[..., 2, 1] = -gw
            out[..., 2, 2] = -c
        return out

    def weight(self, zeta):
        return self.sigma * expit(self.sigma * np.asarray(zeta, dtype=float))

    def matrix(self, zeta, lam):
        """Weighted A~(zeta, lambda); lam may be an array (leading axis)."""
        lam = np.asarray(lam, dtype=complex)
        base = self.base_matrix(zeta)[0]
        return base + lam[..., None, None] * self.B + self.weight(zeta) * np.eye(self.dim)

    def asymptotic(self, side, lam):
        """Limits of A~ at -inf (side=-1) or +inf (side=+1)."""
        lam = np.asarray(lam, dtype=complex)
        base = self._asym_base(side)
        shift = self.sigma if side > 0 else 0.0
        return base + lam[..., None, None] * self.B + shift * np.eye(self.dim)

    def _asym_base(self, side):
        key = ("asym", side)
        if key not in self._cache:
            p = self.params
            n = self.dim
            out = np.zeros((n, n))
            if self.regime == "kpp":
                w = 1.0 - p.alpha**2 if side < 0 else 0.0
                out[0, 1] = 1.0
                out[1, 0] = -kpp_dh(np.asarray(w), p)
                out[1, 1] = -p.c
            else:
                u, w = (p.alpha, 1.0 - p.alpha**2) if side < 0 else (1.0, 0.0)
                self._from_uw(np.float64(u), np.float64(w), out)
            self._cache[key] = out
        return self._cache[key]

    def trace(self, zeta, lam):
        """Trace of A~(zeta, lambda)."""
        A = self.matrix(zeta, lam)
        return np.trace(A, axis1=-2, axis2=-1)

    # asymptotic decompositions -----------------------------------------

    def decaying(self, side, lam):
        """Growth rates and bases of the decaying subspace at one end.

        Returns (mu_sum, basis) with basis of shape (len(lam), n, k).
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        A = self.asymptotic(side, lam)
        w, v = np.linalg.eig(A)
        k = self.k_minus if side < 0 else self.k_plus
        order = np.argsort(-w.real if side < 0 else w.real, axis=-1, kind="stable")
        w = np.take_along_axis(w, order, axis=-1)
        v = np.take_along_axis(v, order[:, None, :], axis=-1)
        gap = np.abs(w[:, k - 1].real - w[:, k].real)
        if np.any(gap < SPLIT_TOL):
            bad = lam[int(np.argmin(gap))]
            raise SplittingDegenerate(
                f"evans: no spectral gap at {'-' if side < 0 else '+'}inf for lambda={bad:.6g}"
            )
        return w[:, :k].sum(axis=-1), v[:, :, :k]

    def reference(self, side):
        """Unit, phase-fixed k-vector at lam_ref used for analytic normalisation."""
        key = ("ref", side, self.lam_ref)
        if key not in self._cache:
            _, basis = self.decaying(side, [self.lam_ref])
            r = _plucker(basis)[0]
            r = r / np.linalg.norm(r)
            j = int(np.argmax(np.abs(r)))
            r = r * (abs(r[j]) / r[j])
            self._cache[key] = r
        return self._cache[key]

    def initial(self, side, lam, z_start=None):
        """Analytically normalised initial data at the start of one side.

        Returns (mu_sum, k-vector, basis, relative projection, scale) where
        ``basis`` spans the same subspace and k-vector = scale * plucker(basis).
        With ``z_start`` the eigenvectors get the first-order correction for
        the front's residual deviation from its end state there, and the
        weight's finite-domain factor is applied.
        """
        mu, basis = self.decaying(side, lam)
        raw = _plucker(basis)
        proj = raw @ self.reference(side).conj()
        scale = np.linalg.norm(raw, axis=-1)
        rel = np.abs(proj) / scale
        norm = 1.0 / proj
        if z_start is not None:
            basis = self._tail_corrected(side, lam, basis, z_start)
            k = basis.shape[-1]
            norm = norm * (1.0 + math.exp(-self.sigma * abs(z_start))) ** k
        with np.errstate(divide="ignore", invalid="ignore"):
            vec = _plucker(basis) * norm[:, None]
        return mu, vec, basis, rel, norm

    def _end_modes(self, side, z_start):
        """Decay rates and weighted directions of the front's deviation at z_start."""
        key = ("modes", side, z_start)
        if key not in self._cache:
            from ._tw import endpoint_jacobians, endpoints

            prof = self.profile
            end = endpoints(prof.regime, prof.params)[0 if side < 0 else 1]
            jac = endpoint_jacobians(prof.regime, prof.params)[0 if side < 0 else 1]
            dev = prof(z_start) - end
            rho, vecs = np.linalg.eig(jac)
            coef = np.linalg.solve(vecs, dev.astype(complex))
            inward = rho.real > 0 if side < 0 else rho.real < 0
            keep = inward & (np.abs(coef) * np.linalg.norm(vecs, axis=0) > 1e-15)
            modes = []
            dAdu, dAdw = self._state_derivatives(side)
            ui, wi = _UW_INDEX[prof.regime]
            for m in np.flatnonzero(keep):
                d = coef[m] * vecs[:, m]
                dA = dAdw * d[wi] + (dAdu * d[ui] if ui is not None else 0.0)
                modes.append((rho[m], dA))
            self._cache[key] = modes
        return self._cache[key]

    def _state_derivatives(self, side):
        """dA/du and dA/dw of the unweighted base matrix at an end state."""
        p = self.params
        h = 1e-6
        n = self.dim
        if self.regime == "kpp":
            w0 = 1.0 - p.alpha**2 if side < 0 else 0.0
            dA = np.zeros((n, n))
            wp, wm = np.array(w0 + h), np.array(max(w0 - h, 0.0))
            dA[1, 0] = -(kpp_dh(wp, p) - kpp_dh(wm, p)) / (wp - wm)
            return np.zeros((n, n)), dA
        u0, w0 = (p.alpha, 1.0 - p.alpha**2) if side < 0 else (1.0, 0.0)

        def at(u, w):
            return self._from_uw(np.float64(u), np.float64(w), np.zeros((n, n)))

        dAdu = (at(u0 + h, w0) - at(u0 - h, w0)) / (2 * h)
        dAdw = (at(u0, w0 + h) - at(u0, w0 - h)) / (2 * h)
        return dAdu, dAdw

    def _tail_corrected(self, side, lam, basis, z_start):
        modes = self._end_modes(side, z_start)
        if not modes:
            return basis
        A_inf = self.asymptotic(side, lam)  # (nl, n, n)
        out = basis.copy()
        n = self.dim
        eye = np.eye(n)
        # eigenvalue of each basis column: Rayleigh quotient against A_inf
        av = A_inf @ basis
        lam_cols = np.sum(np.conj(basis) * av, axis=-2) / np.sum(np.abs(basis) ** 2, axis=-2)
        for rho, dA in modes:
            # the deviation scales as e^{rho (zeta - z_start)}
            for j in range(basis.shape[-1]):
                shift = (lam_cols[:, j] + rho)[:, None, None]
                M = A_inf - shift * eye
                rhs = -(dA @ basis[:, :, j].T).T
                out[:, :, j] += np.linalg.solve(M, rhs[..., None])[..., 0]
        return out

    # lifted fields -------------------------------------------------------

    def lifted(self, k):
        key = ("lift", k)
        if key not in self._cache:
            Lmap = _lift_map(self.dim, k)
            m = int(round(math.sqrt(Lmap.shape[0])))
            W1 = (Lmap @ self.B.ravel()).reshape(m, m)
            self._cache[key] = (Lmap, W1, m)
        return self._cache[key]

    def start_points(self):
        """Abscissae where the front has reached its end states (within the domain)."""
        if "starts" not in self._cache:
            prof = self.profile
            from ._tw import endpoints

            left, right = endpoints(prof.regime, prof.params)
            dev_l = np.max(np.abs(prof.state - left), axis=1)
            dev_r = np.max(np.abs(prof.state - right), axis=1)
            z = prof.zeta
            i = np.flatnonzero(dev_l > CONVERGED)
            zl = z[max(i[0] - 1, 0)] if i.size else z[0]
            j = np.flatnonzero(dev_r > CONVERGED)
            zr = z[min(j[-1] + 1, z.size - 1)] if j.size else z[-1]
            zl = min(zl, -1.0)
            zr = max(zr, 1.0)
            if self.zeta_minus is not None:
                zl = self.zeta_minus
            if self.zeta_plus is not None:
                zr = self.zeta_plus
            self._cache["starts"] = (float(zl), float(zr))
        return self._cache["starts"]


def _regime_matrices(profile):
    p = profile.params
    if profile.regime == "eps-positive":
        B = np.zeros((4, 4))
        B[1, 0] = 1.0 / p.epsilon
        B[3, 2] = 1.0
        return 4, 2, 2, B
    if profile.regime == "eps-zero":
        B = np.zeros((3, 3))
        B[0, 0] = 1.0 / p.c
        B[2, 1] = 1.0
        return 3, 2, 1, B
    if profile.regime == "kpp":
        B = np.zeros((2, 2))
        B[1, 0] = 1.0
        return 2, 1, 1, B
    raise InvalidInput(f"unknown regime {profile.regime!r}")


def build_system(profile, sigma, lam_ref=1.0, check_sigma=True):
    """Weighted eigenvalue system for ``profile`` with weight rate ``sigma``."""
    from .spectrum import weight_interval

    sigma = float(sigma)
    if sigma < 0:
        raise InvalidInput("sigma must be nonnegative")
    if check_sigma and sigma != 0.0:
        wi = weight_interval(profile.params)
        if not wi.contains(sigma):
            raise InvalidInput(
                f"sigma={sigma:.6g} outside the admissible interval "
                f"({wi.sigma_lo:.6g}, {wi.sigma_hi:.6g})"
            )
    dim, km, kp, B = _regime_matrices(profile)
    return EvansSystem(profile, sigma, profile.regime, dim, km, kp, B, lam_ref=float(lam_ref))


@dataclass(frozen=True)
class _ParamsOnly:
    params: object
    regime: str


def asymptotic_matrix(params, side, lam, sigma=0.0):
    """Limit of the weighted matrix at -inf (side=-1) or +inf (side=+1).

    Needs only the parameters, not a front.
    """
    from ._tw import regime_of

    stub = _ParamsOnly(params, regime_of(params))
    dim, km, kp, B = _regime_matrices(stub)
    return EvansSystem(stub, float(sigma), stub.regime, dim, km, kp, B).asymptotic(side, lam)


def build_kpp_system(profile, sigma, lam_ref=1.0, check_sigma=True):
    """Weighted scalar system along a reduced front."""
    if profile.regime != "kpp":
        raise InvalidInput("build_kpp_system needs a reduced (kpp) profile")
    return build_system(profile, sigma, lam_ref=lam_ref, check_sigma=check_sigma)


@dataclass(frozen=True)
class Splitting:
    unstable_minus: int
    stable_plus: int
    ok: bool
    region_ok: bool


def splitting(system, lam):
    """Eigenvalue counts of the asymptotic matrices at one lambda."""
    out = []
    for side in (-1, 1):
        w = np.linalg.eigvals(system.asymptotic(side, complex(lam)))
        if np.any(np.abs(w.real) < SPLIT_TOL):
            raise SplittingDegenerate(f"evans: eigenvalue on the imaginary axis at lambda={lam}")
        if side > 0 and system.k_plus < system.dim:
            srt = w[np.argsort(w.real, kind="stable")]
            a, b = srt[system.k_plus - 1], srt[system.k_plus]
            if abs(a - b) < COLLIDE_TOL * max(1.0, abs(a)):
                raise SplittingDegenerate(f"evans: eigenvalue collision at +inf for lambda={lam}")
        out.append(int(np.count_nonzero(w.real > 0 if side < 0 else w.real < 0)))
    p = system.params
    a_plus = (1.0 - p.alpha) / (1.0 + p.eta)
    limit = a_plus - p.c**2 / 4
    if p.epsilon > 0:
        limit = max(limit, -1.0 / p.delta - p.c**2 / (4 * p.epsilon))
    ok = out[0] == system.k_minus and out[1] == system.k_plus
    return Splitting(out[0], out[1], ok, complex(lam).real >= limit)


# ---------------------------------------------------------------------------
# evaluation


def _weight_scalar(sigma, z):
    x = sigma * z
    if x >= 0:
        return sigma / (1.0 + math.exp(-x))
    ex = math.exp(x)
    return sigma * ex / (1.0 + ex)


def _base_scalar(system, prof, kpp, z, buf):
    if kpp:
        return system.base_matrix(z)[0]
    u, w = prof.uw(float(z))
    return system._from_uw(float(u), float(w), buf)[0]


def _field_compound(system, k, lam, mu, sign_shift):
    Lmap, W1, m = system.lifted(k)
    n = system.dim
    buf = np.zeros((1, n, n))
    lam = lam[:, None]
    mu = mu[:, None]
    prof = system.profile
    kpp = system.regime == "kpp"

    def fun(z, y):
        A0 = _base_scalar(system, prof, kpp, z, buf)
        W0 = (Lmap @ A0.ravel()).reshape(m, m)
        s = _weight_scalar(system.sigma, z)
        return y @ W0.T + lam * (y @ W1.T) + (k * s - mu) * y

    return fun


def _integrate_side(system, side, lam, tol, zeta0, method):
    z_start = system.start_points()[0 if side < 0 else 1]
    mu, vec, basis, proj, norm = system.initial(side, lam, z_start=z_start)
    k = system.k_minus if side < 0 else system.k_plus
    if method == "compound":
        fun = _field_compound(system, k, lam, mu, side)
        sol = integrate_ivp(fun, vec, (z_start, zeta0), tol)
        return sol.y_end, mu, proj, sol
    # polar: frame Omega (n x k) and scalar gamma
    q, r = np.linalg.qr(basis)
    det_r = np.prod(np.diagonal(r, axis1=-2, axis2=-1), axis=-1)
    gamma0 = det_r * norm
    n = system.dim
    nl = lam.size
    lam_c = lam[:, None, None]
    prof = system.profile
    kpp = system.regime == "kpp"
    buf = np.zeros((1, n, n))
    eye = np.eye(n)

    def fun(z, y):
        om = y[:, : n * k].reshape(nl, n, k)
        g = y[:, n * k]
        A0 = _base_scalar(system, prof, kpp, z, buf)
        s = _weight_scalar(system.sigma, z)
        A = A0 + lam_c * system.B + s * eye
        aom = A @ om
        h = np.conj(np.swapaxes(om, -1, -2)) @ aom
        dom = aom - om @ h
        dg = (np.trace(h, axis1=-2, axis2=-1) - mu) * g
        return np.concatenate([dom.reshape(nl, n * k), dg[:, None]], axis=1)

    y0 = np.concatenate([q.reshape(nl, n * k), gamma0[:, None]], axis=1)
    sol = integrate_ivp(fun, y0, (z_start, zeta0), tol)
    yend = sol.y_end
    om = yend[:, : n * k].reshape(nl, n, k)
    vec = _plucker(om) * yend[:, n * k][:, None]
    return vec, mu, proj, sol


def _trace_correction(system, lam, mu_sum, zeta0):
    """exp(-int_0^zeta0 (tr A~ - mu_- - mu_+)) taking a zeta0 pairing back to 0."""
    if zeta0 == 0.0:
        return np.ones_like(lam)
    p = system.params
    n = system.dim
    s_int = math.log1p(math.exp(system.sigma * zeta0)) - math.log(2.0) if system.sigma else 0.0
    # tr A~ = lambda tr B + tr A(zeta, 0) + n s(zeta)
    if system.regime == "eps-positive":
        base_int = (-p.c / p.epsilon - p.c) * zeta0
    elif system.regime == "kpp":
        base_int = -p.c * zeta0
    else:
        base_int, _ = quad(lambda z: np.trace(system.base_matrix(z)[0]), 0.0, zeta0,
                           epsabs=1e-13, epsrel=1e-12, limit=200)
    tr_b = np.trace(system.B)
    integral = lam * tr_b * zeta0 + base_int + n * s_int - mu_sum * zeta0
    return np.exp(-integral)


@dataclass
class EvansBatch:
    values: np.ndarray
    projection_min: float
    steps: int


def evans_eval(system, lam, tol=1e-8, method="compound", zeta0=0.0, details=False):
    """Evans function at one or many lambda.

    Returns a complex scalar for scalar input and an array otherwise.
    With ``details`` an :class:`EvansBatch` carrying diagnostics is returned.
    """
    if method not in ("compound", "polar"):
        raise InvalidInput(f"unknown method {method!r}")
    scalar = np.ndim(lam) == 0
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    zl, zr = system.start_points()
    if not zl <= zeta0 <= zr:
        raise InvalidInput("matching point outside the integration domain")
    ym, mum, pm, sm = _integrate_side(system, -1, lam_arr, tol, zeta0, method)
    yp, mup, pp, sp = _integrate_side(system, 1, lam_arr, tol, zeta0, method)
    key = (system.dim, system.k_minus, system.k_plus)
    if ("pair", key) not in system._cache:
        system._cache[("pair", key)] = _pairing_table(*key)
    ia, ib, sg = system._cache[("pair", key)]
    vals = np.sum(sg * ym[:, ia] * yp[:, ib], axis=-1)
    vals = vals * _trace_correction(system, lam_arr, mum + mup, zeta0)
    if details:
        return EvansBatch(vals, float(min(pm.min(), pp.min())), sm.n_accepted + sp.n_accepted)
    return complex(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# contours and winding


@dataclass
class Contour:
    """Closed counter-clockwise boundary of the right half-disk of ``radius``.

    ``points`` run R -> (upper arc) -> iR -> (imaginary axis) -> -iR ->
    (lower arc) -> R, so first == last. ``upper`` is the R ... 0 part.
    """

    radius: float
    points: np.ndarray
    upper: np.ndarray

    def __len__(self):
        return self.points.size


def build_contour(radius, n_min=64):
    """Uniformly sampled contour with at least ``n_min`` points, conjugation closed."""
    if not radius > 0:
        raise InvalidInput("radius must be positive")
    if n_min < 64:
        raise InvalidInput("n_min must be at least 64")
    half = int(math.ceil(n_min / 2))
    n_arc = max(4, int(round(half * math.pi / (math.pi + 2))))
    n_axis = max(4, half - n_arc)
    theta = np.linspace(0.0, 0.5 * math.pi, n_arc + 1)
    arc = radius * np.exp(1j * theta)
    axis = 1j * np.linspace(radius, 0.0, n_axis + 1)[1:]
    upper = np.concatenate([arc, axis])
    upper[0] = complex(radius, 0.0)
    upper[-1] = 0.0
    lower = np.conj(upper[::-1])[1:]
    pts = np.concatenate([upper, lower])
    return Contour(float(radius), pts, upper)


@dataclass
class EvansResult:
    lam: np.ndarray  # upper-half samples, R ... 0
    values: np.ndarray
    total_arg: float
    winding: int
    refinements: int
    max_jump: float
    radius: float
    sigma: float
    method: str = "compound"
    projection_min: float = math.nan
    evaluations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def arg_profile(self):
        return np.concatenate([[0.0], np.cumsum(np.angle(self.values[1:] / self.values[:-1]))])

    def full_trace(self):
        """Samples and values on the whole closed contour (conjugate half appended)."""
        lam = np.concatenate([self.lam, np.conj(self.lam[::-1])[1:]])
        vals = np.concatenate([self.values, np.conj(self.values[::-1])[1:]])
        return lam, vals

    def to_dict(self):
        return {
            "winding": self.winding,
            "total_arg": self.total_arg,
            "radius": self.radius,
            "sigma": self.sigma,
            "method": self.method,
            "refinements": self.refinements,
            "max_jump": self.max_jump,
            "samples_upper": int(self.lam.size),
            "evaluations": self.evaluations,
            "projection_min": self.projection_min,
            **self.meta,
        }


def _needs_split(v1, v2, max_jump, max_ratio):
    jump = np.abs(np.angle(v2 / v1))
    ratio = np.abs(np.log(np.abs(v2) / np.abs(v1)))
    return (jump >= max_jump) | (ratio > math.log(max_ratio))


def _midpoints(l1, l2, radius):
    """Path midpoint: along the arc when both ends are on it, else the chord."""
    on_arc = (np.abs(np.abs(l1) - radius) < 1e-12 * radius) & (
        np.abs(np.abs(l2) - radius) < 1e-12 * radius) & (l1.real > 0) & (l2.real > 0)
    arcm = radius * np.exp(0.5j * (np.angle(l1) + np.angle(l2)))
    return np.where(on_arc, arcm, 0.5 * (l1 + l2))


def winding_from_values(values):
    """Winding number of a closed sequence of nonzero complex values."""
    v = np.asarray(values, dtype=complex)
    if np.any(v == 0):
        raise InvalidInput("zero value on the contour")
    total = float(np.sum(np.angle(v[1:] / v[:-1])))
    return int(round(total / (2 * math.pi))), total


def winding(system, contour, tol=1e-8, method="compound", max_jump=0.5 * math.pi,
            max_depth=12, max_ratio=10.0, evaluate=None):
    """Winding number of the Evans function around ``contour``.

    Only the upper half is evaluated; conjugate symmetry doubles its
    argument change. Segments whose phase jump reaches ``max_jump`` or
    whose modulus ratio exceeds ``max_ratio`` are bisected up to
    ``max_depth`` times. ``evaluate`` overrides the Evans evaluation
    (a callable on an array of lambda).
    """
    if evaluate is None:
        stats = {"proj": math.inf, "evals": 0}

        def evaluate(lams):
            b = evans_eval(system, lams, tol=tol, method=method, details=True)
            stats["proj"] = min(stats["proj"], b.projection_min)
            stats["evals"] += lams.size
            return b.values
    else:
        stats = {"proj": math.nan, "evals": 0}
        user = evaluate

        def evaluate(lams):
            stats["evals"] += lams.size
            return np.asarray(user(lams), dtype=complex)

    lam = np.array(contour.upper, dtype=complex)
    vals = evaluate(lam)
    depth = np.zeros(lam.size - 1, dtype=int)  # depth of each segment
    refinements = 0
    while True:
        if np.any(~np.isfinite(vals)) or np.any(vals == 0):
            bad = lam[~np.isfinite(vals) | (vals == 0)][0]
            raise UnresolvedWinding(f"evans: value not finite or zero at lambda={bad:.6g}",
                                    segment=(bad, bad))
        split = _needs_split(vals[:-1], vals[1:], max_jump, max_ratio)
        if not np.any(split):
            break
        idx = np.flatnonzero(split)
        too_deep = idx[depth[idx] >= max_depth]
        if too_deep.size:
            i = int(too_deep[0])
            raise UnresolvedWinding(
                f"evans: phase unresolved between lambda={lam[i]:.6g} and {lam[i + 1]:.6g}",
                segment=(complex(lam[i]), complex(lam[i + 1])),
            )
        mids = _midpoints(lam[idx], lam[idx + 1], contour.radius)
        new_vals = evaluate(mids)
        refinements += idx.size
        lam = np.insert(lam, idx + 1, mids)
        vals = np.insert(vals, idx + 1, new_vals)
        new_depth = depth[idx] + 1
        depth[idx] = new_depth
        depth = np.insert(depth, idx + 1, new_depth)
    steps = np.angle(vals[1:] / vals[:-1])
    half = float(np.sum(steps))
    total = 2.0 * half
    w = total / (2 * math.pi)
    return EvansResult(
        lam=lam,
        values=vals,
        total_arg=total,
        winding=int(round(w)),
        refinements=refinements,
        max_jump=float(np.max(np.abs(steps))) if steps.size else 0.0,
        radius=contour.radius,
        sigma=system.sigma if system is not None else math.nan,
        method=method,
        projection_min=stats["proj"],
        evaluations=stats["evals"],
        meta={"integer_defect": abs(w - round(w))},
    )


def export_trace(result, path):
    """Write (Re lambda, Im lambda, Re E, Im E, accumulated argument) for the closed contour."""
    lam, vals = result.full_trace()
    acc = np.concatenate([[0.0], np.cumsum(np.angle(vals[1:] / vals[:-1]))])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"columns": ["re_lambda", "im_lambda", "re_E", "im_E", "arg"],
                             **result.to_dict()}, sort_keys=True) + "\n")
        for l, v, a in zip(lam, vals, acc):
            fh.write(f"{l.real:.17g} {l.imag:.17g} {v.real:.17g} {v.imag:.17g} {a:.17g}\n")
