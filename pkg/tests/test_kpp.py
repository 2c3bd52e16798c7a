import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmfront.bounds import bound_kpp, contour_radius
from rmfront.errors import DomainError, InvalidInput, NonComparable
from rmfront.evans import build_contour, build_kpp_system, build_system, winding
from rmfront.front import decay_rate_plus
from rmfront.kpp import (
    compare_counts,
    kpp_evans,
    kpp_front_solve,
    kpp_potential,
    kpp_reaction,
    kpp_reaction_deriv,
    nullcline_u,
)
from rmfront.model import ModelParams, reaction


def test_nullcline_values(ess_params):
    assert nullcline_u(0.0) == 1.0
    a = ess_params.alpha
    assert nullcline_u(1 - a**2) == pytest.approx(a, abs=1e-15)
    u = nullcline_u(0.5)
    assert u == pytest.approx(0.70711, abs=1e-5)
    assert abs(reaction(u, 0.5, ess_params)[0]) <= 1e-12


def test_nullcline_domain():
    with pytest.raises(DomainError):
        nullcline_u(1.2)
    with pytest.raises(DomainError):
        nullcline_u(np.array([0.2, -0.1]))


def test_kpp_reaction_values(ess_params):
    a = ess_params.alpha
    assert kpp_reaction(0.0, ess_params) == 0.0
    assert abs(kpp_reaction(1 - a**2, ess_params)) <= 1e-16
    # hand value: 0.2 (sqrt(0.8) - 0.75) / (3 + sqrt(0.8))
    assert kpp_reaction(0.2, ess_params) == pytest.approx(0.0074171, abs=1e-7)
    assert kpp_reaction_deriv(0.0, ess_params) == pytest.approx((1 - a) / (ess_params.eta + 1))
    assert kpp_reaction_deriv(1 - a**2, ess_params) < 0
    with pytest.raises(DomainError):
        kpp_reaction(1.5, ess_params)


def test_kpp_reaction_deriv_matches_fd(ess_params):
    w = np.linspace(0.01, 0.9, 50)
    h = 1e-6
    fd = (kpp_reaction(w + h, ess_params) - kpp_reaction(w - h, ess_params)) / (2 * h)
    assert np.max(np.abs(fd - kpp_reaction_deriv(w, ess_params))) <= 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 5.0))
def test_kpp_structure(alpha, eta):
    p = ModelParams(alpha, eta, 0.1, 0.01, 1.0)
    a = 1 - alpha**2
    w = np.linspace(0, a, 1002)[1:-1]
    h = kpp_reaction(w, p)
    assert np.all(h > 0)
    d2 = np.diff(kpp_reaction_deriv(w, p))
    assert np.all(d2 < 0)
    assert kpp_reaction_deriv(0.0, p) > 0 and kpp_reaction_deriv(a, p) < 0


def test_front_boundary_values(kpp_front, ess_params):
    a = ess_params.alpha
    assert abs(kpp_front.w[0] - (1 - a**2)) <= 1e-4
    assert abs(kpp_front.w[-1]) <= 1e-4
    assert np.all(kpp_front.w[1:-1] > 0) and np.all(kpp_front.w < 1)
    mid = np.argmin(np.abs(kpp_front.zeta))
    assert kpp_front.w[mid] == pytest.approx(0.5 * (1 - a**2), abs=1e-10)
    assert kpp_front.residual <= 1e-8


def test_front_decay_rate(kpp_front):
    z, w = kpp_front.zeta, kpp_front.w
    sel = (z > 10) & (z < 0.5 * z[-1]) & (w > 1e-12)
    slope = np.polyfit(z[sel], np.log(w[sel]), 1)[0]
    nu = decay_rate_plus(kpp_front.params)
    assert abs(slope / nu - 1) <= 0.2


def test_front_below_min_speed(ess_params):
    with pytest.raises(DomainError):
        kpp_front_solve(ess_params.with_(c=0.45))


def test_potential_limits(kpp_front, ess_params):
    p = ess_params
    v = kpp_potential(kpp_front)
    assert v[-1] == pytest.approx((1 - p.alpha) / (p.eta + 1), abs=1e-5)
    assert v[0] == pytest.approx(-(1 - p.alpha**2) / (2 * p.alpha * (p.alpha + p.eta)), abs=1e-5)


def test_potential_matches_fd_of_reaction(kpp_front, ess_params):
    idx = np.linspace(1, kpp_front.zeta.size - 2, 100).astype(int)
    w = kpp_front.w[idx]
    h = 1e-6
    fd = (kpp_reaction(w + h, ess_params) - kpp_reaction(np.clip(w - h, 0, None), ess_params)) / (
        w + h - np.clip(w - h, 0, None))
    assert np.max(np.abs(kpp_potential(kpp_front)[idx] - fd)) <= 1e-6
    assert np.max(np.abs(kpp_potential(kpp_front)[idx] - kpp_reaction_deriv(w, ess_params))) <= 1e-8


def test_potential_off_node(kpp_front):
    z = np.array([-3.3, 0.1, 7.7])
    v = kpp_potential(kpp_front, z)
    assert v.shape == (3,) and np.all(np.isfinite(v))


def test_kpp_evans_symmetry(kpp_front, sigma_mid):
    sigma = sigma_mid(kpp_front.params)
    lam = np.array([0.3 + 0.4j, 1.1 - 0.2j, 0.05 + 0.7j])
    a = kpp_evans(kpp_front, lam, sigma)
    b = kpp_evans(kpp_front, np.conj(lam), sigma)
    assert np.max(np.abs(b - np.conj(a)) / np.abs(a)) <= 1e-10
    real = kpp_evans(kpp_front, np.array([0.0, 0.4]), sigma)
    assert np.max(np.abs(real.imag) / np.abs(real)) <= 1e-10


def test_kpp_winding_zero(kpp_front, sigma_mid):
    p = kpp_front.params
    sup_h = float(np.max(np.abs(kpp_potential(kpp_front))))
    radius = contour_radius(bound_kpp(p, sup_h))
    system = build_kpp_system(kpp_front, sigma_mid(p))
    assert winding(system, build_contour(radius)).winding == 0


def test_compare_counts(ess_front, kpp_front, sigma_mid):
    sigma = sigma_mid(ess_front.params)
    full = build_system(ess_front, sigma)
    rep = compare_counts(full, kpp_front, sigma, 0.6)
    assert rep.equal and rep.winding_full == rep.winding_kpp == 0
    assert rep.to_dict()["equal"] is True


def test_compare_counts_guards(ess_front, kpp_front, sigma_mid):
    sigma = sigma_mid(ess_front.params)
    full = build_system(ess_front, sigma)
    with pytest.raises(NonComparable):
        compare_counts(full, kpp_front, sigma, 1.0, kpp_sigma=sigma + 0.01)
    with pytest.raises(NonComparable):
        compare_counts(full, kpp_front, sigma + 0.01, 1.0)
    other = kpp_front_solve(ess_front.params.with_(c=1.2))
    with pytest.raises(NonComparable):
        compare_counts(full, other, sigma, 1.0)


def test_kpp_system_needs_kpp_profile(ess_front):
    with pytest.raises(InvalidInput):
        build_kpp_system(ess_front, 0.2)
