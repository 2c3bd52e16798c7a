"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import itertools
import time

import numpy as np
import pytest

from rmfront.evans import (
    asymptotic_matrix,
    build_contour,
    build_system,
    evans_eval,
    winding,
)
from rmfront.front import solve_front, translation_residual
from rmfront.kpp import compare_counts, kpp_front_solve, kpp_potential, kpp_reaction
from rmfront.model import ModelParams, jacobian, reaction
from rmfront.numerics import wedge2
from rmfront.pipeline import run_case
from rmfront.spectrum import (
    curve_residual,
    disc_roots,
    ess_curves_minus,
    ess_curves_plus,
    kpp_ess_curves,
    spectral_gap,
    weight_inequalities,
    weight_interval,
    weighted_curves_plus,
)

REF = ModelParams(0.75, 3.0, 0.1, 0.01, 1.0)
CASE_LIMIT = 120.0  # seconds per sweep case
GRID = list(itertools.product((2.0, 2.5, 3.0), (0.1, 0.45, 0.8), (1.0, 1.5, 2.0)))


def _grid(epsilon):
    out = []
    for eta, alpha, c in GRID:
        out.append(run_case(ModelParams(alpha, eta, 0.1, epsilon, c)))
    return out


@pytest.fixture(scope="module")
def grid_eps():
    return _grid(0.05)


@pytest.fixture(scope="module")
def grid_zero():
    return _grid(0.0)


def _rel(a, b):
    return np.abs(a - b) / np.maximum(np.abs(a), np.abs(b))


def test_criterion_1_disc_roots(acceptance_report):
    k1, k2 = disc_roots(REF)
    k1z, k2z = disc_roots(REF.with_(epsilon=0.0))
    n = 2000
    t0 = time.perf_counter()
    for _ in range(n):
        disc_roots(REF)
    per_call = (time.perf_counter() - t0) / n
    ok = (abs(k1 - 2.2506) <= 5e-4 and abs(k2 - 2.8146) <= 5e-4
          and abs(k1z - 2.2393) <= 5e-4 and abs(k2z - 2.8005) <= 5e-4 and per_call < 1e-3)
    acceptance_report(1, ok, f"disc roots ({k1:.5f}, {k2:.5f}), eps=0 ({k1z:.5f}, {k2z:.5f}), "
                             f"{per_call * 1e6:.1f} us per call")
    assert ok


def test_criterion_2_spectral_gap(acceptance_report):
    gap = spectral_gap(REF)
    curves = ess_curves_minus(REF)
    n = sum(len(cv) for cv in curves)
    top = max(cv.max_real for cv in curves)
    ok = abs(abs(gap) - 0.0787) <= 5e-4 and abs(top - gap) <= 1e-6 and n >= 1590
    acceptance_report(2, ok, f"gap {gap:.6f}; max Re over {n} minus-side samples {top:.6f}")
    assert ok


def test_criterion_3_weight_interval(acceptance_report):
    wi = weight_interval(REF)
    first, second = weight_inequalities(REF, wi.midpoint)
    ok = (abs(wi.sigma_lo - 0.067) <= 5e-3 and abs(wi.sigma_hi - 0.93) <= 5e-3
          and first < 0 and second < 0)
    acceptance_report(3, ok, f"interval ({wi.sigma_lo:.4f}, {wi.sigma_hi:.4f}); midpoint "
                             f"inequalities {first:.4g}, {second:.4g}")
    assert ok


def test_criterion_4_asymptotic_eigenvalues(acceptance_report):
    ev = np.sort(np.linalg.eigvals(asymptotic_matrix(REF, -1, 3.0)).real)
    ref = np.array([-108.6758287, -2.314599976, 1.319833682, 8.670594954])
    worst = float(np.max(np.abs(ev / ref - 1)))
    ok = worst <= 1e-6
    acceptance_report(4, ok, f"eigenvalues {', '.join(f'{v:.9g}' for v in ev)}; "
                             f"max relative error {worst:.1e}")
    assert ok


def _grid_summary(results):
    resolved = [r for r in results if r.status == "ok"]
    windings = sorted({r.winding for r in resolved})
    slowest = max(r.seconds for r in results)
    skipped = [f"(alpha={r.params.alpha}, eta={r.params.eta}, c={r.params.c}): {r.status}"
               for r in results if r.status != "ok"]
    return resolved, windings, slowest, skipped


@pytest.mark.slow
def test_criterion_5_winding_grid(grid_eps, grid_zero, acceptance_report):
    ok = True
    details = []
    for label, results in (("eps=0.05", grid_eps), ("eps=0", grid_zero)):
        resolved, windings, slowest, skipped = _grid_summary(results)
        # every resolved case winds zero; unresolved ones are front failures only
        good = (windings == [0] and slowest < CASE_LIMIT and len(resolved) >= 18
                and all(r.status == "front-failure" for r in results if r.status != "ok"))
        ok &= good
        details.append(f"{label}: {len(resolved)}/27 resolved, windings {windings}, "
                       f"slowest {slowest:.1f} s")
        for line in skipped:
            print(f"  {label} unresolved {line}")
    acceptance_report(5, ok, "; ".join(details))
    assert ok


@pytest.mark.slow
def test_criterion_6_enlargement(grid_eps, acceptance_report):
    resolved = [r for r in grid_eps if r.status == "ok"]
    picks = resolved[:: max(1, len(resolved) // 5)][:5]
    pairs = []
    for r in picks:
        big = winding(r.system, build_contour(1.5 * r.radius))
        pairs.append((r.winding, big.winding))
    ok = len(pairs) == 5 and all(a == b for a, b in pairs)
    acceptance_report(6, ok, f"windings at R and 1.5R: {pairs}")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("alpha,eta,c,delta,epsilon", [
    (0.75, 3.0, 1.0, 0.1, 0.01),
    (0.5, 2.0, 1.5, 0.1, 0.01),
])
def test_criterion_7_kpp_oracle(alpha, eta, c, delta, epsilon, acceptance_report):
    p = ModelParams(alpha, eta, delta, epsilon, c)
    res = run_case(p)
    assert res.status == "ok", res.message
    kpp = kpp_front_solve(p)
    rep = compare_counts(res.system, kpp, res.sigma, res.radius)
    ok = rep.equal and rep.winding_full == 0
    acceptance_report(7, ok, f"(alpha, eta, c)=({alpha}, {eta}, {c}): full winding "
                             f"{rep.winding_full}, reduced winding {rep.winding_kpp}, "
                             f"radius {res.radius:.4g}")
    assert ok


def test_criterion_8_translation_mode(front1, front_zero, ess_front, acceptance_report):
    tol = 1e-8
    res = [translation_residual(p) for p in (front1, front_zero, ess_front)]
    ok = max(res) <= 10 * tol
    acceptance_report(8, ok, "translation residuals " + ", ".join(f"{r:.2e}" for r in res)
                      + f" (limit {10 * tol:.0e})")
    assert ok


def _property_checks(front1, kpp_front, rng):
    out = {}
    worst = 0.0
    for _ in range(100):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        lam = np.linalg.eigvals(a)
        sums = np.array([lam[i] + lam[j] for i, j in itertools.combinations(range(4), 2)])
        ev = np.linalg.eigvals(wedge2(a))
        worst = max(worst, float(np.max(np.min(np.abs(ev[:, None] - sums[None, :]), axis=1))))
    out["wedge2 sum law"] = (worst, 1e-8)

    sigma = weight_interval(front1.params).midpoint
    system = build_system(front1, sigma)
    lams = rng.uniform(0.1, 3.0, 10) + 1j * rng.uniform(-3.0, 3.0, 10)
    vals = evans_eval(system, lams)
    conj = evans_eval(system, np.conj(lams))
    real = evans_eval(system, np.array([0.5, 2.0]))
    out["Evans conjugate symmetry"] = (float(np.max(_rel(conj, np.conj(vals)))), 1e-10)
    out["Evans real on real"] = (float(np.max(np.abs(real.imag) / np.abs(real))), 1e-10)
    shifted = [evans_eval(system, lams[:5], zeta0=z) for z in (-2.0, 2.0)]
    out["matching point"] = (float(max(np.max(_rel(s, vals[:5])) for s in shifted)), 1e-6)
    wide = build_system(solve_front(front1.params, L=2 * front1.L, n_nodes=4001), sigma)
    out["L doubling"] = (float(np.max(_rel(evans_eval(wide, lams[:5]), vals[:5]))), 1e-6)
    polar = evans_eval(system, lams, method="polar")
    out["compound vs polar"] = (float(np.max(_rel(polar, vals))), 1e-6)

    h = 1e-6
    worst = 0.0
    for _ in range(100):
        p = ModelParams(rng.uniform(0.05, 0.95), rng.uniform(0.5, 4), 0.1, 0.01, 1.0)
        u, w = rng.uniform(1e-3, 1.0), rng.uniform(0.0, 1.5)
        fu, fw, gu, gw = jacobian(u, w, p)
        du = (np.array(reaction(u + h, w, p)) - np.array(reaction(u - h, w, p))) / (2 * h)
        dw = (np.array(reaction(u, w + h, p)) - np.array(reaction(u, w - h, p))) / (2 * h)
        worst = max(worst, float(np.max(np.abs([fu - du[0], gu - du[1], fw - dw[0], gw - dw[1]]))))
    out["jacobian vs finite differences"] = (worst, 1e-6)

    idx = np.linspace(1, kpp_front.zeta.size - 2, 100).astype(int)
    w = kpp_front.w[idx]
    lo = np.clip(w - h, 0.0, None)
    fd = (kpp_reaction(w + h, kpp_front.params) - kpp_reaction(lo, kpp_front.params)) / (w + h - lo)
    out["kpp potential vs finite differences"] = (
        float(np.max(np.abs(kpp_potential(kpp_front)[idx] - fd))), 1e-6)

    k = np.linspace(-20, 20, 401)
    wsig = weight_interval(REF).midpoint
    curves = [*ess_curves_plus(REF, k), *weighted_curves_plus(REF, wsig, k),
              *kpp_ess_curves(REF, k), *ess_curves_minus(REF)]
    out["curve residual"] = (max(curve_residual(cv, REF) for cv in curves), 1e-9)
    return out


@pytest.mark.slow
def test_criterion_9_property_suites(front1, kpp_front, acceptance_report):
    checks = _property_checks(front1, kpp_front, np.random.default_rng(2024))
    failed = [name for name, (val, lim) in checks.items() if not val <= lim]
    for name, (val, lim) in checks.items():
        print(f"  {name}: {val:.2e} (limit {lim:.0e})")
    ok = not failed
    acceptance_report(9, ok, f"{len(checks) - len(failed)}/{len(checks)} property checks within "
                             "tolerance" + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok


def test_criterion_10_excluded(acceptance_report):
    acceptance_report(10, None, "excluded; analytic stability claims are out of scope and "
                                "covered only through criteria 5 to 8")
    pytest.skip("criterion 10 is excluded from desk-scale reproduction")
