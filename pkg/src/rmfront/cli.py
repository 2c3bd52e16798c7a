"""Command-line front end: ``rmfront <command> [options]``.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure (front, winding).
"""

import argparse
import csv
import dataclasses
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .errors import (
    ContinuationFailure,
    DomainError,
    FrontQualityError,
    IntegrationFailure,
    InvalidInput,
    NonComparable,
    RMFrontError,
    SplittingDegenerate,
    UnresolvedWinding,
)
from .model import ModelParams, validate

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

log = logging.getLogger("rmfront")

PARAM_NAMES = ("alpha", "eta", "delta", "epsilon", "c")
SWEEP_COLUMNS = ("alpha", "eta", "delta", "epsilon", "c", "sigma", "bound", "radius",
                 "winding", "status", "seconds")
# sweep order: outermost first
SWEEP_ORDER = ("eta", "alpha", "c", "delta", "epsilon")
DEFAULT_RANGES = {"eta": (2.0, 3.0, 10), "alpha": (0.1, 0.8, 8), "c": (1.0, 2.0, 11)}


class ConfigError(RMFrontError, ValueError):
    """Bad configuration file or command-line value."""


@dataclasses.dataclass
class RunConfig:
    alpha: float = 0.5
    eta: float = 2.0
    delta: float = 0.1
    epsilon: float = 0.05
    c: float = 1.5
    sigma: object = "auto"
    L: object = "auto"
    nodes: int = 2001
    tol: float = 1e-8
    n_min: int = 64
    radius_scale: float = 1.0
    method: str = "compound"
    out: str = "."
    seed: int = 0
    jobs: int = 1
    sampling: str = "grid"
    samples: int = 0
    timing: bool = True
    ranges: dict = dataclasses.field(default_factory=dict)

    def params(self):
        return ModelParams(self.alpha, self.eta, self.delta, self.epsilon, self.c)

    def length(self):
        return None if self.L == "auto" else float(self.L)

    def sweep_ranges(self):
        out = dict(DEFAULT_RANGES)
        out.update(self.ranges)
        return out

    def check(self):
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.nodes < 200:
            raise ConfigError(f"nodes must be at least 200, got {self.nodes}")
        if self.n_min < 8:
            raise ConfigError(f"n_min must be at least 8, got {self.n_min}")
        if not self.radius_scale > 0:
            raise ConfigError("radius_scale must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.method not in ("compound", "polar"):
            raise ConfigError(f"method must be compound or polar, got {self.method!r}")
        if self.sampling not in ("grid", "lhs"):
            raise ConfigError(f"sampling must be grid or lhs, got {self.sampling!r}")
        if self.L != "auto" and not float(self.L) > 0:
            raise ConfigError("L must be positive or auto")
        if isinstance(self.sigma, str) and self.sigma not in ("auto", "sattinger"):
            raise ConfigError(f"sigma must be auto, sattinger or a number, got {self.sigma!r}")
        for name, (lo, hi, count) in self.ranges.items():
            if name not in PARAM_NAMES:
                raise ConfigError(f"unknown sweep parameter {name!r}")
            if int(count) < 1:
                raise ConfigError(f"sweep count for {name} must be at least 1, got {count}")
            if hi < lo:
                raise ConfigError(f"sweep range for {name} is reversed: ({lo}, {hi})")
        return self


# ---------------------------------------------------------------------------
# configuration


def _coerce_sigma(value):
    if isinstance(value, str):
        key = value.strip().lower()
        if key in ("auto", "sattinger"):
            return key
        try:
            return float(key)
        except ValueError as exc:
            raise ConfigError(f"sigma must be auto, sattinger or a number, got {value!r}") from exc
    return float(value)


def _coerce_range(name, value):
    try:
        lo, hi, count = value
        return float(lo), float(hi), int(count)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}_range must be [lo, hi, count], got {value!r}") from exc


def _apply(cfg, key, value):
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    if key.endswith("_range"):
        name = key[: -len("_range")]
        cfg.ranges[name] = _coerce_range(name, value)
        return
    if key == "epsilon_zero":
        if value:
            cfg.epsilon = 0.0
        return
    if key not in fields or key == "ranges":
        raise ConfigError(f"unknown configuration key {key!r}")
    try:
        if key == "sigma":
            value = _coerce_sigma(value)
        elif key == "L":
            value = "auto" if str(value).lower() == "auto" else float(value)
        elif key in ("alpha", "eta", "delta", "epsilon", "c", "tol", "radius_scale"):
            value = float(value)
        elif key in ("nodes", "n_min", "seed", "jobs", "samples"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            value = int(value)
        elif key == "timing":
            value = bool(value)
        else:
            value = str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    setattr(cfg, key, value)


def load_config(path):
    """Read a flat TOML key/value file into a :class:`RunConfig`."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    cfg = RunConfig()
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; found table [{key}]")
        _apply(cfg, key, value)
    return cfg


def build_config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    for key in ("alpha", "eta", "delta", "epsilon", "c", "sigma", "L", "nodes", "tol",
                "n_min", "radius_scale", "method", "out", "seed", "jobs", "sampling",
                "samples"):
        value = getattr(args, key, None)
        if value is not None:
            _apply(cfg, key, value)
    for name in PARAM_NAMES:
        value = getattr(args, f"{name}_range", None)
        if value is not None:
            _apply(cfg, f"{name}_range", value)
    if getattr(args, "epsilon_zero", False):
        cfg.epsilon = 0.0
    if getattr(args, "no_timing", False):
        cfg.timing = False
    return cfg.check()


# ---------------------------------------------------------------------------
# output helpers


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars plain."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(data), fh, sort_keys=True, indent=2)
        fh.write("\n")
    log.info("wrote %s", path)


def _out(cfg, name):
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _require_valid(params, names=("speed", "regime")):
    rep = validate(params)
    bad = [n for n in rep.failed() if n in names]
    if bad:
        raise InvalidInput("model.validate: " + "; ".join(rep[n].detail for n in bad))
    return rep


# ---------------------------------------------------------------------------
# commands


def cmd_front(cfg):
    from .front import check_front_bounds, solve_front, translation_residual

    p = cfg.params()
    rep = _require_valid(p)
    prof = solve_front(p, L=cfg.length(), n_nodes=cfg.nodes, tol=cfg.tol)
    prof.save(_out(cfg, "front.dat"))
    summary = {
        "params": p.to_dict(),
        "regime": prof.regime,
        "L": prof.L,
        "nodes": int(prof.zeta.size),
        "residual": prof.residual,
        "translation_residual": translation_residual(prof),
        "validity": {c.name: c.passed for c in rep.checks},
        "bounds": check_front_bounds(prof).to_dict(),
        **prof.meta,
    }
    _write_json(_out(cfg, "front.json"), summary)
    print(f"front: regime {prof.regime}, residual {prof.residual:.3g}, "
          f"decay {prof.meta['decay_measured']:.6g} (expected {prof.meta['decay_rate_plus']:.6g})")
    return 0


def cmd_spectrum(cfg):
    from .spectrum import (
        disc_roots,
        ess_curves_minus,
        ess_curves_plus,
        export_curves,
        kpp_ess_curves,
        resolve_sigma,
        spectrum_summary,
        weighted_curves_plus,
    )

    p = cfg.params()
    _require_valid(p)
    summary = spectrum_summary(p)
    sigma = resolve_sigma(p, cfg.sigma)
    k_grid = np.linspace(-20.0, 20.0, 801)
    curves = [*ess_curves_plus(p, k_grid), *weighted_curves_plus(p, sigma, k_grid),
              *kpp_ess_curves(p, k_grid), *ess_curves_minus(p)]
    export_curves(curves, _out(cfg, "spectrum_curves.dat"))
    summary["sigma"] = sigma
    summary["branches"] = sorted({cv.label for cv in curves})
    if not summary["kzero"]:
        summary["absent_branches"] = "small-k minus branches (k^2 < 0 on the minus side)"
    _write_json(_out(cfg, "spectrum.json"), summary)
    if summary["k1"] is not None:
        k1, k2 = disc_roots(p)
        print(f"spectrum: k1={k1:.6g} k2={k2:.6g} gap={summary['gap']:.6g}")
    else:
        print("spectrum: small-k minus branches absent; no closed-form gap")
    wi = summary["weight_interval"]
    if wi is not None:
        print(f"weight interval: ({wi['sigma_lo']:.6g}, {wi['sigma_hi']:.6g}), sigma={sigma:.6g}")
    return 0


def cmd_bounds(cfg):
    from .pipeline import system_bound
    from .front import solve_front, sup_norms

    p = cfg.params()
    _require_valid(p)
    prof = solve_front(p, L=cfg.length(), n_nodes=cfg.nodes, tol=cfg.tol)
    rep = system_bound(prof)
    data = {"params": p.to_dict(), "sup_norms": sup_norms(prof).to_dict(), **rep.to_dict()}
    _write_json(_out(cfg, "bounds.json"), data)
    print(f"bounds: {rep.regime} bound {rep.bound:.6g}, contour radius {rep.contour_radius:.6g}")
    return 0


def cmd_evans(cfg):
    from .evans import build_contour, export_trace, winding
    from .pipeline import prepare_case

    p = cfg.params()
    _require_valid(p)
    prof, system, rep = prepare_case(p, cfg.sigma, L=cfg.length(), nodes=cfg.nodes, tol=cfg.tol)
    radius = rep.contour_radius * cfg.radius_scale
    contour = build_contour(radius, cfg.n_min)
    with open(_out(cfg, "contour.dat"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"columns": ["re_lambda", "im_lambda"], "radius": radius}) + "\n")
        for lam in contour.points:
            fh.write(f"{lam.real:.17g} {lam.imag:.17g}\n")
    result = winding(system, contour, tol=cfg.tol, method=cfg.method)
    export_trace(result, _out(cfg, "evans_trace.dat"))
    data = {"params": p.to_dict(), "bound": rep.to_dict(), "evans": result.to_dict(),
            "winding": result.winding}
    _write_json(_out(cfg, "evans.json"), data)
    print(f"evans: winding {result.winding} on |lambda| = {radius:.6g} "
          f"(sigma {system.sigma:.6g}, {result.evaluations} evaluations)")
    return 0


def sweep_cases(cfg):
    """Parameter tuples for the sweep, in output order."""
    ranges = cfg.sweep_ranges()
    base = {n: getattr(cfg, n) for n in PARAM_NAMES}
    swept = [n for n in SWEEP_ORDER if n in ranges]
    if cfg.sampling == "grid":
        axes = []
        for n in swept:
            lo, hi, count = ranges[n]
            axes.append(np.linspace(lo, hi, count) if count > 1 else np.array([lo]))
        combos = itertools.product(*axes)
    else:
        from scipy.stats import qmc

        n_samples = cfg.samples or int(np.prod([ranges[n][2] for n in swept]))
        unit = qmc.LatinHypercube(d=len(swept), seed=cfg.seed).random(n_samples)
        lo = np.array([ranges[n][0] for n in swept])
        hi = np.array([ranges[n][1] for n in swept])
        combos = lo + unit * (hi - lo)
    cases = []
    for combo in combos:
        vals = dict(base)
        vals.update({n: float(round(v, 12)) for n, v in zip(swept, combo)})
        cases.append(tuple(vals[n] for n in PARAM_NAMES))
    return cases


def _sweep_worker(job):
    from .pipeline import run_case

    values, sigma, n_min, tol, nodes, L, radius_scale, method = job
    params = ModelParams(*values)
    res = run_case(params, sigma, radius_scale=radius_scale, n_min=n_min, tol=tol, L=L,
                   nodes=nodes, method=method)
    # drop heavy fields before returning across processes
    res.profile = res.system = res.evans = None
    return res


def cmd_sweep(cfg):
    cases = sweep_cases(cfg)
    jobs = [(vals, cfg.sigma, cfg.n_min, cfg.tol, cfg.nodes, cfg.length(), cfg.radius_scale,
             cfg.method) for vals in cases]
    log.info("sweep: %d cases, %d workers", len(jobs), cfg.jobs)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_worker, jobs))  # map keeps case order
    else:
        results = []
        for k, job in enumerate(jobs):
            results.append(_sweep_worker(job))
            r = results[-1]
            log.info("case %d/%d: %s winding=%s", k + 1, len(jobs), r.status, r.winding)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in results:
        writer.writerow(r.row(timing=cfg.timing))
    with open(_out(cfg, "sweep.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    by_status = {s: 0 for s in ("ok", "splitting-degenerate", "unresolved-winding",
                                "front-failure")}
    by_winding = {}
    for r in results:
        by_status[r.status] += 1
        if r.winding is not None:
            by_winding[str(r.winding)] = by_winding.get(str(r.winding), 0) + 1
    summary = {
        "cases": len(results),
        "sampling": cfg.sampling,
        "seed": cfg.seed,
        "by_status": by_status,
        "by_winding": by_winding,
        "failures": [{"params": dict(zip(PARAM_NAMES, c)), "status": r.status,
                      "message": r.message}
                     for c, r in zip(cases, results) if r.status != "ok"],
    }
    if cfg.timing:
        summary["seconds_total"] = sum(r.seconds for r in results)
        summary["seconds_max"] = max((r.seconds for r in results), default=0.0)
    _write_json(_out(cfg, "sweep.json"), summary)
    print(f"sweep: {len(results)} cases; status {by_status}; winding {by_winding}")
    return 0


def cmd_kpp_compare(cfg):
    from .kpp import compare_counts, kpp_front_solve
    from .pipeline import prepare_case

    p = cfg.params()
    _require_valid(p)
    if p.epsilon > 0 and p.epsilon > p.delta:
        raise InvalidInput("kpp-compare: needs epsilon <= delta")
    _, system, rep = prepare_case(p, cfg.sigma, L=cfg.length(), nodes=cfg.nodes, tol=cfg.tol)
    kprof = kpp_front_solve(p, L=cfg.length(), n_nodes=cfg.nodes, tol=cfg.tol)
    radius = rep.contour_radius * cfg.radius_scale
    cmp = compare_counts(system, kprof, system.sigma, radius, n_min=cfg.n_min, tol=cfg.tol)
    data = {"params": p.to_dict(), **cmp.to_dict()}
    _write_json(_out(cfg, "kpp_compare.json"), data)
    print(f"kpp-compare: full {cmp.winding_full}, reduced {cmp.winding_kpp}, "
          f"{'equal' if cmp.equal else 'DIFFERENT'} (radius {radius:.6g})")
    return 0


def selftest_checks():
    """Fast closed-form checks; each entry is (name, ok, detail)."""
    from .evans import asymptotic_matrix
    from .spectrum import disc_roots, spectral_gap, weight_interval

    p = ModelParams(0.75, 3.0, 0.1, 0.01, 1.0)
    out = []
    k1, k2 = disc_roots(p)
    out.append(("disc_roots", abs(k1 - 2.2506) <= 5e-4 and abs(k2 - 2.8146) <= 5e-4,
                f"({k1:.6f}, {k2:.6f})"))
    k1z, k2z = disc_roots(p.with_(epsilon=0.0))
    out.append(("disc_roots eps=0", abs(k1z - 2.2393) <= 5e-4 and abs(k2z - 2.8005) <= 5e-4,
                f"({k1z:.6f}, {k2z:.6f})"))
    gap = spectral_gap(p)
    out.append(("spectral_gap", abs(abs(gap) - 0.0787) <= 5e-4, f"{gap:.6f}"))
    wi = weight_interval(p)
    out.append(("weight_interval", abs(wi.sigma_lo - 0.067) <= 5e-3
                and abs(wi.sigma_hi - 0.93) <= 5e-3, f"({wi.sigma_lo:.6f}, {wi.sigma_hi:.6f})"))

    mu = np.sort(np.linalg.eigvals(asymptotic_matrix(p, -1, 3.0)).real)[::-1]
    ref = np.array([8.670594954, 1.319833682, -2.314599976, -108.6758287])
    out.append(("asymptotic eigenvalues", bool(np.all(np.abs(mu / ref - 1) <= 1e-6)),
                " ".join(f"{m:.9g}" for m in mu)))
    return out


def cmd_selftest(cfg):
    checks = selftest_checks()
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    _write_json(_out(cfg, "selftest.json"),
                {name: {"ok": ok, "detail": detail} for name, ok, detail in checks})
    return 0 if all(ok for _, ok, _ in checks) else 3


COMMANDS = {
    "front": cmd_front,
    "spectrum": cmd_spectrum,
    "bounds": cmd_bounds,
    "evans": cmd_evans,
    "sweep": cmd_sweep,
    "kpp-compare": cmd_kpp_compare,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# argument parsing


def _sigma_arg(text):
    try:
        return _coerce_sigma(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat TOML configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (default .)")
    common.add_argument("--jobs", type=int, metavar="N", help="worker processes for sweeps")
    common.add_argument("--sigma", type=_sigma_arg, metavar="{auto|sattinger|REAL}",
                        help="exponential weight rate")
    common.add_argument("--epsilon-zero", action="store_true", help="solve the epsilon = 0 system")
    for name in PARAM_NAMES:
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--L", type=str, metavar="{auto|REAL}", help="half-length of the domain")
    common.add_argument("--nodes", type=int, help="collocation nodes")
    common.add_argument("--tol", type=float, help="solver tolerance")
    common.add_argument("--n-min", dest="n_min", type=int, help="minimum contour samples")
    common.add_argument("--radius-scale", dest="radius_scale", type=float,
                        help="multiply the contour radius")
    common.add_argument("--method", choices=("compound", "polar"))
    common.add_argument("--seed", type=int)
    common.add_argument("--sampling", choices=("grid", "lhs"))
    common.add_argument("--samples", type=int, help="Latin-hypercube sample count")
    for name in PARAM_NAMES:
        common.add_argument(f"--{name}-range", dest=f"{name}_range", nargs=3, type=float,
                            metavar=("LO", "HI", "COUNT"))
    common.add_argument("--no-timing", action="store_true",
                        help="omit wall times so sweep output is byte-reproducible")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="rmfront", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rmfront {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "front": "solve the traveling front",
        "spectrum": "essential-spectrum curves, gap and weight interval",
        "bounds": "eigenvalue bound and contour radius",
        "evans": "Evans-function winding number",
        "sweep": "winding numbers over a parameter grid",
        "kpp-compare": "compare full and reduced winding numbers",
        "selftest": "closed-form sanity checks",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def _exit_code(exc):
    if isinstance(exc, (ConfigError, InvalidInput, NonComparable)):
        return 2
    if isinstance(exc, (ContinuationFailure, FrontQualityError, IntegrationFailure,
                        SplittingDegenerate, UnresolvedWinding)):
        return 3
    if isinstance(exc, DomainError):
        return 2
    return 3


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except RMFrontError as exc:
        code = _exit_code(exc)
        print(f"rmfront {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except ValueError as exc:
        print(f"rmfront {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
