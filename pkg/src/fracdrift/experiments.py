"""Scenario-driven experiment suites with JSON configs and CSV outputs.

Every randomized run records its seed; identical config + seed reproduces
byte-identical CSVs.  Summaries are JSON with a schema_version field.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dnmap import (
    alessandrini_residual,
    coefficient_hash,
    dn_matrix,
    dn_to_csv,
    operator_norm_star,
)
from .domain import (
    GridSpec,
    ScalarField,
    VectorField,
    build_layout,
    bump_field,
    field_to_csv_rows,
    polynomial_field,
    region_from_dict,
)
from .errors import ConfigError, EigenvalueConditionViolated, FracdriftError
from .fraclap import (
    assemble_fraclap,
    build_sobolev_metric,
    getoor_constant,
    getoor_profile,
    poincare_ratio,
    sobolev_norm,
    spectral_oracle_apply,
)
from .reconstruct import (
    basis_controls,
    generate_measurements,
    perturb_measurements,
    recover_interior_field,
    recover_pointwise,
)
from .runge import alpha_sweep, assemble_runge, svd_triple
from .solver import Coefficients, check_eigenvalue_condition, solve_forward

__all__ = [
    "Scenario",
    "StabilityCurve",
    "run_scenario",
    "stability_sweep",
    "genericity_trial_suite",
    "selftest_checks",
    "builtin_scenarios",
    "layout_from_config",
    "coefficients_from_config",
]

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = (
    "selftest",
    "forward",
    "dnmap",
    "runge",
    "reconstruct",
    "stability",
    "genericity",
)


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    config: dict


@dataclass(frozen=True)
class StabilityCurve:
    """Rows (delta, ||dLambda||_*, ||db||_{H^-s}, ||dc||_{H^-s})."""

    deltas: np.ndarray
    dn_norms: np.ndarray
    b_norms: np.ndarray
    c_norms: np.ndarray

    def __post_init__(self):
        if not np.all(np.diff(self.deltas) > 0):
            raise ValueError("sweep deltas must be strictly increasing")
        for name in ("dn_norms", "b_norms", "c_norms"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be nonnegative")

    def rows(self):
        return np.column_stack([self.deltas, self.dn_norms, self.b_norms, self.c_norms])


# -- config parsing -------------------------------------------------------------


def _require(cfg, key, path, types=None):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}", "missing required field")
    val = cfg[key]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"{path}.{key}", f"expected {types}, got {type(val).__name__}")
    return val


def layout_from_config(cfg, path="config"):
    gcfg = _require(cfg, "grid", path, dict)
    dim = int(_require(gcfg, "dim", f"{path}.grid", int))
    h = float(_require(gcfg, "h", f"{path}.grid", (int, float)))
    try:
        grid = GridSpec(dim=dim, box_lo=gcfg["box_lo"], box_hi=gcfg["box_hi"], h=h)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}.grid", str(exc)) from exc
    rcfg = _require(cfg, "regions", path, dict)
    try:
        omega = region_from_dict(_require(rcfg, "omega", f"{path}.regions", dict), dim)
        w1 = region_from_dict(_require(rcfg, "w1", f"{path}.regions", dict), dim)
        w2 = region_from_dict(rcfg["w2"], dim) if "w2" in rcfg else None
        core = region_from_dict(rcfg["core"], dim) if "core" in rcfg else None
        return build_layout(grid, omega, w1, w2, core,
                            separation_min=rcfg.get("separation_min"))
    except ConfigError:
        raise
    except (ValueError, FracdriftError) as exc:
        raise ConfigError(f"{path}.regions", str(exc)) from exc


def _scalar_from_primitives(layout, prims, path):
    vals = np.zeros(layout.n_nodes)
    for i, prim in enumerate(prims):
        kind = _require(prim, "kind", f"{path}[{i}]", str)
        if kind == "bump":
            f = bump_field(layout, prim["center"], prim["radius"],
                           prim.get("amplitude", 1.0))
            vals += f.values
        elif kind == "poly_bump":
            f = bump_field(layout, prim["center"], prim["radius"],
                           prim.get("amplitude", 1.0))
            mono = polynomial_field(layout, prim["beta"], region="box")
            vals += f.values * mono.values
        elif kind == "const":
            region = prim.get("region", "omega")
            idx = getattr(layout, region)
            vals[idx] += float(prim["value"])
        else:
            raise ConfigError(f"{path}[{i}].kind", f"unknown primitive {kind!r}")
    return ScalarField(layout, vals)


def coefficients_from_config(layout, cfg, path="config.coefficients"):
    cfg = cfg or {}
    dim = layout.grid.dim
    b_vals = np.zeros((layout.n_nodes, dim))
    for i, prim in enumerate(cfg.get("b", [])):
        comp = int(prim.get("component", 0))
        if not 0 <= comp < dim:
            raise ConfigError(f"{path}.b[{i}].component", "component out of range")
        f = _scalar_from_primitives(layout, [prim], f"{path}.b")
        b_vals[:, comp] += f.values
    c = _scalar_from_primitives(layout, cfg.get("c", []), f"{path}.c")
    try:
        return Coefficients(VectorField(layout, b_vals), c)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


# -- output helpers -------------------------------------------------------------


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.17g}" for v in row) + "\n")


def _write_summary(out_dir, payload):
    out = dict(payload)
    out["schema_version"] = SCHEMA_VERSION
    out["versions"] = {
        "fracdrift": __version__,
        "numpy": np.__version__,
    }
    path = Path(out_dir) / "summary.json"
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True, default=float)
    return path


# -- suites ----------------------------------------------------------------------


def selftest_checks(s=0.75, h=1 / 128, seed=0):
    """Getoor, duality, Alessandrini and Poincare suites; returns check list."""
    rng = np.random.default_rng(seed)
    checks = []

    grid = GridSpec(1, (-4.0,), (4.0,), h)
    from .domain import Interval

    layout = build_layout(grid, Interval(-1.0, 1.0), Interval(2.0, 3.0),
                          core=Interval(-0.75, 0.75))
    op = assemble_fraclap(layout, s)

    target = getoor_constant(1, s)
    u = getoor_profile(layout, s)
    lu = op.apply(u)
    inner = np.abs(layout.coords()[:, 0]) <= 0.5
    getoor_err = float(np.max(np.abs(lu.values[inner] - target)) / target)
    checks.append({"name": "getoor_identity", "value": getoor_err,
                   "tol": 0.02, "passed": getoor_err <= 0.02})

    worst = 0.0
    omega_mask = layout.mask("omega")
    for _ in range(3):
        f = bump_field(layout, rng.uniform(-0.3, 0.3), rng.uniform(0.5, 0.9),
                       rng.uniform(0.5, 2.0))
        qv = op.apply(f).values
        sv = spectral_oracle_apply(layout, s, f).values
        worst = max(worst, float(np.linalg.norm((qv - sv)[omega_mask])
                                 / np.linalg.norm(sv[omega_mask])))
    checks.append({"name": "spectral_cross_validation", "value": worst,
                   "tol": 0.01, "passed": worst <= 0.01})

    def random_coeffs():
        amp_b = rng.uniform(0.1, 0.4)
        amp_c = rng.uniform(0.1, 0.6)
        b = bump_field(layout, rng.uniform(-0.2, 0.2), 0.5, amp_b, region="core_k")
        c = bump_field(layout, rng.uniform(-0.2, 0.2), 0.5, amp_c, region="core_k")
        return Coefficients(VectorField.from_components([b]), c)

    co1, co2 = random_coeffs(), random_coeffs()
    f1 = bump_field(layout, 2.5, 0.4, 1.0, region="w1")
    f2 = bump_field(layout, 2.4, 0.3, 1.0, region="w2")
    res = alessandrini_residual(op, co1, co2, f1, f2)
    checks.append({"name": "alessandrini_identity", "value": res,
                   "tol": 1e-10, "passed": res <= 1e-10})

    dnm = dn_matrix(op, co1)
    dual = float(np.max(np.abs(dnm.map - dnm.adjoint_map.T))
                 / max(np.max(np.abs(dnm.map)), 1e-300))
    checks.append({"name": "dn_duality", "value": dual,
                   "tol": 1e-10, "passed": dual <= 1e-10})

    ratios = []
    for _ in range(5):
        v = bump_field(layout, rng.uniform(-0.3, 0.3), rng.uniform(0.3, 0.6),
                       rng.uniform(0.5, 2.0), region="omega")
        ratios.append(poincare_ratio(layout, s, v, op))
    diam = 2.0
    bound = max(ratios) / diam**s
    finite = all(np.isfinite(r) and r > 0 for r in ratios)
    checks.append({"name": "poincare_ratio", "value": float(max(ratios)),
                   "tol": None, "passed": bool(finite)})
    checks.append({"name": "poincare_constant", "value": float(bound),
                   "tol": None, "passed": bool(np.isfinite(bound))})
    return checks


def stability_sweep(op, base_coeffs, direction, deltas, layout=None,
                    threads=1):
    """DN-gap and coefficient-gap norms along a coefficient ray.

    direction is a (VectorField, ScalarField) pair; every perturbed
    coefficient pair must pass the eigenvalue check (the offending delta is
    reported otherwise).
    """
    layout = layout or op.layout
    beta, gamma_ = direction
    s = op.s
    metric_w1 = build_sobolev_metric(layout, s, "w1")
    metric_w2 = build_sobolev_metric(layout, s, "w2")
    metric_neg = build_sobolev_metric(layout, -s, "omega")

    base_dn = dn_matrix(op, base_coeffs, layout, threads=threads)
    dn_norms, b_norms, c_norms = [], [], []
    for d in deltas:
        coeffs_d = Coefficients(
            base_coeffs.b.add(beta.scale(d)), base_coeffs.c.add(gamma_.scale(d))
        )
        report = check_eigenvalue_condition(op, coeffs_d)
        if not report.ok:
            raise EigenvalueConditionViolated(
                report.smallest_singular_value, report.threshold,
                f"eigenvalue condition fails at delta={d}",
            )
        dn_d = dn_matrix(op, coeffs_d, layout, threads=threads)
        dn_norms.append(operator_norm_star(dn_d.map - base_dn.map,
                                           metric_w1, metric_w2))
        db = beta.scale(d)
        dc = gamma_.scale(d)
        b_norms.append(float(np.sqrt(sum(
            sobolev_norm(metric_neg, db.component(k)) ** 2
            for k in range(layout.grid.dim)))))
        c_norms.append(sobolev_norm(metric_neg, dc))
    return StabilityCurve(
        deltas=np.asarray(deltas, dtype=float),
        dn_norms=np.asarray(dn_norms),
        b_norms=np.asarray(b_norms),
        c_norms=np.asarray(c_norms),
    )


def _random_window_data(layout, rng, amplitude=1.0):
    """Random smooth exterior datum supported in W1 (two stacked bumps)."""
    pts = layout.coords()[layout.w1]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(np.min(hi - lo))
    vals = np.zeros(layout.n_nodes)
    for _ in range(2):
        center = rng.uniform(lo + 0.3 * span, hi - 0.3 * span)
        radius = rng.uniform(0.25, 0.45) * span
        amp = amplitude * rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        t2 = np.sum((layout.coords() - center) ** 2, axis=1) / radius**2
        inside = t2 < 1.0
        vals[inside] += amp * np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
    vals[np.setdiff1d(np.arange(layout.n_nodes), layout.w1)] = 0.0
    return ScalarField(layout, vals)


def genericity_trial_suite(op, coeffs, layout=None, trials=100, magnitude=0.01,
                           seed=0, tau_det=1e-3, eps=0.05, eps_basis=0.1,
                           threads=1):
    """Monte-Carlo repair of adversarial duplicated measurement tuples.

    Each trial starts from an (n+1)-tuple of identical random exterior data
    (determinant identically zero), applies the random polynomial
    perturbation, and records the excluded fraction before and after.
    """
    from .reconstruct import _measurements_from_data

    layout = layout or op.layout
    n = layout.grid.dim
    rop = assemble_runge(op, coeffs, layout, threads=threads)
    triple = svd_triple(rop)
    controls = basis_controls(op, coeffs, layout, eps=eps_basis, triple=triple)
    master = np.random.default_rng(seed)
    rows = []
    for t in range(trials):
        rng = np.random.default_rng(master.integers(0, 2**63 - 1))
        f = _random_window_data(layout, rng)
        data = tuple(f for _ in range(n + 1))
        mset = _measurements_from_data(op, coeffs, layout, data, tau_det)
        before = mset.report.excluded_fraction
        pert = perturb_measurements(mset, op, coeffs, layout, magnitude,
                                    rng=rng, controls=controls)
        after = pert.report.excluded_fraction
        rows.append((t, before, after))
    after_vals = np.array([r[2] for r in rows])
    summary = {
        "trials": trials,
        "magnitude": magnitude,
        "seed": seed,
        "tau_det": tau_det,
        "trials_below_5pct": int(np.count_nonzero(after_vals < 0.05)),
        "mean_excluded_after": float(after_vals.mean()),
        "max_excluded_after": float(after_vals.max()),
    }
    return summary, rows


def _spearman(x, y):
    rx = np.argsort(np.argsort(x)).astype(float)
    ry = np.argsort(np.argsort(y)).astype(float)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    return float(rx @ ry / denom) if denom > 0 else 0.0


# -- scenario runner --------------------------------------------------------------


def _run_selftest(cfg, layout_unused, out_dir, rng, params):
    checks = selftest_checks(
        s=params.get("s", cfg.get("s", 0.75)),
        h=params.get("h", 1 / 128),
        seed=cfg.get("seed", 0),
    )
    rows = [(i, 1.0 if c["passed"] else 0.0, c["value"]) for i, c in enumerate(checks)]
    _write_csv(Path(out_dir) / "selftest.csv", ["check", "passed", "value"], rows)
    ok = all(c["passed"] for c in checks)
    return {"checks": checks, "passed": ok}, ok


def _build_problem(cfg):
    layout = layout_from_config(cfg)
    s = float(_require(cfg, "s", "config", (int, float)))
    op = assemble_fraclap(layout, s)
    coeffs = coefficients_from_config(layout, cfg.get("coefficients"), "config.coefficients")
    return layout, op, coeffs


def _run_forward(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    data_cfg = params.get("exterior_data")
    if data_cfg:
        f = _scalar_from_primitives(layout, [data_cfg], "config.params.exterior_data")
        f = f.restrict(layout.w1)
    else:
        f = _random_window_data(layout, rng)
    sol = solve_forward(op, coeffs, f)
    _write_csv(Path(out_dir) / "solution.csv",
               [f"x{a}" for a in range(layout.grid.dim)] + ["u"],
               field_to_csv_rows(sol.u))
    return {
        "residual_norm": sol.residual_norm,
        "interior_condition": sol.interior_condition,
        "coefficient_hash": coefficient_hash(coeffs),
    }, True


def _run_dnmap(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    threads = int(params.get("threads", 1))
    dnm = dn_matrix(op, coeffs, layout, threads=threads)
    sidecar = dn_to_csv(dnm, Path(out_dir) / "dn_matrix.csv",
                        meta={"coefficient_hash": coefficient_hash(coeffs)})
    duality = float(np.max(np.abs(dnm.map - dnm.adjoint_map.T))
                    / max(np.max(np.abs(dnm.map)), 1e-300))
    return {"sidecar": sidecar, "duality_residual": duality}, duality <= 1e-8


def _run_runge(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    rop = assemble_runge(op, coeffs, layout,
                         target_order=float(params.get("target_order", 0.0)),
                         whitened=bool(params.get("whitened", True)),
                         threads=int(params.get("threads", 1)))
    triple = svd_triple(rop)
    tcfg = params.get("target", {"kind": "bump", "center": 0.0, "radius": 0.5})
    target = _scalar_from_primitives(layout, [tcfg], "config.params.target").restrict(layout.omega)
    n_alpha = int(params.get("n_alpha", 12))
    controls = alpha_sweep(triple, target, n_alpha=n_alpha)
    rows = [(c.alpha, c.achieved_error, c.control_norm) for c in controls]
    _write_csv(Path(out_dir) / "alpha_sweep.csv",
               ["alpha", "error", "control_norm"], rows)
    tnorm = rop.target_metric.norm(target.values[layout.omega])
    best_rel = min(c.achieved_error for c in controls) / max(tnorm, 1e-300)
    return {
        "n_alpha": n_alpha,
        "sigma_max": float(triple.sigma[0]),
        "sigma_min": float(triple.sigma[-1]),
        "best_relative_error": float(best_rel),
    }, True


def _run_reconstruct(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    eps = float(params.get("eps", 0.05))
    tau = float(params.get("tau_det", 1e-3))
    mode = params.get("mode", "oracle")
    threads = int(params.get("threads", 1))
    mset = generate_measurements(op, coeffs, layout, eps=eps, tau_det=tau,
                                 threads=threads)
    if params.get("perturb_magnitude"):
        mset = perturb_measurements(mset, op, coeffs, layout,
                                    float(params["perturb_magnitude"]), rng=rng)
    if mode == "data":
        ridge = float(params.get("ridge", 1e-6))
        sols = []
        for f in mset.exterior_data:
            dn_vals = op.apply(solve_forward(op, coeffs, f).u).values[layout.w2]
            sols.append(recover_interior_field(op, f, dn_vals, ridge))
        from .reconstruct import _finalize_measurements

        mset = _finalize_measurements(op, layout, mset.exterior_data,
                                      tuple(sols), tau)
    result = recover_pointwise(mset, op, truth=coeffs)
    core = layout.core_k
    pts = layout.coords()[core]
    adm = np.isin(core, result.solved).astype(float)
    rows = np.column_stack([
        pts,
        result.b_hat.values[core],
        result.c_hat.values[core][:, None],
        adm[:, None],
    ])
    header = ([f"x{a}" for a in range(layout.grid.dim)]
              + [f"b{k}" for k in range(layout.grid.dim)] + ["c", "admissible"])
    _write_csv(Path(out_dir) / "reconstruction.csv", header, rows)
    summary = {
        "mode": mode,
        "eps": eps,
        "tau_det": tau,
        "errors": result.errors,
        "excluded_fraction": mset.report.excluded_fraction,
        "coefficient_hash": coefficient_hash(coeffs),
    }
    ok = True
    if "max_rel_error" in params:
        tol = float(params["max_rel_error"])
        ok = (result.errors.get("b_rel", 0.0) <= tol
              and result.errors.get("c_rel", 0.0) <= tol)
    return summary, ok


def _run_stability(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    dcfg = _require(params, "direction", "config.params", dict)
    direction_c = coefficients_from_config(layout, dcfg, "config.params.direction")
    deltas = params.get("deltas")
    if deltas is None:
        deltas = np.geomspace(params.get("delta_min", 0.05),
                              params.get("delta_max", 0.4),
                              int(params.get("n_delta", 8)))
    curve = stability_sweep(op, coeffs, (direction_c.b, direction_c.c),
                            np.asarray(deltas, dtype=float), layout,
                            threads=int(params.get("threads", 1)))
    _write_csv(Path(out_dir) / "stability.csv",
               ["delta", "dn_star", "b_hneg", "c_hneg"], curve.rows())
    pos = curve.dn_norms > 0
    log_dn = np.log(curve.dn_norms[pos])
    summary = {
        "spearman_dn_vs_b": _spearman(log_dn, np.log(curve.b_norms[pos])),
        "spearman_dn_vs_c": _spearman(log_dn, np.log(curve.c_norms[pos])),
        "loglog_slope_b": float(np.polyfit(log_dn, np.log(curve.b_norms[pos]), 1)[0])
        if pos.sum() > 1 else float("nan"),
        "loglog_slope_c": float(np.polyfit(log_dn, np.log(curve.c_norms[pos]), 1)[0])
        if pos.sum() > 1 else float("nan"),
    }
    return summary, True


def _run_genericity(cfg, out_dir, rng, params):
    layout, op, coeffs = _build_problem(cfg)
    summary, rows = genericity_trial_suite(
        op, coeffs, layout,
        trials=int(params.get("trials", 100)),
        magnitude=float(params.get("magnitude", 0.01)),
        seed=int(cfg.get("seed", 0)),
        tau_det=float(params.get("tau_det", 1e-3)),
        eps_basis=float(params.get("eps_basis", 0.1)),
        threads=int(params.get("threads", 1)),
    )
    _write_csv(Path(out_dir) / "genericity.csv",
               ["trial", "excluded_before", "excluded_after"], rows)
    return summary, True


_RUNNERS = {
    "forward": _run_forward,
    "dnmap": _run_dnmap,
    "runge": _run_runge,
    "reconstruct": _run_reconstruct,
    "stability": _run_stability,
    "genericity": _run_genericity,
}


def run_scenario(config, out_dir=None, seed=None, threads=None):
    """Validate the config, run the experiment, write artifacts.

    Returns the summary dict (also written as summary.json).  Raises
    ConfigError for malformed configs; experiment-level failures are
    reported in the summary with ok=False.
    """
    if isinstance(config, (str, Path)):
        try:
            with open(config) as fh:
                config = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(str(config), "config file not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(str(config), f"malformed JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config", "top-level config must be an object")

    name = _require(config, "name", "config", str)
    kind = _require(config, "kind", "config", str)
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError("config.kind", f"unknown kind {kind!r}; "
                          f"expected one of {EXPERIMENT_KINDS}")
    config = dict(config)
    scenario = Scenario(name=name, kind=kind, config=config)
    if seed is not None:
        config["seed"] = int(seed)
    config.setdefault("seed", 0)
    params = dict(config.get("params") or {})
    if threads is not None:
        params["threads"] = int(threads)

    out_root = Path(out_dir or config.get("out_dir") or "out")
    run_dir = out_root / scenario.name
    run_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(config["seed"])
    t0 = time.perf_counter()
    payload = {
        "name": name,
        "kind": kind,
        "seed": config["seed"],
        "h": config.get("grid", {}).get("h"),
        "s": config.get("s"),
        "dim": config.get("grid", {}).get("dim"),
    }
    try:
        if kind == "selftest":
            result, ok = _run_selftest(config, None, run_dir, rng, params)
        else:
            result, ok = _RUNNERS[kind](config, run_dir, rng, params)
        payload.update(result)
        payload["ok"] = bool(ok)
    except ConfigError:
        raise
    except FracdriftError as exc:
        payload["ok"] = False
        payload["error"] = f"{type(exc).__name__}: {exc}"
    payload["timings"] = {"total_s": time.perf_counter() - t0}
    _write_summary(run_dir, payload)
    return payload


def builtin_scenarios():
    """Small ready-to-run configs, one per experiment kind."""
    grid_1d = {"dim": 1, "box_lo": [-4.0], "box_hi": [4.0], "h": 1 / 64}
    regions_1d = {
        "omega": {"kind": "interval", "lo": -1.0, "hi": 1.0},
        "w1": {"kind": "annulus", "center": [0.0], "inner": 1.5, "outer": 3.6},
        "core": {"kind": "interval", "lo": -0.4, "hi": 0.4},
    }
    coeffs_1d = {
        "b": [{"kind": "bump", "center": 0.0, "radius": 0.3, "amplitude": 0.3}],
        "c": [{"kind": "bump", "center": 0.05, "radius": 0.3, "amplitude": 0.5}],
    }
    base = {"grid": grid_1d, "regions": regions_1d, "s": 0.75, "seed": 0}
    scenarios = {
        "selftest-1d": {"name": "selftest-1d", "kind": "selftest", "seed": 0,
                        "params": {"h": 1 / 128}},
        "forward-1d": {**base, "name": "forward-1d", "kind": "forward",
                       "coefficients": coeffs_1d},
        "dnmap-1d": {**base, "name": "dnmap-1d", "kind": "dnmap",
                     "coefficients": coeffs_1d},
        "runge-1d": {**base, "name": "runge-1d", "kind": "runge",
                     "coefficients": {},
                     "params": {"target": {"kind": "bump", "center": 0.0,
                                           "radius": 0.5}, "n_alpha": 12}},
        "reconstruct-1d": {**base, "name": "reconstruct-1d", "kind": "reconstruct",
                           "coefficients": coeffs_1d,
                           "params": {"eps": 0.05, "tau_det": 1e-3}},
        "stability-1d": {**base, "name": "stability-1d", "kind": "stability",
                         "coefficients": {},
                         "params": {"direction": {
                             "b": [{"kind": "bump", "center": 0.0, "radius": 0.5,
                                    "amplitude": 0.3}],
                             "c": [{"kind": "bump", "center": 0.0, "radius": 0.5,
                                    "amplitude": 0.5}]},
                             "n_delta": 8}},
        "genericity-1d": {**base, "name": "genericity-1d", "kind": "genericity",
                          "coefficients": {},
                          "params": {"trials": 20, "magnitude": 0.01}},
    }
    return scenarios
