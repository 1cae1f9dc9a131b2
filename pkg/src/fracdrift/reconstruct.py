"""Finite-measurement recovery of the drift and potential.

Given n+1 exterior data whose solutions u_1..u_{n+1} make the determinant

    h(x) = det [ d1 u_l, ..., dn u_l, u_l ]_{l=1..n+1}

nonzero (up to a certified finite order of vanishing), the coefficients
solve the pointwise (n+1)x(n+1) linear system with right-hand side
-(-Delta)^s u_l.  Measurements approximating the coordinate tuple
(x_1, ..., x_n, 1) on the core make h close to 1; adversarial tuples are
repaired by small random polynomial perturbations of the exterior data,
the numerical rendering of the genericity argument.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .domain import ScalarField, VectorField
from .errors import EmptyAdmissibleSet
from .runge import (
    DEFAULT_ALPHA_POINTS,
    assemble_runge,
    control_for_target,
    cutoff_targets,
    svd_triple,
)
from .solver import gradient, solve_forward

__all__ = [
    "MeasurementSet",
    "VanishingOrderReport",
    "ReconstructionResult",
    "k_of_n",
    "n0_count",
    "multi_indices",
    "det_h",
    "vanishing_order_check",
    "generate_measurements",
    "perturb_measurements",
    "basis_controls",
    "recover_pointwise",
    "recover_interior_field",
    "DEFAULT_TAU_DET",
]

DEFAULT_TAU_DET = 1e-3


def k_of_n(n):
    """Smallest positive integer >= sqrt(n+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r = math.isqrt(n + 1)
    return r if r * r == n + 1 else r + 1


def n0_count(n):
    """Number of monomials of degree <= k(n) in n variables."""
    k = k_of_n(n)
    return math.comb(n + k, k)


def multi_indices(n, max_degree):
    """All multi-indices beta in N^n with |beta| <= max_degree."""
    out = [beta for beta in product(range(max_degree + 1), repeat=n)
           if sum(beta) <= max_degree]
    out.sort(key=lambda b: (sum(b), b))
    return out


def _solution_rows(layout, solutions):
    """Stacked (n_nodes, n+1, n+1) matrices with rows (grad u_l, u_l)."""
    dim = layout.grid.dim
    m = len(solutions)
    rows = np.zeros((layout.n_nodes, m, dim + 1))
    for l, u in enumerate(solutions):
        g = gradient(u, layout)
        rows[:, l, :dim] = g.values
        rows[:, l, dim] = u.values
    return rows


def det_h(solutions, node=None, layout=None):
    """Determinant field of the measurement tuple on Omega nodes.

    With `node` given, returns the scalar determinant at that flat index;
    otherwise a ScalarField vanishing outside Omega.
    """
    layout = layout or solutions[0].layout
    dim = layout.grid.dim
    if len(solutions) != dim + 1:
        raise ValueError(f"need {dim + 1} solutions in dimension {dim}")
    rows = _solution_rows(layout, solutions)
    if node is not None:
        return float(np.linalg.det(rows[int(node)]))
    vals = np.zeros(layout.n_nodes)
    omega = layout.omega
    vals[omega] = np.linalg.det(rows[omega])
    return ScalarField(layout, vals)


@dataclass(frozen=True)
class VanishingOrderReport:
    """Scale-balanced derivative maxima of h and the admissibility verdict."""

    nodes: np.ndarray  # core node indices
    scores: np.ndarray  # per-core-node max of |d^beta h| * h_grid^{|beta|}
    admissible: np.ndarray  # boolean per core node
    threshold: float
    tau_det: float
    max_order: int

    @property
    def excluded_fraction(self):
        return 1.0 - float(np.count_nonzero(self.admissible)) / self.admissible.size

    @property
    def admissible_nodes(self):
        return self.nodes[self.admissible]


def _axis_derivative(values, grid, axis):
    out = np.zeros_like(values)
    stride = grid.axis_stride(axis)
    flat = values
    n = flat.size
    idx = np.arange(n)
    ok = (idx - stride >= 0) & (idx + stride < n)
    out[ok] = (flat[idx[ok] + stride] - flat[idx[ok] - stride]) / (2 * grid.h)
    return out


def vanishing_order_check(h_field, n, tau_det=DEFAULT_TAU_DET, layout=None,
                          det_scale=None):
    """Certify that h vanishes at most to order k(n)-2 on the core.

    The per-node score is the maximum of |d^beta h| * h_grid^{|beta|} over
    |beta| <= k(n)-2 (scale-balanced so all orders carry the units of h);
    nodes score below tau_det times the median magnitude of h are excluded.
    det_scale (a Hadamard bound on |h| per core node) adds a rounding-error
    floor so that determinants that vanish only up to LU roundoff, such as
    duplicated measurement tuples, certify as excluded rather than passing
    on noise.
    """
    layout = layout or h_field.layout
    grid = layout.grid
    core = layout.core_k
    max_order = k_of_n(n) - 2
    levels = {(0,) * grid.dim: h_field.values}
    for order in range(1, max_order + 1):
        for beta in multi_indices(grid.dim, order):
            if sum(beta) != order or tuple(beta) in levels:
                continue
            ax = next(a for a in range(grid.dim) if beta[a] > 0)
            parent = tuple(b - (1 if a == ax else 0) for a, b in enumerate(beta))
            levels[tuple(beta)] = _axis_derivative(levels[parent], grid, ax)
    scores = np.zeros(core.size)
    for beta, vals in levels.items():
        scores = np.maximum(scores, np.abs(vals[core]) * grid.h ** sum(beta))
    median = float(np.median(np.abs(h_field.values[core])))
    threshold = tau_det * (median + np.finfo(float).tiny)
    if det_scale is not None:
        eps = np.finfo(float).eps
        threshold += (n + 2) * eps * float(np.median(det_scale))
    return VanishingOrderReport(
        nodes=core,
        scores=scores,
        admissible=scores >= threshold,
        threshold=threshold,
        tau_det=tau_det,
        max_order=max_order,
    )


@dataclass(frozen=True)
class MeasurementSet:
    """n+1 exterior data with their solutions and determinant certificate."""

    layout: object
    exterior_data: tuple
    solutions: tuple
    det_field: ScalarField
    rhs_fields: tuple
    report: VanishingOrderReport
    tau_det: float

    @property
    def n(self):
        return self.layout.grid.dim


def _measurements_from_data(op, coeffs, layout, data, tau_det):
    solutions = tuple(solve_forward(op, coeffs, f).u for f in data)
    return _finalize_measurements(op, layout, data, solutions, tau_det)


def _finalize_measurements(op, layout, data, solutions, tau_det):
    h = det_h(solutions, layout=layout)
    rhs = tuple(op.apply(u) for u in solutions)
    rows = _solution_rows(layout, solutions)[layout.core_k]
    det_scale = np.prod(np.linalg.norm(rows, axis=2), axis=1)
    report = vanishing_order_check(h, layout.grid.dim, tau_det, layout,
                                   det_scale=det_scale)
    return MeasurementSet(
        layout=layout,
        exterior_data=tuple(data),
        solutions=solutions,
        det_field=h,
        rhs_fields=rhs,
        report=report,
        tau_det=tau_det,
    )


def generate_measurements(op, coeffs, layout=None, eps=0.05,
                          tau_det=DEFAULT_TAU_DET, triple=None,
                          target_order=0.0, use_targets_directly=False,
                          n_alpha=DEFAULT_ALPHA_POINTS, threads=1):
    """Measurements whose solutions approximate (x_1..x_n, 1) on the core.

    Exterior data are Runge controls meeting the relative error eps; the
    returned solutions are recomputed forward solves of those controls.
    With use_targets_directly=True the cutoff targets themselves stand in
    for the solutions (a continuity oracle that skips the control step).
    """
    layout = layout or op.layout
    if use_targets_directly:
        targets = cutoff_targets(layout)
        data = tuple(ScalarField.zero(layout) for _ in targets)
        return _finalize_measurements(op, layout, data, tuple(targets), tau_det)
    if not (0.0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 0.5)")
    if triple is None:
        rop = assemble_runge(op, coeffs, layout, target_order=target_order,
                             threads=threads)
        triple = svd_triple(rop)
    targets = cutoff_targets(layout)
    controls = [control_for_target(triple, t, eps, n_alpha=n_alpha) for t in targets]
    data = tuple(c.f_alpha for c in controls)
    return _measurements_from_data(op, coeffs, layout, data, tau_det)


def basis_controls(op, coeffs, layout=None, eps=0.1, triple=None,
                   target_order=0.0, n_alpha=DEFAULT_ALPHA_POINTS, threads=1):
    """Runge controls for the cutoff monomials chi*x^beta, |beta| <= k(n)."""
    layout = layout or op.layout
    n = layout.grid.dim
    if triple is None:
        rop = assemble_runge(op, coeffs, layout, target_order=target_order,
                             threads=threads)
        triple = svd_triple(rop)
    betas = multi_indices(n, k_of_n(n))
    targets = cutoff_targets(layout, degrees=betas)
    return [control_for_target(triple, t, eps, n_alpha=n_alpha) for t in targets]


def perturb_measurements(mset, op, coeffs, layout=None, magnitude=0.01,
                         rng=None, seed=None, controls=None, eps_basis=0.1,
                         triple=None):
    """Add random polynomial-control perturbations to each measurement.

    Draws (n+1)*N_0 coefficients uniformly from [-magnitude, magnitude] and
    adds the corresponding combination of the chi*x^beta controls
    (|beta| <= k(n)) to each exterior datum, then recomputes solutions and
    the determinant certificate.
    """
    layout = layout or mset.layout
    if rng is None:
        rng = np.random.default_rng(seed)
    if magnitude < 0:
        raise ValueError("perturbation magnitude must be nonnegative")
    if controls is None:
        controls = basis_controls(op, coeffs, layout, eps=eps_basis, triple=triple)
    n_meas = len(mset.exterior_data)
    alpha = rng.uniform(-magnitude, magnitude, size=(n_meas, len(controls)))
    new_data = []
    for l, f in enumerate(mset.exterior_data):
        vals = f.values.copy()
        for j, ctrl in enumerate(controls):
            vals = vals + alpha[l, j] * ctrl.f_alpha.values
        new_data.append(ScalarField(layout, vals))
    return _measurements_from_data(op, coeffs, layout, tuple(new_data), mset.tau_det)


@dataclass(frozen=True)
class ReconstructionResult:
    b_hat: VectorField
    c_hat: ScalarField
    solved: np.ndarray  # core node indices recovered by the linear system
    filled: np.ndarray  # core node indices filled by interpolation
    errors: dict


def _relative_l2(layout, est, truth, nodes):
    diff = est[nodes] - truth[nodes]
    denom = float(np.linalg.norm(truth[nodes]))
    num = float(np.linalg.norm(diff))
    return {
        "abs": num * layout.grid.h ** (layout.grid.dim / 2.0),
        "rel": num / denom if denom > 0 else float("inf") if num > 0 else 0.0,
    }


def _solve_nodewise(mats, rhs):
    """Batched solve; exactly singular nodes are flagged, not fatal."""
    bad = np.zeros(len(mats), dtype=bool)
    try:
        sol = np.linalg.solve(mats, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        sol = np.zeros_like(rhs)
        for i in range(len(mats)):
            try:
                sol[i] = np.linalg.solve(mats[i], rhs[i])
            except np.linalg.LinAlgError:
                bad[i] = True
    bad |= ~np.all(np.isfinite(sol), axis=1)
    sol[bad] = 0.0
    return sol, bad


def recover_pointwise(mset, op, truth=None, fill_neighbors=4):
    """Solve the pointwise system at admissible nodes; interpolate the rest.

    Excluded core nodes are filled by inverse-distance weights from the
    nearest admissible nodes (coefficients are continuous, so any
    continuous extension is admissible).  Raises EmptyAdmissibleSet when
    nothing is admissible.
    """
    from scipy.spatial import cKDTree

    layout = mset.layout
    dim = layout.grid.dim
    core = layout.core_k
    admissible = mset.report.admissible.copy()
    if not np.any(admissible):
        raise EmptyAdmissibleSet("no core node passed the determinant test")

    rows = _solution_rows(layout, mset.solutions)[core]
    rhs = -np.stack([r.values[core] for r in mset.rhs_fields], axis=1)

    solved_vals = np.zeros((core.size, dim + 1))
    adm_idx = np.flatnonzero(admissible)
    sol, bad = _solve_nodewise(rows[adm_idx], rhs[adm_idx])
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} admissible node(s) had a singular recovery "
            "system; downgraded to excluded",
            stacklevel=2,
        )
        admissible[adm_idx[bad]] = False
        adm_idx = adm_idx[~bad]
        sol = sol[~bad]
        if adm_idx.size == 0:
            raise EmptyAdmissibleSet("all admissible nodes were singular")
    solved_vals[adm_idx] = sol

    excluded = np.flatnonzero(~admissible)
    if excluded.size:
        pts = layout.coords()
        tree = cKDTree(pts[core[adm_idx]])
        k = min(fill_neighbors, adm_idx.size)
        dist, nbr = tree.query(pts[core[excluded]], k=k)
        dist = np.atleast_2d(dist)
        nbr = np.atleast_2d(nbr)
        w = 1.0 / np.maximum(dist, 1e-12 * layout.grid.h)
        w /= w.sum(axis=1, keepdims=True)
        solved_vals[excluded] = np.einsum("ek,ekc->ec", w, solved_vals[adm_idx][nbr])

    b_vals = np.zeros((layout.n_nodes, dim))
    c_vals = np.zeros(layout.n_nodes)
    b_vals[core] = solved_vals[:, :dim]
    c_vals[core] = solved_vals[:, dim]
    b_hat = VectorField(layout, b_vals)
    c_hat = ScalarField(layout, c_vals)

    errors = {"excluded_fraction": mset.report.excluded_fraction}
    if truth is not None:
        bt = truth.b.values
        ct = truth.c.values
        b_err = _relative_l2(layout, b_vals.ravel(), bt.ravel(),
                             (core[:, None] * dim + np.arange(dim)).ravel())
        c_err = _relative_l2(layout, c_vals, ct, core)
        errors.update(
            b_rel=b_err["rel"], b_abs=b_err["abs"],
            c_rel=c_err["rel"], c_abs=c_err["abs"],
        )
    return ReconstructionResult(
        b_hat=b_hat,
        c_hat=c_hat,
        solved=core[adm_idx],
        filled=core[excluded],
        errors=errors,
    )


def recover_interior_field(op, f, dn_on_w2, ridge, reg_window="omega"):
    """Tikhonov surrogate for interior recovery from exterior data.

    Minimizes ||(-Delta)^s u - dn||^2 on W2 plus ridge * ||(-Delta)^s u||^2
    on the regularization window, over u free on Omega with u = f outside.
    The normal equations are SPD for any positive ridge.
    """
    if ridge <= 0:
        raise ValueError("ridge must be positive")
    layout = op.layout
    omega = layout.omega
    ext = layout.exterior
    w2 = layout.w2
    reg = getattr(layout, reg_window) if isinstance(reg_window, str) else np.asarray(reg_window)

    dense = op.dense()
    dn_vals = dn_on_w2.values[w2] if isinstance(dn_on_w2, ScalarField) else np.asarray(dn_on_w2)
    a_data = dense[np.ix_(w2, omega)]
    b_data = dn_vals - dense[np.ix_(w2, ext)] @ f.values[ext]
    a_reg = dense[np.ix_(reg, omega)]
    b_reg = -dense[np.ix_(reg, ext)] @ f.values[ext]

    lhs = a_data.T @ a_data + ridge * (a_reg.T @ a_reg)
    rhs = a_data.T @ b_data + ridge * (a_reg.T @ b_reg)
    u_omega = np.linalg.solve(lhs, rhs)

    u = np.zeros(layout.n_nodes)
    u[ext] = f.values[ext]
    u[omega] = u_omega
    return ScalarField(layout, u)
