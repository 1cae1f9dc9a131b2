"""Quantitative Runge approximation via the SVD of the solution operator.

The operator A sends nodal exterior data f on a window W to the solution
restriction u_f|_Omega (equal to (P f - f)|_Omega since f vanishes on
Omega).  Its Gram-whitened SVD gives truncated-spectrum controls: keeping
modes with singular value above a cutoff alpha yields an exterior datum
whose solution approximates a prescribed interior target, trading accuracy
against the size of the control.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular, svd

from .domain import ScalarField, plateau_field, polynomial_field
from .errors import TargetUnreachable
from .fraclap import build_sobolev_metric
from .solver import solve_forward

__all__ = [
    "RungeOperator",
    "SpectralTriple",
    "RungeControl",
    "assemble_runge",
    "svd_triple",
    "truncated_control",
    "alpha_sweep",
    "control_for_target",
    "approximate_targets_for_reconstruction",
    "cutoff_targets",
    "DEFAULT_ALPHA_POINTS",
    "ALPHA_FLOOR",
]

DEFAULT_ALPHA_POINTS = 24
# sweep grid floor relative to sigma_1: below this the truncation formulas
# operate on numerically meaningless modes
ALPHA_FLOOR = 1e-12


@dataclass(frozen=True)
class RungeOperator:
    """Dense |Omega| x |W| solution-restriction operator with its Grams."""

    matrix: np.ndarray
    source_metric: object
    target_metric: object
    w_nodes: np.ndarray
    omega_nodes: np.ndarray
    layout: object

    def __post_init__(self):
        self.matrix.setflags(write=False)


@dataclass(frozen=True)
class SpectralTriple:
    """Singular values (descending) with Gram-orthonormal vector systems."""

    sigma: np.ndarray
    right: np.ndarray  # |W| x r, orthonormal in the source Gram
    left: np.ndarray  # |Omega| x r, orthonormal in the target Gram
    operator: RungeOperator


@dataclass(frozen=True)
class RungeControl:
    f_alpha: ScalarField
    target: ScalarField
    alpha: float
    achieved_error: float
    control_norm: float
    cutoff_above_spectrum: bool
    n_modes: int


def assemble_runge(op, coeffs, layout=None, target_order=0.0, window="w1",
                   whitened=True, threads=1):
    """Build the solution-restriction operator column by column.

    target_order selects the Gram on Omega (0 for L2, s-delta for the
    smoother geometry); the source Gram is the discrete H^s form on W.
    With whitened=False both Grams are Euclidean.
    """
    layout = layout or op.layout
    w_nodes = getattr(layout, window) if isinstance(window, str) else np.asarray(window, dtype=np.intp)
    omega = layout.omega

    def column(j):
        f = ScalarField.from_values_at(layout, [w_nodes[j]], [1.0])
        return solve_forward(op, coeffs, f).u.values[omega]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, range(w_nodes.size)))
    else:
        cols = [column(j) for j in range(w_nodes.size)]
    matrix = np.column_stack(cols)

    if whitened:
        source = build_sobolev_metric(layout, op.s, w_nodes)
        target = build_sobolev_metric(layout, float(target_order), omega)
    else:
        source = build_sobolev_metric(layout, 0.0, w_nodes)
        target = build_sobolev_metric(layout, 0.0, omega)
    return RungeOperator(
        matrix=matrix,
        source_metric=source,
        target_metric=target,
        w_nodes=np.asarray(w_nodes, dtype=np.intp),
        omega_nodes=omega,
        layout=layout,
    )


def svd_triple(rop):
    """Gram-whitened SVD of the Runge operator."""
    r_s = cholesky(rop.source_metric.gram, lower=False)
    r_t = cholesky(rop.target_metric.gram, lower=False)
    whitened = r_t @ solve_triangular(r_s, rop.matrix.T, trans="T", lower=False).T
    u, sig, vt = svd(whitened, full_matrices=False)
    right = solve_triangular(r_s, vt.T, lower=False)
    left = solve_triangular(r_t, u, lower=False)
    return SpectralTriple(sigma=sig, right=right, left=left, operator=rop)


def _target_coefficients(triple, target):
    rop = triple.operator
    v = target.values[rop.omega_nodes]
    return triple.left.T @ (rop.target_metric.gram @ v), v


def truncated_control(triple, target, alpha):
    """Exterior control from the modes with singular value above alpha."""
    if alpha <= 0:
        raise ValueError("cutoff alpha must be positive")
    rop = triple.operator
    coeffs, v = _target_coefficients(triple, target)
    keep = triple.sigma > alpha
    flagged = not np.any(keep)
    mode_coeffs = coeffs[keep] / triple.sigma[keep]
    f_w = triple.right[:, keep] @ mode_coeffs if mode_coeffs.size else np.zeros(rop.w_nodes.size)
    residual = rop.matrix @ f_w - v
    err = float(np.sqrt(max(residual @ (rop.target_metric.gram @ residual), 0.0)))
    layout = rop.layout
    return RungeControl(
        f_alpha=ScalarField.from_values_at(layout, rop.w_nodes, f_w),
        target=target,
        alpha=float(alpha),
        achieved_error=err,
        control_norm=float(np.linalg.norm(mode_coeffs)),
        cutoff_above_spectrum=flagged,
        n_modes=int(np.count_nonzero(keep)),
    )


def default_alpha_grid(triple, n_alpha=DEFAULT_ALPHA_POINTS):
    """Log-spaced cutoffs spanning the numerically meaningful spectrum."""
    s1 = float(triple.sigma[0])
    lo = max(float(triple.sigma[-1]), ALPHA_FLOOR * s1)
    return np.geomspace(lo, s1, n_alpha)


def alpha_sweep(triple, target, alphas=None, n_alpha=DEFAULT_ALPHA_POINTS):
    """Controls over a cutoff grid, ordered by decreasing alpha."""
    if alphas is None:
        alphas = default_alpha_grid(triple, n_alpha)
    alphas = np.sort(np.asarray(alphas, dtype=float))[::-1]
    return [truncated_control(triple, target, a) for a in alphas]


def control_for_target(triple, target, eps, alphas=None, n_alpha=DEFAULT_ALPHA_POINTS):
    """Cheapest control meeting achieved_error <= eps * ||target||.

    Scans cutoffs from the largest down and returns at the first success,
    so the control spends as few modes as possible.  Raises
    TargetUnreachable (with the best error found) if the whole grid fails.
    """
    rop = triple.operator
    v = target.values[rop.omega_nodes]
    target_norm = float(np.sqrt(max(v @ (rop.target_metric.gram @ v), 0.0)))
    if alphas is None:
        alphas = default_alpha_grid(triple, n_alpha)
    alphas = np.sort(np.asarray(alphas, dtype=float))[::-1]
    best = None
    for a in alphas:
        ctrl = truncated_control(triple, target, a)
        if ctrl.achieved_error <= eps * target_norm:
            return ctrl
        if best is None or ctrl.achieved_error < best.achieved_error:
            best = ctrl
    raise TargetUnreachable(best.achieved_error / max(target_norm, 1e-300), eps)


def cutoff_targets(layout, degrees=None, max_degree=1):
    """Smooth-cutoff monomial targets chi * x^beta, supported in Omega.

    chi is 1 on the core and vanishes smoothly before the Omega boundary.
    With degrees=None, returns first-order coordinates then the constant:
    [chi*x_1, ..., chi*x_n, chi*1].
    """
    chi = plateau_field(layout, "core_k", "omega")
    dim = layout.grid.dim
    if degrees is None:
        degrees = [tuple(1 if a == ax else 0 for a in range(dim)) for ax in range(dim)]
        degrees.append((0,) * dim)
    out = []
    for beta in degrees:
        mono = polynomial_field(layout, beta, region="omega")
        out.append(ScalarField(layout, chi.values * mono.values))
    return out


def approximate_targets_for_reconstruction(op, coeffs, layout=None, eps=0.05,
                                           target_order=0.0, triple=None,
                                           n_alpha=DEFAULT_ALPHA_POINTS, threads=1):
    """Controls for the measurement targets chi*x_1..chi*x_n and chi*1."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1): error <= ||target|| is free")
    layout = layout or op.layout
    if triple is None:
        rop = assemble_runge(op, coeffs, layout, target_order=target_order,
                             threads=threads)
        triple = svd_triple(rop)
    targets = cutoff_targets(layout)
    return [control_for_target(triple, t, eps, n_alpha=n_alpha) for t in targets]
