"""Forward and adjoint exterior-value solves.

The discrete problem lives on the full box: exterior nodes carry the given
data, interior (Omega) rows enforce

    (L u)(x) + b(x) . grad_h u(x) + c(x) u(x) = F(x),

with L the assembled nonlocal operator and grad_h the centered-difference
stencil (legal everywhere on Omega because neighbor values are always
known).  The adjoint problem uses the exact transpose of the interior
block, which makes the discrete duality and Alessandrini identities hold to
machine precision.  Drift fields must keep one node ring inside Omega so
the drift stencil never couples to exterior columns; this is what keeps the
transpose construction consistent with applying the plain nonlocal operator
on exterior rows.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve, svdvals

from .domain import RegionLayout, ScalarField, VectorField, _dilate
from .errors import EigenvalueConditionViolated, NonFiniteData

__all__ = [
    "Coefficients",
    "DirichletSolution",
    "LinearSystem",
    "EigenReport",
    "assemble_system",
    "solve_forward",
    "solve_adjoint",
    "check_eigenvalue_condition",
    "gradient",
    "clear_solver_cache",
    "DEFAULT_SINGULAR_TOL",
]

DEFAULT_SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class Coefficients:
    """Drift field b and potential c.

    c may live anywhere on Omega; b must keep a one-node margin inside
    Omega (reconstruction scenarios keep both inside the core K).
    """

    b: VectorField
    c: ScalarField

    def __post_init__(self):
        layout = self.b.layout
        if self.c.layout is not layout:
            raise ValueError("b and c must share a layout")
        if not np.all(np.isfinite(self.b.values)) or not np.all(
            np.isfinite(self.c.values)
        ):
            raise NonFiniteData("coefficients contain non-finite values")
        if np.setdiff1d(self.c.support, layout.omega).size:
            raise ValueError("potential support must lie inside Omega")
        b_supp = self.b.support
        if b_supp.size:
            grown = _dilate(b_supp, layout.grid, rings=1)
            if np.setdiff1d(grown, layout.omega).size:
                raise ValueError(
                    "drift support must keep a one-node margin inside Omega"
                )

    @property
    def layout(self):
        return self.b.layout

    @classmethod
    def zero(cls, layout):
        return cls(VectorField.zero(layout), ScalarField.zero(layout))


@dataclass(frozen=True)
class LinearSystem:
    """Interior block and exterior coupling of the discrete equation."""

    layout: RegionLayout
    interior: np.ndarray
    coupling: np.ndarray
    omega: np.ndarray
    exterior: np.ndarray


@dataclass(frozen=True)
class DirichletSolution:
    u: ScalarField
    exterior_data: ScalarField
    residual_norm: float
    interior_condition: float


class EigenReport(NamedTuple):
    ok: bool
    smallest_singular_value: float
    threshold: float


def _drift_rows(op, coeffs):
    """Drift contribution: rows only where b is nonzero."""
    layout = op.layout
    grid = layout.grid
    n = grid.n_nodes
    rows = coeffs.b.support
    d = np.zeros((n, n))
    if rows.size == 0:
        return d
    h = grid.h
    for ax in range(grid.dim):
        stride = grid.axis_stride(ax)
        bk = coeffs.b.values[rows, ax]
        d[rows, rows + stride] += bk / (2 * h)
        d[rows, rows - stride] -= bk / (2 * h)
    return d


def full_matrix(op, coeffs):
    """Dense box matrix L + b.grad_h + diag(c)."""
    m = op.dense()
    m += _drift_rows(op, coeffs)
    omega = op.layout.omega
    m[omega, omega] += coeffs.c.values[omega]
    return m


def assemble_system(op, coeffs, layout=None):
    """Split the full box matrix into interior block and exterior coupling."""
    layout = layout or op.layout
    omega = layout.omega
    ext = layout.exterior
    m = full_matrix(op, coeffs)
    return LinearSystem(
        layout=layout,
        interior=m[np.ix_(omega, omega)],
        coupling=m[np.ix_(omega, ext)],
        omega=omega,
        exterior=ext,
    )


class _Factorized:
    def __init__(self, op, coeffs, adjoint):
        layout = op.layout
        system = assemble_system(op, coeffs, layout)
        block = system.interior.T.copy() if adjoint else system.interior
        self.op = op
        self.coeffs = coeffs
        self.system = system
        self.block = block
        self.lu = lu_factor(block)
        sv = svdvals(block)
        self.sigma_min = float(sv[-1])
        self.sigma_max = float(sv[0])

    def solve(self, rhs):
        x = lu_solve(self.lu, rhs)
        # one refinement step keeps the relative residual near machine level
        x += lu_solve(self.lu, rhs - self.block @ x)
        return x


_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()
_CACHE_MAX = 32


def _factorized(op, coeffs, adjoint):
    key = (id(op), id(coeffs), adjoint)
    with _CACHE_LOCK:
        entry = _CACHE.get(key)
        if entry is not None and entry.op is op and entry.coeffs is coeffs:
            return entry
    entry = _Factorized(op, coeffs, adjoint)
    with _CACHE_LOCK:
        if len(_CACHE) >= _CACHE_MAX:
            _CACHE.pop(next(iter(_CACHE)))
        _CACHE[key] = entry
    return entry


def clear_solver_cache():
    with _CACHE_LOCK:
        _CACHE.clear()


def check_eigenvalue_condition(op, coeffs, singular_tol=DEFAULT_SINGULAR_TOL):
    """Smallest singular value of the interior block against the tolerance."""
    fac = _factorized(op, coeffs, adjoint=False)
    threshold = singular_tol * fac.sigma_max
    return EigenReport(
        ok=bool(fac.sigma_min >= threshold),
        smallest_singular_value=fac.sigma_min,
        threshold=threshold,
    )


def _validate_data(layout, f, F):
    if not np.all(np.isfinite(f.values)):
        raise NonFiniteData("exterior data contains non-finite values")
    if np.intersect1d(f.support, layout.omega).size:
        raise ValueError("exterior data must be supported outside Omega")
    if F is not None and not np.all(np.isfinite(F.values)):
        raise NonFiniteData("interior source contains non-finite values")


def _solve(op, coeffs, f, F, adjoint, singular_tol):
    layout = op.layout
    _validate_data(layout, f, F)
    fac = _factorized(op, coeffs, adjoint)
    threshold = singular_tol * fac.sigma_max
    if fac.sigma_min < threshold:
        raise EigenvalueConditionViolated(fac.sigma_min, threshold)

    omega = layout.omega
    ext = layout.exterior
    f_ext = f.values[ext]
    rhs = -fac.system.coupling @ f_ext
    if F is not None:
        rhs = rhs + F.values[omega]
    u_omega = fac.solve(rhs)

    u = np.zeros(layout.n_nodes)
    u[ext] = f_ext
    u[omega] = u_omega
    residual = fac.block @ u_omega - rhs
    scale = max(float(np.linalg.norm(rhs)), fac.sigma_max * float(np.linalg.norm(u_omega)), 1e-300)
    return DirichletSolution(
        u=ScalarField(layout, u),
        exterior_data=f,
        residual_norm=float(np.linalg.norm(residual)) / scale,
        interior_condition=fac.sigma_min,
    )


def solve_forward(op, coeffs, f, F=None, singular_tol=DEFAULT_SINGULAR_TOL):
    """Solve ((-Delta)^s + b.grad + c) u = F in Omega, u = f outside."""
    return _solve(op, coeffs, f, F, adjoint=False, singular_tol=singular_tol)


def solve_adjoint(op, coeffs, f, F=None, singular_tol=DEFAULT_SINGULAR_TOL):
    """Solve the adjoint problem; interior block is the exact transpose."""
    return _solve(op, coeffs, f, F, adjoint=True, singular_tol=singular_tol)


def gradient(field, layout=None):
    """Centered differences on Omega nodes (neighbors are always defined)."""
    layout = layout or field.layout
    grid = layout.grid
    h = grid.h
    omega = layout.omega
    vals = field.values
    out = np.zeros((layout.n_nodes, grid.dim))
    for ax in range(grid.dim):
        stride = grid.axis_stride(ax)
        out[omega, ax] = (vals[omega + stride] - vals[omega - stride]) / (2 * h)
    return VectorField(layout, out)
