"""Discrete Dirichlet-to-Neumann maps, the Alessandrini identity, and the
whitened operator norm used for stability curves.

The DN map sends nodal exterior data on W1 to the nonlocal operator applied
to the solution, sampled on W2; the adjoint map plays the same game with
the adjoint solve and the windows swapped.  Because the adjoint interior
block is the exact transpose of the forward one, the discrete duality
<Lambda f, g> = <f, Lambda* g> and the Alessandrini identity hold to
rounding error, which the tests pin at 1e-10 relative.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular, svdvals

from .domain import RegionLayout, ScalarField
from .solver import gradient, solve_adjoint, solve_forward

__all__ = [
    "DNMatrix",
    "dn_apply",
    "dn_adjoint_apply",
    "dn_matrix",
    "dn_difference",
    "alessandrini_residual",
    "operator_norm_star",
    "pairing",
    "coefficient_hash",
    "dn_to_csv",
]


def pairing(layout, a, b):
    """Discrete L2 pairing h^n sum(a*b) over the box."""
    hn = layout.grid.h ** layout.grid.dim
    av = a.values if isinstance(a, ScalarField) else np.asarray(a)
    bv = b.values if isinstance(b, ScalarField) else np.asarray(b)
    return hn * float(av @ bv)


@dataclass(frozen=True)
class DNMatrix:
    """Nodal DN map W1 -> W2 and its adjoint W2 -> W1."""

    layout: RegionLayout
    s: float
    map: np.ndarray
    adjoint_map: np.ndarray

    def __post_init__(self):
        self.map.setflags(write=False)
        self.adjoint_map.setflags(write=False)

    def apply(self, f_w1):
        return self.map @ np.asarray(f_w1)

    def apply_adjoint(self, g_w2):
        return self.adjoint_map @ np.asarray(g_w2)


def _restrict(layout, field, idx):
    out = np.zeros(layout.n_nodes)
    out[idx] = field.values[idx]
    return ScalarField(layout, out)


def dn_apply(op, coeffs, f):
    """Forward solve, apply the nonlocal operator, restrict to W2."""
    layout = op.layout
    if np.setdiff1d(f.support, layout.w1).size:
        raise ValueError("exterior data must be supported in W1")
    sol = solve_forward(op, coeffs, f)
    return _restrict(layout, op.apply(sol.u), layout.w2)


def dn_adjoint_apply(op, coeffs, g):
    """Adjoint solve from data on W2, observed on W1."""
    layout = op.layout
    if np.setdiff1d(g.support, layout.w2).size:
        raise ValueError("adjoint data must be supported in W2")
    sol = solve_adjoint(op, coeffs, g)
    return _restrict(layout, op.apply(sol.u), layout.w1)


def dn_matrix(op, coeffs, layout=None, threads=1):
    """Columns are dn_apply on nodal indicator data; adjoint analogously."""
    layout = layout or op.layout
    w1, w2 = layout.w1, layout.w2

    def fwd_col(j):
        f = ScalarField.from_values_at(layout, [w1[j]], [1.0])
        sol = solve_forward(op, coeffs, f)
        return op.apply(sol.u).values[w2]

    def adj_col(i):
        g = ScalarField.from_values_at(layout, [w2[i]], [1.0])
        sol = solve_adjoint(op, coeffs, g)
        return op.apply(sol.u).values[w1]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fwd = list(pool.map(fwd_col, range(w1.size)))
            adj = list(pool.map(adj_col, range(w2.size)))
    else:
        fwd = [fwd_col(j) for j in range(w1.size)]
        adj = [adj_col(i) for i in range(w2.size)]

    return DNMatrix(
        layout=layout,
        s=op.s,
        map=np.column_stack(fwd),
        adjoint_map=np.column_stack(adj),
    )


def dn_difference(dn_a, dn_b):
    return dn_a.map - dn_b.map


def alessandrini_residual(op, coeffs1, coeffs2, f1, f2):
    """Normalized defect of the discrete Alessandrini identity.

    Compares <(Lambda_1 - Lambda_2) f1, f2> against the interior pairing
    <(b1-b2).grad u1, u2*> + <(c1-c2) u1, u2*> with u1 the forward solution
    for coeffs1 and u2* the adjoint solution for coeffs2.
    """
    layout = op.layout
    u1 = solve_forward(op, coeffs1, f1).u
    u2s = solve_adjoint(op, coeffs2, f2).u

    lam1 = op.apply(u1).values[layout.w2]
    lam2 = op.apply(solve_forward(op, coeffs2, f1).u).values[layout.w2]
    hn = layout.grid.h ** layout.grid.dim
    lhs = hn * float((lam1 - lam2) @ f2.values[layout.w2])

    grad_u1 = gradient(u1, layout)
    db = coeffs1.b.values - coeffs2.b.values
    dc = coeffs1.c.values - coeffs2.c.values
    drift_term = np.sum(db * grad_u1.values, axis=1)
    rhs = hn * float(((drift_term + dc * u1.values) * u2s.values)[layout.omega].sum())

    scale = max(abs(lhs), abs(rhs), hn * float(np.linalg.norm(lam1) * np.linalg.norm(f2.values[layout.w2])), 1e-300)
    return abs(lhs - rhs) / scale


def operator_norm_star(delta_map, metric_w1, metric_w2):
    """Largest Gram-whitened singular value of the DN-difference pairing.

    Realizes sup <A f1, f2>_{W2} over unit discrete H^s norms of f1 on W1
    and f2 on W2.
    """
    delta = delta_map.map if isinstance(delta_map, DNMatrix) else np.asarray(delta_map)
    layout = metric_w1.layout
    hn = layout.grid.h ** layout.grid.dim
    r1 = cholesky(metric_w1.gram, lower=False)
    r2 = cholesky(metric_w2.gram, lower=False)
    # pairing matrix P[i,j] = h^n * delta[i,j]; whitened = R2^{-T} P R1^{-1}
    p = hn * delta
    left = solve_triangular(r2, p, trans="T", lower=False)
    whitened = solve_triangular(r1, left.T, trans="T", lower=False).T
    if min(whitened.shape) == 0:
        return 0.0
    return float(svdvals(whitened)[0])


def coefficient_hash(coeffs):
    """Stable fingerprint of the coefficient fields for reproducibility."""
    hsh = hashlib.sha256()
    hsh.update(np.ascontiguousarray(coeffs.b.values).tobytes())
    hsh.update(np.ascontiguousarray(coeffs.c.values).tobytes())
    return hsh.hexdigest()[:16]


def dn_to_csv(dnm, path, meta=None):
    """Dense CSV dump plus a JSON sidecar with the run fingerprint."""
    np.savetxt(path, dnm.map, delimiter=",", fmt="%.17g")
    grid = dnm.layout.grid
    sidecar = {
        "s": dnm.s,
        "h": grid.h,
        "dim": grid.dim,
        "box_lo": list(grid.box_lo),
        "box_hi": list(grid.box_hi),
        "n_w1": int(dnm.layout.w1.size),
        "n_w2": int(dnm.layout.w2.size),
        "regions": {name: repr(region)
                    for name, region in dnm.layout.regions.items()},
    }
    if meta:
        sidecar.update(meta)
    with open(str(path) + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    return sidecar
