"""Dense discrete fractional Laplacian, spectral cross-check oracle and
discrete fractional Sobolev norms.

The canonical operator realizes

    C(n,s) * PV int (u(x) - u(y)) / |x-y|^{n+2s} dy

by cellwise exact kernel integration over the grid's cell tiling, a quadratic
Taylor correction on the singular window |z|_inf <= 3h/2, and an analytic
tail for the region outside the box (where all fields vanish).  In 1D the
far cells additionally integrate the kernel against the per-cell quadratic
interpolant (closed-form moments), which removes the O(h^{2-2s}) collocation
error; in 2D plain cell collocation is used.

The resulting dense matrix is symmetric by construction and positive
definite in practice (graph-Laplacian structure plus positive tail; the 1D
moment corrections are small relative perturbations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import cholesky, toeplitz
from scipy.special import betainc, gamma

from .domain import RegionLayout, ScalarField
from .errors import OrderOutOfRange, SupportTooWide, ZeroField

__all__ = [
    "NonlocalOperator",
    "SobolevMetric",
    "assemble_fraclap",
    "spectral_oracle_apply",
    "build_sobolev_metric",
    "sobolev_norm",
    "poincare_ratio",
    "normalization_constant",
    "getoor_constant",
    "getoor_profile",
    "quadratic_form",
    "save_operator",
    "load_operator",
    "weights_to_csv",
]

WINDOW_HALF_CELLS = 1.5  # singular window half-width in cells
CACHE_VERSION = 1


def normalization_constant(n, s):
    """Constant matching the singular integral to the |xi|^{2s} multiplier."""
    return 2 ** (2 * s) * s * gamma(n / 2 + s) / (np.pi ** (n / 2) * gamma(1 - s))


def getoor_constant(n, s):
    """Value of the fractional Laplacian of (1-|x|^2)_+^s inside the unit ball."""
    return 2 ** (2 * s) * gamma(1 + s) * gamma(n / 2 + s) / gamma(n / 2)


def getoor_profile(layout, s):
    """The reference profile (1 - |x|^2)_+^s sampled on the grid."""
    pts = layout.coords()
    r2 = np.sum(pts**2, axis=1)
    vals = np.where(r2 < 1.0, np.clip(1.0 - r2, 0.0, None) ** s, 0.0)
    return ScalarField(layout, vals)


def _check_order(s):
    if not (0.5 < s < 1.0):
        raise OrderOutOfRange(f"s={s} outside (1/2, 1)")


@dataclass(frozen=True)
class NonlocalOperator:
    """Assembled discrete operator: dense couplings plus analytic tail."""

    layout: RegionLayout
    s: float
    weights: np.ndarray
    tail_diagonal: np.ndarray

    def __post_init__(self):
        self.weights.setflags(write=False)
        self.tail_diagonal.setflags(write=False)

    def apply(self, field):
        vals = field.values if isinstance(field, ScalarField) else np.asarray(field)
        out = self.weights @ vals + self.tail_diagonal * vals
        if isinstance(field, ScalarField):
            return ScalarField(self.layout, out)
        return out

    def dense(self):
        return self.weights + np.diag(self.tail_diagonal)

    def quadratic_form(self, field):
        """Discrete <v, (-Delta)^s v> with the h^n integration weight."""
        vals = field.values if isinstance(field, ScalarField) else np.asarray(field)
        hn = self.layout.grid.h ** self.layout.grid.dim
        return hn * float(vals @ (self.weights @ vals + self.tail_diagonal * vals))


def quadratic_form(op, field):
    return op.quadratic_form(field)


# -- 1D assembly --------------------------------------------------------------


def _couplings_1d(n_nodes, h, s):
    """Symmetric coupling coefficients w(delta) for the 1D scheme."""
    def a0(z):
        return z ** (-2 * s) / (-2 * s)

    def a1(z):
        return z ** (1 - 2 * s) / (1 - 2 * s)

    def a2(z):
        return z ** (2 - 2 * s) / (2 - 2 * s)

    d = np.arange(n_nodes + 2, dtype=float)
    lo = (d - 0.5) * h
    hi = (d + 0.5) * h
    m0 = np.zeros(n_nodes + 2)
    m1 = np.zeros(n_nodes + 2)
    m2 = np.zeros(n_nodes + 2)
    far = d >= 2
    m0[far] = a0(hi[far]) - a0(lo[far])
    i1 = a1(hi[far]) - a1(lo[far])
    i2 = a2(hi[far]) - a2(lo[far])
    m1[far] = i1 - d[far] * h * m0[far]
    m2[far] = i2 - 2 * d[far] * h * i1 + (d[far] * h) ** 2 * m0[far]

    kappa = (WINDOW_HALF_CELLS * h) ** (2 - 2 * s) / ((2 - 2 * s) * h * h)
    w = np.zeros(n_nodes + 1)
    idx = np.arange(n_nodes + 1)
    w[2:] += m0[2 : n_nodes + 1] - m2[2 : n_nodes + 1] / h**2
    up = idx - 1
    sel = up >= 2
    w[sel] += m1[up[sel]] / (2 * h) + m2[up[sel]] / (2 * h * h)
    dn = idx + 1
    sel = dn >= 2
    w[sel] += -m1[dn[sel]] / (2 * h) + m2[dn[sel]] / (2 * h * h)
    w[1] += kappa
    return w[: n_nodes], kappa


def _assemble_1d(layout, s):
    grid = layout.grid
    h = grid.h
    n = grid.n_nodes
    x = grid.axis_coords(0)
    c = normalization_constant(1, s)

    w, kappa = _couplings_1d(n, h, s)
    weights = -toeplitz(np.concatenate(([0.0], w[1:])))

    # tail: kernel integral beyond the cell tiling [lo - h/2, hi + h/2]
    left = x - (x[0] - 0.5 * h)
    right = (x[-1] + 0.5 * h) - x
    tail = (left ** (-2 * s) + right ** (-2 * s)) / (2 * s)

    # diagonal of the coupling part: full-line far integral + window term,
    # minus the per-node tail (which dense() adds back)
    full_far = (WINDOW_HALF_CELLS * h) ** (-2 * s) / s
    diag = full_far - tail + 2 * kappa
    weights[np.arange(n), np.arange(n)] = diag
    return c * weights, c * tail


# -- 2D assembly --------------------------------------------------------------


def _beta_const(s):
    return np.sqrt(np.pi) * gamma(s + 0.5) / gamma(s + 1.0)


def _halfplane_integral(delta, s):
    """int over {z1 > delta} of |z|^{-2-2s} dz."""
    return _beta_const(s) * delta ** (-2 * s) / (2 * s)


def _corner_integral(a, b, s):
    """int over {z1 > a, z2 > b} of |z|^{-2-2s} dz (a, b > 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r2 = a * a + b * b
    ix_b = betainc(s + 0.5, 0.5, b * b / r2)
    ix_a = betainc(s + 0.5, 0.5, a * a / r2)
    return _beta_const(s) / (4 * s) * (b ** (-2 * s) * ix_b + a ** (-2 * s) * ix_a)


def _window_moment_2d(h, s):
    """int over the 3x3 cell window of z1^2 |z|^{-2-2s} dz (polar quadrature)."""
    r = WINDOW_HALF_CELLS * h

    def integrand(phi):
        rad = r / max(abs(np.cos(phi)), abs(np.sin(phi)))
        return np.cos(phi) ** 2 * rad ** (2 - 2 * s) / (2 - 2 * s)

    val, _ = quad(integrand, 0.0, 2 * np.pi, limit=400)
    return val


def _cell_m0_2d(offsets, h, s, npts, nsub):
    """Exact-kernel cell integrals for integer offsets (vectorized)."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(npts)
    edges = np.linspace(-0.5, 0.5, nsub + 1)
    pts = np.concatenate(
        [0.5 * (a + b) + 0.5 * (b - a) * gl_x for a, b in zip(edges[:-1], edges[1:])]
    )
    wts = np.concatenate([0.5 * (b - a) * gl_w for a, b in zip(edges[:-1], edges[1:])])
    px = pts[:, None].repeat(len(pts), axis=1).ravel()
    py = np.tile(pts, len(pts))
    ww = np.outer(wts, wts).ravel()
    out = np.empty(len(offsets))
    chunk = max(1, int(4e6 // max(px.size, 1)))
    offs = np.asarray(offsets, dtype=float)
    for start in range(0, len(offs), chunk):
        o = offs[start : start + chunk]
        zx = (o[:, 0:1] + px[None, :]) * h
        zy = (o[:, 1:2] + py[None, :]) * h
        kr = (zx * zx + zy * zy) ** (-1 - s)
        out[start : start + chunk] = kr @ ww * (h * h)
    return out


def _assemble_2d(layout, s):
    grid = layout.grid
    h = grid.h
    nx, ny = grid.nodes_per_axis
    n = nx * ny
    c = normalization_constant(2, s)

    # cell integrals on the nonnegative offset quadrant, mirrored by symmetry
    dk, dl = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    quad_offs = np.column_stack([dk.ravel(), dl.ravel()])
    cheb = np.max(np.abs(quad_offs), axis=1)
    m0_quad = np.zeros(len(quad_offs))
    near = (cheb >= 2) & (cheb <= 4)
    far = cheb > 4
    if np.any(near):
        m0_quad[near] = _cell_m0_2d(quad_offs[near], h, s, npts=16, nsub=4)
    if np.any(far):
        m0_quad[far] = _cell_m0_2d(quad_offs[far], h, s, npts=8, nsub=1)
    m0 = np.zeros((2 * nx - 1, 2 * ny - 1))
    m0[nx - 1 :, ny - 1 :] = m0_quad.reshape(nx, ny)
    m0[: nx - 1, :] = m0[:: -1, :][: nx - 1, :]
    m0[:, : ny - 1] = m0[:, ::-1][:, : ny - 1]

    j2 = _window_moment_2d(h, s)
    kappa = j2 / (2 * h * h)
    wmat = m0.copy()
    wmat[nx - 1, ny - 1] = 0.0
    for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        wmat[nx - 1 + off[0], ny - 1 + off[1]] += kappa
    # ring-1 diagonal cells belong to the window: no direct coupling
    for off in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
        wmat[nx - 1 + off[0], ny - 1 + off[1]] = 0.0

    # tail: complement of the cell tiling rectangle (half-planes minus corners)
    xs = grid.axis_coords(0)
    ys = grid.axis_coords(1)
    d_left = (xs - (xs[0] - 0.5 * h))[:, None] + np.zeros((1, ny))
    d_right = ((xs[-1] + 0.5 * h) - xs)[:, None] + np.zeros((1, ny))
    d_bot = np.zeros((nx, 1)) + (ys - (ys[0] - 0.5 * h))[None, :]
    d_top = np.zeros((nx, 1)) + ((ys[-1] + 0.5 * h) - ys)[None, :]
    tail = (
        _halfplane_integral(d_left, s)
        + _halfplane_integral(d_right, s)
        + _halfplane_integral(d_bot, s)
        + _halfplane_integral(d_top, s)
        - _corner_integral(d_left, d_bot, s)
        - _corner_integral(d_left, d_top, s)
        - _corner_integral(d_right, d_bot, s)
        - _corner_integral(d_right, d_top, s)
    ).ravel()

    # full-plane integral outside the window, for the coupling diagonal
    w_half = WINDOW_HALF_CELLS * h
    comp_window = 4 * _halfplane_integral(w_half, s) - 4 * _corner_integral(
        w_half, w_half, s
    )
    diag = comp_window - tail + 4 * kappa

    ii, jj = np.divmod(np.arange(n), ny)
    weights = np.empty((n, n))
    row_chunk = max(1, int(4e6 // n))
    for start in range(0, n, row_chunk):
        stop = min(start + row_chunk, n)
        dki = ii[:, None][start:stop] - ii[None, :]
        dlj = jj[:, None][start:stop] - jj[None, :]
        weights[start:stop] = -wmat[dki + nx - 1, dlj + ny - 1]
    weights[np.arange(n), np.arange(n)] = diag
    return c * weights, c * tail


def assemble_fraclap(layout, s):
    """Assemble the dense discrete fractional Laplacian of order s."""
    _check_order(s)
    if layout.grid.dim == 1:
        weights, tail = _assemble_1d(layout, s)
    else:
        weights, tail = _assemble_2d(layout, s)
    return NonlocalOperator(layout=layout, s=s, weights=weights, tail_diagonal=tail)


# -- spectral oracle -----------------------------------------------------------

EMBED_FACTOR = 4


def _embed_shape(grid):
    return tuple(EMBED_FACTOR * (m - 1) for m in grid.nodes_per_axis)


def _multiplier(grid, exponent_fn):
    h = grid.h
    shape = _embed_shape(grid)
    freqs = [2 * np.pi * np.fft.fftfreq(m, d=h) for m in shape]
    if grid.dim == 1:
        xi2 = freqs[0] ** 2
    else:
        xi2 = freqs[0][:, None] ** 2 + freqs[1][None, :] ** 2
    return exponent_fn(xi2)


def _check_margin(layout, field):
    grid = layout.grid
    supp = field.support if isinstance(field, ScalarField) else np.flatnonzero(field)
    if supp.size == 0:
        return
    multi = np.unravel_index(supp, grid.nodes_per_axis)
    for ax, m in enumerate(multi):
        margin_nodes = (grid.nodes_per_axis[ax] - 1) / 4.0
        if m.min() < margin_nodes - 1e-9 or m.max() > grid.nodes_per_axis[ax] - 1 - margin_nodes + 1e-9:
            raise SupportTooWide(
                "field support must keep a margin of a quarter box width "
                "from the boundary for the periodic oracle"
            )


def spectral_oracle_apply(layout, s, field):
    """Cross-check oracle: periodic 4x embedding, |xi|^{2s} multiplier."""
    _check_order(s)
    _check_margin(layout, field)
    grid = layout.grid
    vals = field.values if isinstance(field, ScalarField) else np.asarray(field)
    shape = _embed_shape(grid)
    pad = np.zeros(shape)
    if grid.dim == 1:
        pad[: grid.nodes_per_axis[0]] = vals
        mult = _multiplier(grid, lambda xi2: xi2**s)
        out = np.fft.ifft(mult * np.fft.fft(pad)).real[: grid.nodes_per_axis[0]]
    else:
        nx, ny = grid.nodes_per_axis
        pad[:nx, :ny] = vals.reshape(nx, ny)
        mult = _multiplier(grid, lambda xi2: xi2**s)
        out = np.fft.ifft2(mult * np.fft.fft2(pad)).real[:nx, :ny].ravel()
    return ScalarField(layout, out)


# -- discrete Sobolev metrics ---------------------------------------------------


@dataclass(frozen=True)
class SobolevMetric:
    """SPD Gram form realizing the discrete H^t inner product on a node set."""

    layout: RegionLayout
    order: float
    nodes: np.ndarray
    gram: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=np.intp))
        self.gram.setflags(write=False)

    def chol(self):
        return cholesky(self.gram, lower=False)

    def inner(self, f, g):
        x = self._restricted(f)
        y = self._restricted(g)
        return float(x @ self.gram @ y)

    def norm(self, f):
        x = self._restricted(f)
        return float(np.sqrt(max(x @ self.gram @ x, 0.0)))

    def _restricted(self, f):
        vals = f.values if isinstance(f, ScalarField) else np.asarray(f)
        if vals.shape == (self.nodes.size,):
            return vals
        if np.setdiff1d(np.flatnonzero(vals), self.nodes).size:
            raise ValueError("field supported outside the metric's node set")
        return vals[self.nodes]


def build_sobolev_metric(layout, order, nodes="omega"):
    """Gram matrix of the periodic-embedding multiplier <xi>^{2t} on a node set."""
    grid = layout.grid
    idx = getattr(layout, nodes) if isinstance(nodes, str) else np.asarray(nodes, dtype=np.intp)
    hn = grid.h**grid.dim
    if order == 0.0:
        gram = hn * np.eye(idx.size)
        return SobolevMetric(layout=layout, order=0.0, nodes=idx, gram=gram)

    shape = _embed_shape(grid)
    mult = _multiplier(grid, lambda xi2: (1.0 + xi2) ** order)
    m = idx.size
    cols = np.zeros(shape + (m,))
    if grid.dim == 1:
        cols[idx, np.arange(m)] = 1.0
        transformed = np.fft.ifft(
            mult[:, None] * np.fft.fft(cols, axis=0), axis=0
        ).real
        gram = hn * transformed[idx, :]
    else:
        ny = grid.nodes_per_axis[1]
        ixs, iys = np.divmod(idx, ny)
        cols = np.zeros((shape[0], shape[1], m))
        cols[ixs, iys, np.arange(m)] = 1.0
        transformed = np.fft.ifft2(
            mult[:, :, None] * np.fft.fft2(cols, axes=(0, 1)), axes=(0, 1)
        ).real
        gram = hn * transformed[ixs, iys, :]
    gram = 0.5 * (gram + gram.T)
    return SobolevMetric(layout=layout, order=order, nodes=idx, gram=gram)


def sobolev_norm(metric, field):
    """sqrt of the Gram quadratic form; order may be negative."""
    return metric.norm(field)


def _cache_key(grid, s):
    return np.array(
        [CACHE_VERSION, grid.dim, s, grid.h, *grid.box_lo, *grid.box_hi],
        dtype=float,
    )


def save_operator(op, path):
    """Binary cache of assembled weights keyed by (dim, extents, h, s)."""
    np.savez_compressed(
        path,
        key=_cache_key(op.layout.grid, op.s),
        weights=op.weights,
        tail_diagonal=op.tail_diagonal,
    )


def load_operator(path, layout, s):
    """Load cached weights; returns None on any key mismatch."""
    with np.load(path) as data:
        if not np.array_equal(data["key"], _cache_key(layout.grid, s)):
            return None
        return NonlocalOperator(
            layout=layout,
            s=s,
            weights=data["weights"].copy(),
            tail_diagonal=data["tail_diagonal"].copy(),
        )


def weights_to_csv(op, path):
    """Debugging dump of the dense coupling array."""
    np.savetxt(path, op.weights, delimiter=",", fmt="%.17g")


def poincare_ratio(layout, s, field, op=None):
    """||v||_{L2} / <v, (-Delta)^s v>^{1/2} for v supported in Omega."""
    vals = field.values
    if not np.any(vals):
        raise ZeroField("Poincare ratio undefined for the zero field")
    if np.setdiff1d(field.support, layout.omega).size:
        raise ValueError("field must vanish outside Omega")
    if op is None:
        op = assemble_fraclap(layout, s)
    hn = layout.grid.h ** layout.grid.dim
    num = np.sqrt(hn) * np.linalg.norm(vals)
    den = np.sqrt(op.quadratic_form(field))
    return float(num / den)
