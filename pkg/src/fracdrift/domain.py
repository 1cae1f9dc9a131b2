"""Grids, region masks and nodal fields.

Everything lives on a uniform tensor grid covering a computational box.
Regions (the domain Omega, exterior measurement windows W1/W2, the compact
core K) are open sets realized as node-membership masks with strict
inequalities, so an interval (a, b) at spacing h contains exactly
(b-a)/h - 1 nodes.  Fields are nodal values over the full box and vanish
identically outside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegreeTooHigh,
    EmptyRegion,
    RegionOverflow,
    SeparationViolation,
)

__all__ = [
    "GridSpec",
    "Interval",
    "Ball",
    "BoxRegion",
    "Annulus",
    "RegionLayout",
    "ScalarField",
    "VectorField",
    "build_layout",
    "bump_field",
    "polynomial_field",
    "plateau_field",
    "region_from_dict",
    "field_to_csv_rows",
]


def _as_tuple(v, dim):
    if np.isscalar(v):
        return (float(v),) * dim
    t = tuple(float(x) for x in v)
    if len(t) != dim:
        raise ValueError(f"expected {dim} components, got {len(t)}")
    return t


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on a box; node coordinates are exactly lo + i*h."""

    dim: int
    box_lo: tuple
    box_hi: tuple
    h: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "box_lo", _as_tuple(self.box_lo, self.dim))
        object.__setattr__(self, "box_hi", _as_tuple(self.box_hi, self.dim))
        for lo, hi, n in zip(self.box_lo, self.box_hi, self.nodes_per_axis):
            if hi <= lo:
                raise ValueError("box_hi must exceed box_lo")
            if n < 8:
                raise ValueError("need at least 8 nodes per axis")
            if not math.isclose(lo + (n - 1) * self.h, hi, rel_tol=1e-9, abs_tol=1e-9 * self.h):
                raise ValueError("box extent must be an integer multiple of h")

    @property
    def nodes_per_axis(self):
        return tuple(
            int(round((hi - lo) / self.h)) + 1
            for lo, hi in zip(self.box_lo, self.box_hi)
        )

    @property
    def n_nodes(self):
        n = 1
        for m in self.nodes_per_axis:
            n *= m
        return n

    def axis_coords(self, axis):
        n = self.nodes_per_axis[axis]
        return self.box_lo[axis] + self.h * np.arange(n)

    def coords(self):
        """All node coordinates, shape (n_nodes, dim), row-major flat order."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        if self.dim == 1:
            return axes[0][:, None]
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def flat_index(self, multi):
        if self.dim == 1:
            return int(multi[0])
        return int(multi[0]) * self.nodes_per_axis[1] + int(multi[1])

    def axis_stride(self, axis):
        if self.dim == 1:
            return 1
        return self.nodes_per_axis[1] if axis == 0 else 1


# -- region primitives (open sets; strict inequalities) ----------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def contains(self, pts):
        x = pts[:, 0]
        return (x > self.lo) & (x < self.hi)

    def shrink(self, amount):
        return Interval(self.lo + amount, self.hi - amount)

    def extent(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def contains(self, pts):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        return np.sum((pts - c) ** 2, axis=1) < self.radius**2

    def shrink(self, amount):
        return Ball(self.center, self.radius - amount)

    def extent(self):
        return 2.0 * self.radius


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple
    hi: tuple

    def contains(self, pts):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        return np.all((pts > lo) & (pts < hi), axis=1)

    def shrink(self, amount):
        lo = tuple(v + amount for v in np.atleast_1d(self.lo))
        hi = tuple(v - amount for v in np.atleast_1d(self.hi))
        return BoxRegion(lo, hi)

    def extent(self):
        return float(np.min(np.atleast_1d(self.hi) - np.atleast_1d(self.lo)))


@dataclass(frozen=True)
class Annulus:
    center: tuple
    inner: float
    outer: float

    def contains(self, pts):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        r2 = np.sum((pts - c) ** 2, axis=1)
        return (r2 > self.inner**2) & (r2 < self.outer**2)

    def shrink(self, amount):
        return Annulus(self.center, self.inner + amount, self.outer - amount)

    def extent(self):
        return self.outer - self.inner


def region_from_dict(spec, dim):
    """Build a region primitive from a JSON-style dict."""
    kind = spec.get("kind")
    if kind == "interval":
        return Interval(float(spec["lo"]), float(spec["hi"]))
    if kind == "ball":
        center = tuple(np.atleast_1d(np.asarray(spec["center"], dtype=float)))
        return Ball(center, float(spec["radius"]))
    if kind == "box":
        return BoxRegion(tuple(np.atleast_1d(spec["lo"]).astype(float)),
                         tuple(np.atleast_1d(spec["hi"]).astype(float)))
    if kind == "annulus":
        return Annulus(tuple(np.atleast_1d(spec["center"]).astype(float)),
                       float(spec["inner"]), float(spec["outer"]))
    raise ValueError(f"unknown region kind {kind!r}")


# -- layout -------------------------------------------------------------------


@dataclass(frozen=True)
class RegionLayout:
    """Grid plus node index sets for Omega, W1, W2, the core K and the box."""

    grid: GridSpec
    omega: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    core_k: np.ndarray
    box: np.ndarray
    regions: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("omega", "w1", "w2", "core_k", "box"):
            arr = np.asarray(getattr(self, name), dtype=np.intp)
            arr = np.sort(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self):
        return self.grid.n_nodes

    def coords(self):
        return self.grid.coords()

    def mask(self, name):
        """Boolean mask over all box nodes for a named region."""
        idx = getattr(self, name)
        m = np.zeros(self.n_nodes, dtype=bool)
        m[idx] = True
        return m

    @property
    def exterior(self):
        """Box nodes outside Omega (the discrete part of Omega_e)."""
        m = np.ones(self.n_nodes, dtype=bool)
        m[self.omega] = False
        return np.flatnonzero(m)


def _min_distance(pts_a, pts_b):
    from scipy.spatial import cKDTree

    tree = cKDTree(pts_b)
    d, _ = tree.query(pts_a, k=1)
    return float(np.min(d))


def _dilate(mask_idx, grid, rings):
    """Indices reachable from mask_idx by up to `rings` axis steps."""
    shape = grid.nodes_per_axis
    m = np.zeros(grid.n_nodes, dtype=bool)
    m[mask_idx] = True
    m = m.reshape(shape)
    for _ in range(rings):
        grown = m.copy()
        for ax in range(grid.dim):
            lead = [slice(None)] * grid.dim
            trail = [slice(None)] * grid.dim
            lead[ax] = slice(1, None)
            trail[ax] = slice(None, -1)
            grown[tuple(trail)] |= m[tuple(lead)]
            grown[tuple(lead)] |= m[tuple(trail)]
        m = grown
    return np.flatnonzero(m.ravel())


def build_layout(grid, omega, w1, w2=None, core=None, separation_min=None):
    """Construct a RegionLayout from region primitives.

    w2 defaults to w1 (the same window may serve both roles); core defaults
    to omega shrunk by max(2h, 12.5% of its extent).  Raises
    SeparationViolation if Omega comes closer than separation_min
    (default 4h) to either window, EmptyRegion if any mask is empty.
    """
    if w2 is None:
        w2 = w1
    h = grid.h
    if separation_min is None:
        separation_min = 4.0 * h
    if core is None:
        core = omega.shrink(max(2.0 * h, 0.125 * omega.extent()))

    pts = grid.coords()
    masks = {}
    for name, region in (("omega", omega), ("w1", w1), ("w2", w2), ("core_k", core)):
        idx = np.flatnonzero(region.contains(pts))
        if idx.size == 0:
            raise EmptyRegion(f"region {name!r} contains no grid nodes")
        masks[name] = idx

    for name in ("w1", "w2"):
        if np.intersect1d(masks["omega"], masks[name]).size:
            raise SeparationViolation(f"omega overlaps {name}")
        d = _min_distance(pts[masks["omega"]], pts[masks[name]])
        if d < separation_min - 1e-12 * h:
            raise SeparationViolation(
                f"omega and {name} are {d:.4g} apart; need >= {separation_min:.4g}"
            )

    core_idx = masks["core_k"]
    if np.setdiff1d(core_idx, masks["omega"]).size:
        raise SeparationViolation("core_k leaks outside omega")
    grown = _dilate(core_idx, grid, rings=2)
    if np.setdiff1d(grown, masks["omega"]).size:
        raise SeparationViolation("core_k margin inside omega is below 2h")

    # box must contain every region with margin >= 2h
    box_idx = np.arange(grid.n_nodes)
    shape = grid.nodes_per_axis
    for name in ("omega", "w1", "w2"):
        multi = np.unravel_index(masks[name], shape)
        for ax, m in enumerate(multi):
            if m.min() < 2 or m.max() > shape[ax] - 3:
                raise SeparationViolation(
                    f"region {name!r} closer than 2h to the box boundary"
                )

    return RegionLayout(
        grid=grid,
        omega=masks["omega"],
        w1=masks["w1"],
        w2=masks["w2"],
        core_k=core_idx,
        box=box_idx,
        regions={"omega": omega, "w1": w1, "w2": w2, "core_k": core},
    )


# -- fields -------------------------------------------------------------------


def _frozen_array(values):
    a = np.array(values, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ScalarField:
    """Real nodal values over the box; zero outside its support."""

    layout: RegionLayout
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.layout.n_nodes,):
            raise ValueError("values must have one entry per box node")
        object.__setattr__(self, "values", _frozen_array(v))

    @property
    def support(self):
        return np.flatnonzero(self.values)

    def add(self, other):
        return ScalarField(self.layout, self.values + other.values)

    def scale(self, a):
        return ScalarField(self.layout, a * self.values)

    def restrict(self, idx):
        out = np.zeros(self.layout.n_nodes)
        out[idx] = self.values[idx]
        return ScalarField(self.layout, out)

    @classmethod
    def zero(cls, layout):
        return cls(layout, np.zeros(layout.n_nodes))

    @classmethod
    def from_values_at(cls, layout, idx, vals):
        out = np.zeros(layout.n_nodes)
        out[idx] = vals
        return cls(layout, out)


@dataclass(frozen=True)
class VectorField:
    """dim real components per node; zero outside its support."""

    layout: RegionLayout
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.layout.n_nodes, self.layout.grid.dim):
            raise ValueError("values must be (n_nodes, dim)")
        object.__setattr__(self, "values", _frozen_array(v))

    @property
    def support(self):
        return np.flatnonzero(np.any(self.values != 0.0, axis=1))

    def add(self, other):
        return VectorField(self.layout, self.values + other.values)

    def scale(self, a):
        return VectorField(self.layout, a * self.values)

    def component(self, k):
        return ScalarField(self.layout, self.values[:, k].copy())

    @classmethod
    def zero(cls, layout):
        return cls(layout, np.zeros((layout.n_nodes, layout.grid.dim)))

    @classmethod
    def from_components(cls, components):
        layout = components[0].layout
        return cls(layout, np.column_stack([c.values for c in components]))


def _check_support(layout, values, region, what):
    if region is None:
        return
    mask = layout.mask(region) if isinstance(region, str) else None
    if mask is None:
        mask = np.zeros(layout.n_nodes, dtype=bool)
        mask[np.asarray(region, dtype=np.intp)] = True
    leaked = np.flatnonzero(values) if values.ndim == 1 else np.flatnonzero(
        np.any(values != 0.0, axis=1)
    )
    if np.any(~mask[leaked]):
        raise RegionOverflow(f"{what} support leaks outside the target mask")


def bump_field(layout, center, radius, amplitude=1.0, region="box"):
    """Smooth compactly supported bump: a * exp(1 - 1/(1 - |x-c|^2/r^2)).

    The profile equals `amplitude` at the center and vanishes with all
    derivatives at distance `radius`.  Raises RegionOverflow if any nonzero
    node falls outside the target mask.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = layout.coords()
    c = np.atleast_1d(np.asarray(center, dtype=float))
    r2 = np.sum((pts - c) ** 2, axis=1) / radius**2
    vals = np.zeros(layout.n_nodes)
    inside = r2 < 1.0
    vals[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    _check_support(layout, vals, region, "bump")
    return ScalarField(layout, vals)


def max_poly_degree(dim):
    """Degree cap for polynomial targets: smallest integer >= sqrt(dim+1)."""
    return math.ceil(math.sqrt(dim + 1))


def polynomial_field(layout, beta, region="omega"):
    """Monomial x^beta sampled on a region's nodes, zero elsewhere."""
    beta = tuple(int(b) for b in np.atleast_1d(beta))
    dim = layout.grid.dim
    if len(beta) != dim:
        raise ValueError(f"multi-index must have {dim} entries")
    if any(b < 0 for b in beta):
        raise ValueError("multi-index entries must be nonnegative")
    if sum(beta) > max_poly_degree(dim):
        raise DegreeTooHigh(
            f"|beta|={sum(beta)} exceeds cap {max_poly_degree(dim)} in dim {dim}"
        )
    pts = layout.coords()
    mono = np.ones(layout.n_nodes)
    for ax, b in enumerate(beta):
        if b:
            mono *= pts[:, ax] ** b
    idx = getattr(layout, region) if isinstance(region, str) else np.asarray(region)
    vals = np.zeros(layout.n_nodes)
    vals[idx] = mono[idx]
    return ScalarField(layout, vals)


def _smoothstep(t):
    """C^infinity transition: 1 for t<=0, 0 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(t < 1.0, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0)
        f1 = np.where(t > 0.0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    return f0 / (f0 + f1)


def plateau_field(layout, inner="core_k", outer="omega"):
    """Smooth cutoff chi: identically 1 on the inner mask, 0 outside the outer.

    Profile follows the normalized grid distance between the two masks, so it
    works for any region shapes.
    """
    from scipy.spatial import cKDTree

    pts = layout.coords()
    inner_idx = getattr(layout, inner) if isinstance(inner, str) else np.asarray(inner)
    outer_idx = getattr(layout, outer) if isinstance(outer, str) else np.asarray(outer)
    outside = np.setdiff1d(np.arange(layout.n_nodes), outer_idx)
    d_in = np.zeros(layout.n_nodes)
    d_out = np.full(layout.n_nodes, np.inf)
    tree_in = cKDTree(pts[inner_idx])
    d_in, _ = tree_in.query(pts, k=1)
    if outside.size:
        tree_out = cKDTree(pts[outside])
        d_out, _ = tree_out.query(pts, k=1)
    vals = _smoothstep(d_in / np.maximum(d_in + d_out, 1e-300))
    vals[inner_idx] = 1.0
    vals[outside] = 0.0
    return ScalarField(layout, vals)


def field_to_csv_rows(f):
    """Rows (coords..., value[s]) for CSV export."""
    pts = f.layout.coords()
    vals = f.values if f.values.ndim == 2 else f.values[:, None]
    return np.column_stack([pts, vals])
