"""Shared fixtures: standard 1D/2D layouts, operators, planted coefficients."""

import pytest

from fracdrift.domain import (
    Annulus,
    Ball,
    GridSpec,
    Interval,
    VectorField,
    build_layout,
    bump_field,
)
from fracdrift.fraclap import assemble_fraclap
from fracdrift.solver import Coefficients


@pytest.fixture(scope="session")
def layout_1d():
    """1D workhorse: Omega=(-1,1), two-sided window 1.5<|x|<3.6, K=(-0.4,0.4)."""
    grid = GridSpec(1, (-4.0,), (4.0,), 1 / 64)
    return build_layout(
        grid, Interval(-1.0, 1.0), Annulus((0.0,), 1.5, 3.6),
        core=Interval(-0.4, 0.4),
    )


@pytest.fixture(scope="session")
def op_1d(layout_1d):
    return assemble_fraclap(layout_1d, 0.75)


@pytest.fixture(scope="session")
def coeffs_1d(layout_1d):
    b = bump_field(layout_1d, 0.0, 0.3, 0.3, region="core_k")
    c = bump_field(layout_1d, 0.05, 0.3, 0.5, region="core_k")
    return Coefficients(VectorField.from_components([b]), c)


@pytest.fixture(scope="session")
def zero_coeffs_1d(layout_1d):
    return Coefficients.zero(layout_1d)


@pytest.fixture(scope="session")
def layout_2d():
    """Small 2D layout: unit-disk Omega inside [-2,2]^2 with an annular window."""
    grid = GridSpec(2, (-2.0, -2.0), (2.0, 2.0), 1 / 8)
    return build_layout(
        grid, Ball((0.0, 0.0), 1.0), Annulus((0.0, 0.0), 1.25, 1.7),
        core=Ball((0.0, 0.0), 0.5), separation_min=0.25,
    )


@pytest.fixture(scope="session")
def op_2d(layout_2d):
    return assemble_fraclap(layout_2d, 0.6)


def random_bump_params(rng, lo=-0.25, hi=0.25, rlo=0.5, rhi=0.9):
    return (rng.uniform(lo, hi), rng.uniform(rlo, rhi), rng.uniform(0.5, 2.0))
