import json

import numpy as np
import pytest
from scipy.linalg import svdvals

from fracdrift.domain import ScalarField, VectorField, bump_field
from fracdrift.dnmap import (
    alessandrini_residual,
    dn_apply,
    dn_matrix,
    dn_to_csv,
    operator_norm_star,
)
from fracdrift.fraclap import build_sobolev_metric
from fracdrift.solver import Coefficients


def random_core_coeffs(layout, rng, b_amp=0.3, c_amp=0.5):
    b = bump_field(layout, rng.uniform(-0.1, 0.1), rng.uniform(0.2, 0.28),
                   b_amp * rng.uniform(0.5, 1.5), region="core_k")
    c = bump_field(layout, rng.uniform(-0.1, 0.1), rng.uniform(0.2, 0.28),
                   c_amp * rng.uniform(0.5, 1.5), region="core_k")
    return Coefficients(VectorField.from_components([b]), c)


def test_dn_apply_zero_and_linearity(op_1d, layout_1d, coeffs_1d):
    z = ScalarField.zero(layout_1d)
    assert np.all(dn_apply(op_1d, coeffs_1d, z).values == 0.0)

    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    one = dn_apply(op_1d, coeffs_1d, f).values
    two = dn_apply(op_1d, coeffs_1d, f.scale(2.0)).values
    assert np.linalg.norm(two - 2 * one) <= 1e-12 * np.linalg.norm(two)


def test_dn_apply_nonzero_finite(op_1d, layout_1d, zero_coeffs_1d):
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    out = dn_apply(op_1d, zero_coeffs_1d, f)
    assert np.all(np.isfinite(out.values))
    assert np.max(np.abs(out.values[layout_1d.w2])) > 0


def test_dn_apply_support_validation(op_1d, layout_1d, zero_coeffs_1d):
    f = bump_field(layout_1d, 0.0, 0.3)
    with pytest.raises(ValueError):
        dn_apply(op_1d, zero_coeffs_1d, f)


def test_columns_match_dn_apply(op_1d, layout_1d, coeffs_1d):
    dnm = dn_matrix(op_1d, coeffs_1d)
    for j in (0, layout_1d.w1.size // 2, layout_1d.w1.size - 1):
        basis = ScalarField.from_values_at(layout_1d, [layout_1d.w1[j]], [1.0])
        col = dn_apply(op_1d, coeffs_1d, basis).values[layout_1d.w2]
        np.testing.assert_array_equal(dnm.map[:, j], col)


def test_duality_symmetric_case(op_1d, layout_1d):
    cvals = np.zeros(layout_1d.n_nodes)
    cvals[layout_1d.omega] = 0.4
    coeffs = Coefficients(VectorField.zero(layout_1d),
                          ScalarField(layout_1d, cvals))
    dnm = dn_matrix(op_1d, coeffs)
    err = np.max(np.abs(dnm.map - dnm.adjoint_map.T))
    assert err <= 1e-12 * np.max(np.abs(dnm.map))


def test_duality_with_drift(op_1d, layout_1d):
    rng = np.random.default_rng(11)
    coeffs = random_core_coeffs(layout_1d, rng)
    dnm = dn_matrix(op_1d, coeffs)
    err = np.max(np.abs(dnm.map - dnm.adjoint_map.T))
    assert err <= 1e-10 * np.max(np.abs(dnm.map))


def test_alessandrini_identical_pairs(op_1d, layout_1d, coeffs_1d):
    f1 = bump_field(layout_1d, 2.5, 0.5, region="w1")
    f2 = bump_field(layout_1d, -2.3, 0.5, region="w2")
    res = alessandrini_residual(op_1d, coeffs_1d, coeffs_1d, f1, f2)
    assert res <= 1e-12


def test_alessandrini_potential_difference(op_1d, layout_1d):
    dc = bump_field(layout_1d, 0.0, 0.3, 0.5, region="core_k")
    c1 = Coefficients(VectorField.zero(layout_1d), dc)
    c2 = Coefficients.zero(layout_1d)
    f1 = bump_field(layout_1d, 2.5, 0.5, region="w1")
    f2 = bump_field(layout_1d, -2.3, 0.5, region="w2")
    assert alessandrini_residual(op_1d, c1, c2, f1, f2) <= 1e-10


def test_alessandrini_random_pairs(op_1d, layout_1d):
    rng = np.random.default_rng(13)
    for _ in range(3):
        c1 = random_core_coeffs(layout_1d, rng)
        c2 = random_core_coeffs(layout_1d, rng)
        f1 = bump_field(layout_1d, rng.uniform(2.0, 3.0), 0.4, region="w1")
        f2 = bump_field(layout_1d, rng.uniform(-3.0, -2.0), 0.4, region="w2")
        assert alessandrini_residual(op_1d, c1, c2, f1, f2) <= 1e-10


def test_operator_norm_star_properties(op_1d, layout_1d):
    s = op_1d.s
    m1 = build_sobolev_metric(layout_1d, s, "w1")
    m2 = build_sobolev_metric(layout_1d, s, "w2")
    zero = np.zeros((layout_1d.w2.size, layout_1d.w1.size))
    assert operator_norm_star(zero, m1, m2) == 0.0

    rng = np.random.default_rng(17)
    delta = rng.standard_normal(zero.shape)
    # identity Grams (order 0): the exact largest raw singular value
    i1 = build_sobolev_metric(layout_1d, 0.0, "w1")
    i2 = build_sobolev_metric(layout_1d, 0.0, "w2")
    raw = operator_norm_star(delta, i1, i2)
    assert raw == pytest.approx(svdvals(delta)[0], rel=1e-12)

    # invariance of singular values under orthonormal re-basing
    q1, _ = np.linalg.qr(rng.standard_normal((zero.shape[1],) * 2))
    q2, _ = np.linalg.qr(rng.standard_normal((zero.shape[0],) * 2))
    a = svdvals(q2.T @ delta @ q1)[0]
    assert a == pytest.approx(svdvals(delta)[0], rel=1e-12)


def test_gauge_freeness_probe(op_1d, layout_1d, coeffs_1d, zero_coeffs_1d):
    # separated coefficient pairs must produce a strictly positive DN gap
    dn1 = dn_matrix(op_1d, coeffs_1d)
    dn2 = dn_matrix(op_1d, zero_coeffs_1d)
    s = op_1d.s
    m1 = build_sobolev_metric(layout_1d, s, "w1")
    m2 = build_sobolev_metric(layout_1d, s, "w2")
    gap = operator_norm_star(dn1.map - dn2.map, m1, m2)
    assert gap > 1e3 * np.finfo(float).eps * svdvals(dn1.map)[0]


def test_dn_csv_export(tmp_path, op_1d, layout_1d, coeffs_1d):
    dnm = dn_matrix(op_1d, coeffs_1d)
    path = tmp_path / "dn.csv"
    sidecar = dn_to_csv(dnm, path, meta={"coefficient_hash": "abc"})
    loaded = np.loadtxt(path, delimiter=",")
    np.testing.assert_allclose(loaded, dnm.map, rtol=0, atol=0)
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    assert meta["s"] == 0.75 and meta["coefficient_hash"] == "abc"
    assert meta["h"] == layout_1d.grid.h


def test_2d_duality_and_alessandrini(op_2d, layout_2d):
    from fracdrift.domain import VectorField

    bx = bump_field(layout_2d, (0.0, 0.1), 0.3, 0.25, region="core_k")
    by = bump_field(layout_2d, (0.1, -0.1), 0.3, -0.2, region="core_k")
    c = bump_field(layout_2d, (-0.1, 0.0), 0.35, 0.4, region="core_k")
    coeffs = Coefficients(VectorField.from_components([bx, by]), c)
    dnm = dn_matrix(op_2d, coeffs)
    dual = np.max(np.abs(dnm.map - dnm.adjoint_map.T)) / np.max(np.abs(dnm.map))
    assert dual <= 1e-10

    f1 = bump_field(layout_2d, (1.45, 0.0), 0.18, region="w1")
    f2 = bump_field(layout_2d, (-1.45, 0.0), 0.18, region="w2")
    res = alessandrini_residual(op_2d, coeffs, Coefficients.zero(layout_2d),
                                f1, f2)
    assert res <= 1e-10


def test_threaded_columns_match_serial(op_1d, layout_1d, coeffs_1d):
    serial = dn_matrix(op_1d, coeffs_1d, threads=1)
    threaded = dn_matrix(op_1d, coeffs_1d, threads=4)
    np.testing.assert_array_equal(serial.map, threaded.map)
    np.testing.assert_array_equal(serial.adjoint_map, threaded.adjoint_map)
