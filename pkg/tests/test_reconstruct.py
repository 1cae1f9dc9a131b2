import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdrift.domain import ScalarField, bump_field
from fracdrift.errors import EmptyAdmissibleSet
from fracdrift.reconstruct import (
    MeasurementSet,
    _finalize_measurements,
    _measurements_from_data,
    basis_controls,
    det_h,
    generate_measurements,
    k_of_n,
    multi_indices,
    n0_count,
    perturb_measurements,
    recover_interior_field,
    recover_pointwise,
    vanishing_order_check,
)
from fracdrift.solver import solve_forward


def test_k_of_n_values():
    # n=1 uses quadratic perturbations, so k(1) = 2
    assert k_of_n(1) == 2
    assert k_of_n(2) == 2
    assert k_of_n(3) == 2
    assert k_of_n(8) == 3
    with pytest.raises(ValueError):
        k_of_n(0)


def test_n0_count_values():
    # n=1: N0 = 3 and the full parameter count is N = 2*N0 = 6
    assert n0_count(1) == 3
    assert 2 * n0_count(1) == 6
    assert n0_count(2) == 6
    assert n0_count(3) == 10


def test_multi_indices_match_count():
    for n in (1, 2, 3):
        assert len(multi_indices(n, k_of_n(n))) == n0_count(n)


def coordinate_tuple(layout):
    dim = layout.grid.dim
    fields = []
    pts = layout.coords()
    for ax in range(dim):
        fields.append(ScalarField(layout, pts[:, ax].copy()))
    fields.append(ScalarField(layout, np.ones(layout.n_nodes)))
    return fields


def test_det_of_coordinate_tuple_is_one(layout_1d, layout_2d):
    for layout in (layout_1d, layout_2d):
        h = det_h(coordinate_tuple(layout), layout=layout)
        np.testing.assert_allclose(h.values[layout.omega], 1.0, atol=1e-12)


def test_det_zero_row(layout_1d):
    fields = coordinate_tuple(layout_1d)
    fields[0] = ScalarField.zero(layout_1d)
    h = det_h(fields, layout=layout_1d)
    assert np.all(h.values == 0.0)


def test_det_matches_wronskian_1d(layout_1d, op_1d, zero_coeffs_1d):
    from fracdrift.solver import gradient

    f1 = bump_field(layout_1d, 2.5, 0.5, region="w1")
    f2 = bump_field(layout_1d, -2.3, 0.6, region="w1")
    u1 = solve_forward(op_1d, zero_coeffs_1d, f1).u
    u2 = solve_forward(op_1d, zero_coeffs_1d, f2).u
    h = det_h([u1, u2], layout=layout_1d)
    g1 = gradient(u1, layout_1d).values[:, 0]
    g2 = gradient(u2, layout_1d).values[:, 0]
    wronski = g1 * u2.values - u1.values * g2
    omega = layout_1d.omega
    np.testing.assert_allclose(h.values[omega], wronski[omega],
                               rtol=0, atol=1e-14 * np.max(np.abs(wronski)))


@settings(max_examples=20, deadline=None)
@given(gamma=st.floats(0.1, 10.0))
def test_det_multilinearity(layout_1d, gamma):
    fields = coordinate_tuple(layout_1d)
    h0 = det_h(fields, layout=layout_1d).values
    fields[0] = fields[0].scale(gamma)
    h1 = det_h(fields, layout=layout_1d).values
    np.testing.assert_allclose(h1, gamma * h0, rtol=1e-12, atol=1e-300)


def test_vanishing_order_trivial_cases(layout_1d):
    one = ScalarField(layout_1d, np.ones(layout_1d.n_nodes))
    rep = vanishing_order_check(one, 1)
    assert rep.excluded_fraction == 0.0
    assert rep.max_order == 0

    zero = ScalarField.zero(layout_1d)
    rep0 = vanishing_order_check(zero, 1)
    assert rep0.excluded_fraction == 1.0


def test_vanishing_order_linear_field(layout_1d):
    # h(x) = x: excluded exactly where |x| < tau * median(|x| over core)
    tau = 1e-3
    core = layout_1d.core_k
    x = layout_1d.coords()[:, 0]
    h = ScalarField(layout_1d, x.copy())
    rep = vanishing_order_check(h, 1, tau_det=tau)
    expected_excluded = np.abs(x[core]) < tau * (np.median(np.abs(x[core])))
    np.testing.assert_array_equal(~rep.admissible, expected_excluded)


def test_admissibility_invariant_under_common_rescaling(op_1d, zero_coeffs_1d,
                                                        layout_1d):
    f1 = bump_field(layout_1d, 2.5, 0.5, region="w1")
    f2 = bump_field(layout_1d, -2.3, 0.6, region="w1")
    u1 = solve_forward(op_1d, zero_coeffs_1d, f1).u
    u2 = solve_forward(op_1d, zero_coeffs_1d, f2).u
    base = _finalize_measurements(op_1d, layout_1d, (f1, f2), (u1, u2), 1e-3)
    gamma = 7.3
    scaled = _finalize_measurements(
        op_1d, layout_1d,
        (f1.scale(gamma), f2.scale(gamma)),
        (u1.scale(gamma), u2.scale(gamma)), 1e-3)
    np.testing.assert_array_equal(base.report.admissible,
                                  scaled.report.admissible)


def test_generate_measurements_pipeline(op_1d, zero_coeffs_1d, layout_1d):
    mset = generate_measurements(op_1d, zero_coeffs_1d, layout_1d, eps=0.05)
    assert mset.report.excluded_fraction <= 0.05
    # exterior data live on the window
    for f in mset.exterior_data:
        assert np.setdiff1d(f.support, layout_1d.w1).size == 0
    # solutions are genuine forward solves of the returned data
    u0 = solve_forward(op_1d, zero_coeffs_1d, mset.exterior_data[0]).u
    np.testing.assert_array_equal(mset.solutions[0].values, u0.values)
    with pytest.raises(ValueError):
        generate_measurements(op_1d, zero_coeffs_1d, layout_1d, eps=0.7)


def test_generate_measurements_oracle_mode(op_1d, zero_coeffs_1d, layout_1d):
    mset = generate_measurements(op_1d, zero_coeffs_1d, layout_1d,
                                 use_targets_directly=True)
    core = layout_1d.core_k
    # on the core the targets are exactly (x, 1), so h is exactly 1
    np.testing.assert_allclose(mset.det_field.values[core], 1.0, atol=1e-12)
    assert mset.report.excluded_fraction == 0.0


def test_perturbation_continuity_and_support(op_1d, zero_coeffs_1d, layout_1d):
    mset = generate_measurements(op_1d, zero_coeffs_1d, layout_1d, eps=0.05)
    controls = basis_controls(op_1d, zero_coeffs_1d, layout_1d, eps=0.1)
    core = layout_1d.core_k
    scale = np.max(np.abs(mset.det_field.values[core]))
    sups = {}
    for mag in (1e-3, 1e-6):
        pert = perturb_measurements(mset, op_1d, zero_coeffs_1d, layout_1d,
                                    magnitude=mag, seed=42, controls=controls)
        sups[mag] = np.max(np.abs(pert.det_field.values[core]
                                  - mset.det_field.values[core]))
        for f in pert.exterior_data:
            assert np.setdiff1d(f.support, layout_1d.w1).size == 0
    # sup-difference scales linearly with the magnitude (same draw direction)
    assert sups[1e-6] <= 1e-2 * scale
    assert sups[1e-6] == pytest.approx(1e-3 * sups[1e-3], rel=1e-3)


def test_adversarial_duplicate_fully_excluded(op_1d, zero_coeffs_1d, layout_1d):
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    mset = _measurements_from_data(op_1d, zero_coeffs_1d, layout_1d, (f, f), 1e-3)
    assert mset.report.excluded_fraction == 1.0


def test_loose_eps_reports_rather_than_errors(op_1d, zero_coeffs_1d, layout_1d):
    # a sloppy approximation level may exclude nodes; that is a report,
    # not an exception
    mset = generate_measurements(op_1d, zero_coeffs_1d, layout_1d, eps=0.4)
    assert 0.0 <= mset.report.excluded_fraction <= 1.0


def test_recover_zero_coefficients(op_1d, zero_coeffs_1d, layout_1d):
    mset = generate_measurements(op_1d, zero_coeffs_1d, layout_1d, eps=0.05)
    res = recover_pointwise(mset, op_1d, truth=zero_coeffs_1d)
    core = layout_1d.core_k
    assert np.max(np.abs(res.b_hat.values[core])) <= 1e-8
    assert np.max(np.abs(res.c_hat.values[core])) <= 1e-8


def test_recover_planted_coefficients(op_1d, coeffs_1d, layout_1d):
    mset = generate_measurements(op_1d, coeffs_1d, layout_1d, eps=0.05)
    res = recover_pointwise(mset, op_1d, truth=coeffs_1d)
    assert res.errors["b_rel"] <= 0.05
    assert res.errors["c_rel"] <= 0.05
    assert res.solved.size + res.filled.size == layout_1d.core_k.size


def test_recovery_reproduces_equation_action(op_1d, coeffs_1d, layout_1d):
    # recovered coefficients reproduce the drift/potential action on the
    # measurement solutions (residual check at admissible nodes)
    mset = generate_measurements(op_1d, coeffs_1d, layout_1d, eps=0.05)
    res = recover_pointwise(mset, op_1d)
    from fracdrift.solver import gradient

    for u, rhs in zip(mset.solutions, mset.rhs_fields):
        g = gradient(u, layout_1d).values
        action = (np.sum(res.b_hat.values * g, axis=1)
                  + res.c_hat.values * u.values)
        resid = action[res.solved] + rhs.values[res.solved]
        assert np.max(np.abs(resid)) <= 1e-7 * max(np.max(np.abs(rhs.values)), 1.0)


def test_recovery_invariant_under_measurement_permutation(op_1d, coeffs_1d,
                                                          layout_1d):
    mset = generate_measurements(op_1d, coeffs_1d, layout_1d, eps=0.05)
    flipped = _finalize_measurements(op_1d, layout_1d,
                                     mset.exterior_data[::-1],
                                     mset.solutions[::-1], mset.tau_det)
    a = recover_pointwise(mset, op_1d)
    b = recover_pointwise(flipped, op_1d)
    core = layout_1d.core_k
    scale = max(np.max(np.abs(a.c_hat.values[core])), 1e-30)
    assert np.max(np.abs(a.c_hat.values[core] - b.c_hat.values[core])) <= 1e-12 * scale
    assert np.max(np.abs(a.b_hat.values[core] - b.b_hat.values[core])) <= 1e-12


def test_empty_admissible_raises(op_1d, zero_coeffs_1d, layout_1d):
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    mset = _measurements_from_data(op_1d, zero_coeffs_1d, layout_1d, (f, f), 1e-3)
    with pytest.raises(EmptyAdmissibleSet):
        recover_pointwise(mset, op_1d)


def test_singular_admissible_node_downgraded(op_1d, zero_coeffs_1d, layout_1d):
    # force the report to claim admissibility on a duplicated (singular)
    # tuple: the exactly singular nodes must be downgraded with a warning
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    u = solve_forward(op_1d, zero_coeffs_1d, f).u
    mset = _measurements_from_data(op_1d, zero_coeffs_1d, layout_1d, (f, f), 1e-3)
    doctored = vanishing_order_check(
        ScalarField(layout_1d, np.ones(layout_1d.n_nodes)), 1)
    forged = MeasurementSet(
        layout=layout_1d, exterior_data=(f, f), solutions=(u, u),
        det_field=mset.det_field, rhs_fields=mset.rhs_fields,
        report=doctored, tau_det=1e-3)
    with pytest.warns(UserWarning):
        res = recover_pointwise(forged, op_1d)
    assert res.filled.size > 0
    assert res.solved.size + res.filled.size == layout_1d.core_k.size


def test_interior_recovery_consistency(op_1d, zero_coeffs_1d, layout_1d):
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    ustar = solve_forward(op_1d, zero_coeffs_1d, f).u
    dn = op_1d.apply(ustar).values[layout_1d.w2]
    h = layout_1d.grid.h
    errs = []
    for lam in (1e-2, 1e-4, 1e-6):
        u = recover_interior_field(op_1d, f, dn, lam)
        errs.append(np.sqrt(h) * np.linalg.norm(
            (u.values - ustar.values)[layout_1d.omega]))
    assert all(errs[i + 1] <= errs[i] * (1 + 1e-6) + 1e-12 for i in range(2))

    zero = ScalarField.zero(layout_1d)
    u0 = recover_interior_field(op_1d, zero, np.zeros(layout_1d.w2.size), 1e-4)
    assert np.max(np.abs(u0.values)) <= 1e-12


def test_interior_recovery_noise_u_curve(op_1d, coeffs_1d, layout_1d):
    f = bump_field(layout_1d, 2.5, 0.5, region="w1")
    ustar = solve_forward(op_1d, coeffs_1d, f).u
    dn = op_1d.apply(ustar).values[layout_1d.w2]
    rng = np.random.default_rng(3)
    noisy = dn + 0.01 * np.linalg.norm(dn) / np.sqrt(dn.size) \
        * rng.standard_normal(dn.size)
    h = layout_1d.grid.h
    lams = np.geomspace(1e-10, 1e2, 13)
    errs = [np.sqrt(h) * np.linalg.norm(
        (recover_interior_field(op_1d, f, noisy, lam).values
         - ustar.values)[layout_1d.omega]) for lam in lams]
    imin = int(np.argmin(errs))
    assert 0 < imin < len(lams) - 1

    with pytest.raises(ValueError):
        recover_interior_field(op_1d, f, dn, 0.0)


def test_full_pipeline_2d(op_2d, layout_2d):
    # the recovery machinery is dimension-generic: three measurements,
    # quadratic perturbation basis of size N0 = 6, pointwise 3x3 systems
    from fracdrift.domain import VectorField
    from fracdrift.solver import Coefficients

    bx = bump_field(layout_2d, (0.0, 0.1), 0.3, 0.25, region="core_k")
    by = bump_field(layout_2d, (0.1, -0.1), 0.3, -0.2, region="core_k")
    c = bump_field(layout_2d, (-0.1, 0.0), 0.35, 0.4, region="core_k")
    coeffs = Coefficients(VectorField.from_components([bx, by]), c)

    mset = generate_measurements(op_2d, coeffs, layout_2d, eps=0.05)
    assert len(mset.exterior_data) == 3
    assert mset.report.excluded_fraction <= 0.05
    res = recover_pointwise(mset, op_2d, truth=coeffs)
    assert res.errors["b_rel"] <= 0.05
    assert res.errors["c_rel"] <= 0.05

    controls = basis_controls(op_2d, coeffs, layout_2d, eps=0.1)
    assert len(controls) == n0_count(2)
    pert = perturb_measurements(mset, op_2d, coeffs, layout_2d, 0.01,
                                seed=3, controls=controls)
    res2 = recover_pointwise(pert, op_2d, truth=coeffs)
    assert res2.errors["b_rel"] <= 0.05
    assert res2.errors["c_rel"] <= 0.05


def test_n0_count_matches_sum_form():
    # number of perturbation monomials as a degree-by-degree sum
    import math

    for n in (1, 2, 3, 4):
        k = k_of_n(n)
        total = sum(math.comb(n + j - 1, j) for j in range(k + 1))
        assert total == n0_count(n)
