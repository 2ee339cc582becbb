import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from swirlframe import fields as F
from swirlframe.errors import DomainError
from swirlframe.fields import CallableField, InflowProfile, r_sym, t_sym, z_sym

from conftest import catalog_incompressible

CATALOG = catalog_incompressible()


def random_points(rng, field, n, r_lo=0.05):
    r = rng.uniform(r_lo, 0.95, n) * field.r_max
    z = rng.uniform(-2.0, 2.0, n)
    t = rng.uniform(0.0, 1.0, n)
    return zip(r, z, t)


# -- evaluation and catalog ---------------------------------------------------------


def test_poiseuille_centerline_and_wall():
    f = F.poiseuille_field(4, 1, 1, 1)
    np.testing.assert_allclose(F.eval_field(f, 0.0, 0.0, 0.0), [0, 0, 1])
    np.testing.assert_allclose(F.eval_field(f, 1.0, 0.0, 0.0), [0, 0, 0], atol=1e-15)


def test_poiseuille_scaling():
    assert F.poiseuille_field(8, 2, 1, 1).velocity(0.0, 0.0, 0.0)[2] == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [dict(p_s=-1, nu=1, ell=1), dict(p_s=1, nu=0, ell=1)])
def test_poiseuille_rejects_nonpositive_parameters(bad):
    with pytest.raises(DomainError):
        F.poiseuille_field(**bad)


def test_rigid_swirl_pulsatile_point_value():
    f = F.rigid_swirl_pulsatile_field(1.0, "1 + t")
    np.testing.assert_allclose(F.eval_field(f, 0.5, 0.0, 1.0), [0, 0.5, 2])


def test_eval_outside_domain_names_the_bound():
    f = F.poiseuille_field(4, 1, 1, 1)
    with pytest.raises(DomainError, match="r_max"):
        F.eval_field(f, 1.5, 0.0, 0.0)
    with pytest.raises(DomainError, match="axis"):
        F.eval_field(f, -0.1, 0.0, 0.0)


@pytest.mark.parametrize("args, alpha", [((1, 4, 1), 2.0), ((2, 9, 4), 3.0)])
def test_womersley_number(args, alpha):
    assert F.womersley_number(*args) == pytest.approx(alpha)


def test_womersley_number_homogeneous_in_radius():
    assert F.womersley_number(2.0, 3.0, 0.7) == pytest.approx(2 * F.womersley_number(1.0, 3.0, 0.7))


def test_stream_function_uniform_profile():
    f = F.stream_function_field(r_sym**2 * (1 + t_sym) / 2)
    np.testing.assert_allclose(f.velocity(0.3, 0.2, 0.5), [0, 0, 1.5], atol=1e-15)


def test_nozzle_velocity_matches_symbolic_differentiation():
    f = F.nozzle_field("1 + t**2")
    a = 1 + (1 + sp.tanh(z_sym)) / 4
    g = 1 + t_sym**2
    vz = sp.lambdify((r_sym, z_sym, t_sym), g * a)
    vr = sp.lambdify((r_sym, z_sym, t_sym), -g * r_sym * sp.diff(a, z_sym) / 2)
    for r, z, t in [(0.2, -1.0, 0.1), (0.6, 0.0, 0.7), (0.9, 1.5, 1.0)]:
        v = f.velocity(r, z, t)
        assert v[2] == pytest.approx(vz(r, z, t), rel=1e-14)
        assert v[0] == pytest.approx(vr(r, z, t), rel=1e-14)


def test_callable_stream_function_matches_symbolic():
    sym = F.nozzle_field(1.0)
    call = F.stream_function_field(lambda r, z, t: r * r * (1 + (1 + math.tanh(z)) / 4) / 2)
    for r, z in [(0.3, 0.1), (0.7, -0.5)]:
        np.testing.assert_allclose(call.velocity(r, z, 0.0), sym.velocity(r, z, 0.0), rtol=1e-7, atol=1e-9)


def test_inflow_profile_quadratic_derivatives():
    g = InflowProfile.quadratic(1.0, 2.0, 6.0)
    assert (g(0.0), g.d1(0.0), g.d2(0.0)) == (1.0, 2.0, 6.0)
    assert g.variation_timescale(0.0) == pytest.approx(0.408248290463863)


def test_inflow_profile_positivity_check():
    with pytest.raises(DomainError):
        InflowProfile("1 - t").check_positive([0.0, 2.0])


# -- divergence and acceleration ----------------------------------------------------


def test_divergence_examples():
    assert F.divergence(F.poiseuille_field(4, 1, 1, 1), 0.5, 0.0, 0.0) == 0.0
    assert F.divergence(F.radial_expansion_field(1.0), 0.5, 0.0, 0.0) == pytest.approx(2.0)
    # axis limit 2 d_r v_r + d_z v_z
    assert F.divergence(F.radial_expansion_field(1.0), 0.0, 0.0, 0.0) == pytest.approx(2.0)


def test_nozzle_divergence_free(nozzle, rng):
    for r, z, t in random_points(rng, nozzle, 50):
        assert abs(F.divergence(nozzle, r, z, t)) < 1e-10


def test_material_acceleration_examples():
    rot = F.rigid_rotation_axial_field(2.0, 0.0)
    np.testing.assert_allclose(F.material_acceleration(rot, 0.5, 0.0, 0.0), [-2.0, 0.0, 0.0], atol=1e-15)
    uni = F.uniform_field("1 + t**2")
    np.testing.assert_allclose(F.material_acceleration(uni, 0.3, 0.0, 0.5), [0.0, 0.0, 1.0])
    poi = F.poiseuille_field(4, 1, 1, 1)
    np.testing.assert_allclose(F.material_acceleration(poi, 0.3, 0.0, 0.0), [0.0, 0.0, 0.0])


def test_certification_examples(rigid_swirl):
    rep = F.pressure_gradient_certify(rigid_swirl, F.default_sample_grid(rigid_swirl))
    assert rep.exact_euler and rep.max_curl < 1e-12
    uni = F.uniform_field(2.0)
    assert F.pressure_gradient_certify(uni, F.default_sample_grid(uni)).exact_euler


def test_certification_fails_for_sheared_swirl():
    f = F.sheared_swirl_field(1.0, 0.5, 1.0)
    rep = F.pressure_gradient_certify(f, F.default_sample_grid(f))
    assert not rep.exact_euler
    # a_theta = v_z r omega'(z) with omega = 1 + 0.5 tanh z
    r, z = 0.5, 0.3
    expected = 1.0 * r * 0.5 / math.cosh(z) ** 2
    assert F.material_acceleration(f, r, z, 0.0)[1] == pytest.approx(expected)


# -- invariants ---------------------------------------------------------------------


@pytest.mark.parametrize("name, field", CATALOG, ids=[c[0] for c in CATALOG])
def test_catalog_divergence_free_at_random_points(name, field, rng):
    worst = max(abs(F.divergence(field, r, z, t)) for r, z, t in random_points(rng, field, 1000))
    assert worst < 1e-10


@pytest.mark.parametrize("name, field", [c for c in CATALOG if c[1].side_wall], ids=[c[0] for c in CATALOG if c[1].side_wall])
def test_no_penetration_on_side_wall(name, field, rng):
    for z, t in zip(rng.uniform(-2, 2, 10), rng.uniform(0, 1, 10)):
        assert field.velocity(field.r_max, z, t)[0] == 0.0


@pytest.mark.parametrize("name, field", [c for c in CATALOG if c[1].pressure_gradient], ids=[c[0] for c in CATALOG if c[1].pressure_gradient])
def test_acceleration_equals_minus_pressure_gradient(name, field, rng):
    for r, z, t in random_points(rng, field, 20, r_lo=0.1):
        a = F.material_acceleration(field, r, z, t)
        p_r, p_z = field.pressure_gradient(r, z, t)
        scale = max(np.max(np.abs(a)), 1e-300)
        assert abs(a[0] + p_r) <= 1e-10 * scale
        assert abs(a[1]) <= 1e-10 * scale
        assert abs(a[2] + p_z) <= 1e-10 * scale


def test_finite_difference_closure_matches_analytic(nozzle, rng):
    funcs = [sp.lambdify((r_sym, z_sym, t_sym), e) for e in nozzle.exprs]
    fd = CallableField(*funcs, name="fd_nozzle", side_wall=False)
    keys = [(c, i, j, k) for c in (0, 2) for (i, j, k) in
            ((1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0), (0, 2, 0), (1, 1, 0))]
    for r, z, t in random_points(rng, nozzle, 10, r_lo=0.2):
        exact = nozzle.partials(keys, r, z, t)
        approx = fd.partials(keys, r, z, t)
        scale = np.maximum(np.abs(exact), 1.0)
        assert np.max(np.abs(approx - exact) / scale) < 1e-6


def test_fd_closure_second_order_against_centered_differences(nozzle):
    # derivative evaluators agree with centered FD of the components to O(h^2)
    r, z, t = 0.4, 0.3, 0.2
    exact = nozzle.partial(2, 0, 1, 0, r, z, t)
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (nozzle.partial(2, 0, 0, 0, r, z + h, t) - nozzle.partial(2, 0, 0, 0, r, z - h, t)) / (2 * h)
        errs.append(abs(fd - exact))
    slope = math.log2(errs[0] / errs[1])
    assert 1.8 < slope < 2.2


def test_axis_parity_regularization(rigid_swirl):
    # v_theta is odd: below r_min it scales linearly to zero on the axis
    assert rigid_swirl.velocity(0.0, 0.0, 0.0)[1] == 0.0
    assert rigid_swirl.velocity(5e-9, 0.0, 0.0)[1] == pytest.approx(5e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(-3, 3), st.floats(0, 2), st.floats(0.2, 3))
def test_rigid_swirl_acceleration_closed_form(r, z, t, omega):
    f = F.rigid_swirl_pulsatile_field(omega, "1 + t**2", r_max=2.0)
    a = F.material_acceleration(f, r, z, t)
    np.testing.assert_allclose(a, [-omega**2 * r, 0.0, 2 * t], rtol=1e-13, atol=1e-14)
