import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from planar_friction import P0, P1, ReducedModel, ScalingMatrices, ellipsoid_wrench
from planar_friction.reduced import (
    reduced_rate_ellipsoid,
    reduced_rate_ls,
    reduced_rate_ls_elastoplastic,
    reduced_wrench,
)


def models(grid, table, params):
    s = ScalingMatrices.from_grid(grid)
    return {
        "ellipsoid": ReducedModel(s, params, "ellipsoid"),
        "ls": ReducedModel(s, params, "ls", table),
    }


def numpy_rate(mode, z, twist, grid, table, params):
    s = ScalingMatrices.from_grid(grid)
    if mode == "ellipsoid":
        return reduced_rate_ellipsoid(z, twist, s, params)
    if params.elasto_plastic:
        return reduced_rate_ls_elastoplastic(z, twist, s, table, grid.r, params)
    return reduced_rate_ls(z, twist, s, table, grid.r, params)


def test_scaling_matrices():
    s = ScalingMatrices(0.5, 0.2)
    assert np.array_equal(s.S, np.diag([1.0, 1.0, 0.5]))
    assert np.array_equal(s.U, np.diag([1.0, 1.0, 0.2]))
    assert np.array_equal(s.scale((1.0, 2.0, 4.0)), [1.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        ScalingMatrices(0.0, 1.0)


def test_ellipsoid_wrench_examples():
    assert ellipsoid_wrench((2.0, 0.0, 0.0), 0.01, 1.0, 3.0) == pytest.approx((-3.0, 0.0, 0.0))
    assert ellipsoid_wrench((0.0, 0.0, 5.0), 0.01, 1.0, 3.0) == pytest.approx((0.0, 0.0, -0.03))
    assert ellipsoid_wrench((0.0, 0.0, 0.0), 0.01, 1.0, 3.0) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        ellipsoid_wrench((1, 0, 0), 0.01, 1.0, -1.0)


@given(vx=st.floats(-1, 1), vy=st.floats(-1, 1), om=st.floats(-100, 100))
def test_ellipsoid_wrench_lies_on_the_ellipsoid(vx, vy, om):
    r = 0.01
    # squared norms must not underflow
    assume(math.hypot(vx, vy, r * om) > 1e-150)
    f = ellipsoid_wrench((vx, vy, om), r, 1.0, 2.0)
    assert math.hypot(f.fx, f.fy, f.tau / r) == pytest.approx(2.0, rel=1e-12)
    assert f.fx * vx + f.fy * vy + f.tau * om <= 0.0


@pytest.mark.parametrize("mode", ["ellipsoid", "ls"])
@pytest.mark.parametrize("params", [P0, P1, P1.with_elasto_plastic()])
def test_kernel_matches_numpy_route(grad_grid, grad_table, mode, params, rng):
    model = models(grad_grid, grad_table, params)[mode]
    s = ScalingMatrices.from_grid(grad_grid)
    for _ in range(200):
        z = rng.normal(scale=1e-6, size=3) * np.array([1.0, 1.0, grad_grid.r])
        twist = rng.normal(scale=(2e-3, 2e-3, 0.5))
        ref = numpy_rate(mode, z, twist, grad_grid, grad_table, params)
        dz, f = model.rate_and_wrench(z, twist, 2.0)
        assert np.allclose(dz, ref, rtol=1e-12, atol=1e-18)
        f_ref = reduced_wrench(z, ref, twist, s, params, 2.0)
        assert np.allclose(f, f_ref, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("mode", ["ellipsoid", "ls"])
@pytest.mark.parametrize("params", [P1, P1.with_elasto_plastic()])
def test_steady_state_is_a_fixed_point(grad_grid, grad_table, mode, params):
    model = models(grad_grid, grad_table, params)[mode]
    for twist in [(1e-3, 0.0, 0.0), (0.0, 0.0, 0.4), (1e-3, -2e-3, 0.3), (0.0, 1e-2, -2.0)]:
        z = model.steady_state(twist)
        assert np.max(np.abs(model.rate(z, twist))) < 1e-15


def test_high_speed_force_matches_coulomb(circle_grid, circle_table):
    for mode, model in models(circle_grid, circle_table, P0).items():
        twist = (1.0, 0.0, 0.0)
        z = model.steady_state(twist)
        f = model.wrench(z, np.zeros(3), twist, 2.0)
        assert f == pytest.approx((-2.0, 0.0, 0.0), abs=1e-12), mode
        twist = (0.0, 0.0, 100.0)
        z = model.steady_state(twist)
        f = model.wrench(z, np.zeros(3), twist, 2.0)
        assert f[2] == pytest.approx(-2.0 * circle_grid.r, rel=1e-12), mode


def test_gradient_line_rotation_tangential_force(grad_grid, grad_table):
    m = models(grad_grid, grad_table, P0)
    twist = (0.0, 0.0, 1.0)
    f_ell = m["ellipsoid"].wrench(m["ellipsoid"].steady_state(twist), np.zeros(3), twist, 1.0)
    f_ls = m["ls"].wrench(m["ls"].steady_state(twist), np.zeros(3), twist, 1.0)
    assert f_ell[0] == 0.0 and f_ell[1] == 0.0
    assert math.hypot(f_ls[0], f_ls[1]) > 1e-3


def test_ls_mode_needs_table(circle_grid):
    with pytest.raises(ValueError):
        ReducedModel(ScalingMatrices.from_grid(circle_grid), P1, "ls")
    with pytest.raises(ValueError):
        ReducedModel(ScalingMatrices.from_grid(circle_grid), P1, "cube")


def test_zero_twist_has_zero_rate(circle_grid, circle_table):
    for model in models(circle_grid, circle_table, P1).values():
        assert np.array_equal(model.rate(np.full(3, 1e-7), (0.0, 0.0, 0.0)), np.zeros(3))


def test_negative_normal_force_rejected(circle_grid):
    with pytest.raises(ValueError):
        reduced_wrench(np.zeros(3), np.zeros(3), (0, 0, 0), ScalingMatrices(0.01, 1e-4), P1, -1.0)


@given(vx=st.floats(-0.05, 0.05), vy=st.floats(-0.05, 0.05), om=st.floats(-5, 5))
def test_steady_wrench_dissipates(grad_grid, grad_table, vx, vy, om):
    for model in models(grad_grid, grad_table, P1).values():
        z = model.steady_state((vx, vy, om))
        f = model.wrench(z, np.zeros(3), (vx, vy, om), 1.0)
        assert f[0] * vx + f[1] * vy + f[2] * om <= 1e-15


@given(
    vx=st.floats(-0.05, 0.05), vy=st.floats(-0.05, 0.05), om=st.floats(-5, 5), fn=st.floats(0.01, 50)
)
def test_wrench_linear_in_normal_force(circle_grid, circle_table, vx, vy, om, fn):
    model = models(circle_grid, circle_table, P1)["ls"]
    z = np.array([1e-7, -2e-7, 3e-10])
    dz, f1 = model.rate_and_wrench(z, (vx, vy, om), 1.0)
    _, fk = model.rate_and_wrench(z, (vx, vy, om), fn)
    assert np.allclose(fk, fn * f1, rtol=1e-12, atol=1e-15)
