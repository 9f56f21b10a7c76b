import math
from dataclasses import replace

import numpy as np
import pytest

from planar_friction import (
    P0,
    P1,
    Adaptive,
    FixedStep,
    IntegrationError,
    LoadProfile,
    RigidBody2D,
    Trace,
    VelocityProfile,
    breakaway,
    canonical_profile,
    circle,
    discretize,
    gripper_scenario,
    hertzian,
    make_friction,
    simulate_dynamic,
    simulate_kinematic,
)
from planar_friction.simulation import GRAVITY, TRACE_HEADER, normal_force_profile


def constant(twist, duration=0.02):
    return VelocityProfile.constant(twist, duration)


def test_canonical_profile_shape():
    p = canonical_profile()
    assert p.duration == 5.0
    assert np.array_equal(p(0.0), np.zeros(3)) and np.array_equal(p(5.0), np.zeros(3))
    short = canonical_profile(short=True)
    assert short.duration == pytest.approx(1.0)
    assert np.allclose(short(0.5), p(2.5))
    # translation-only, rotation-only and mixed phases are all present
    tw = p.twist
    assert np.any((tw[:, 2] == 0) & (np.hypot(tw[:, 0], tw[:, 1]) > 0))
    assert np.any((tw[:, 2] != 0) & (np.hypot(tw[:, 0], tw[:, 1]) == 0))
    assert np.any((tw[:, 2] != 0) & (np.hypot(tw[:, 0], tw[:, 1]) > 0))


def test_normal_force_profiles():
    f1 = normal_force_profile(1)
    assert f1(0.0) == pytest.approx(1.0)
    assert f1(1.0) == pytest.approx(6.0)
    f2 = normal_force_profile(2)
    assert f2(0.0) == 1.0 and f2(1.0) == 6.0
    with pytest.raises(ValueError):
        normal_force_profile(3)


def test_trace_csv_round_trip(tmp_path, rng):
    k = 7
    tr = Trace(np.arange(k) * 0.1, rng.normal(size=(k, 3)), rng.normal(size=(k, 3)),
               rng.normal(size=(k, 3)), rng.uniform(size=k))
    path = tmp_path / "t.csv"
    tr.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(TRACE_HEADER)
    back = Trace.from_csv(path)
    assert np.array_equal(back.rows(), tr.rows())
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        Trace.from_csv(tmp_path / "bad.csv")


@pytest.mark.parametrize("kind", ["distributed", "reduced_ls", "reduced_ellipsoid"])
def test_compiled_and_generic_routes_agree(kind):
    # compiled fixed-step RK4 against the generic adaptive integrator
    grid = discretize(circle(0.01), 11)
    prof = VelocityProfile(np.array([0.0, 0.01, 0.02]), np.array([[0, 0, 0], [2e-3, 1e-3, 0.3], [1e-3, -1e-3, -0.2]]))
    fr = make_friction(kind, grid, P1)
    a = simulate_kinematic(prof, fr, FixedStep(1e-6), 1.5, 1e-3)
    b = simulate_kinematic(prof, fr, Adaptive(1e-13, 1e-10, 1e-5), 1.5, 1e-3)
    assert np.allclose(a.t, b.t)
    scale = np.max(np.abs(a.wrench))
    assert np.max(np.abs(a.wrench - b.wrench)) < 1e-5 * scale


def test_kinematic_run_is_deterministic():
    grid = discretize(circle(0.01), 11)
    prof = canonical_profile(short=True).time_scaled(20.0)
    a = simulate_kinematic(prof, make_friction("distributed", grid, P1), FixedStep(1e-5))
    b = simulate_kinematic(prof, make_friction("distributed", grid, P1), FixedStep(1e-5))
    assert np.array_equal(a.rows(), b.rows())


def test_kinematic_pose_integrates_twist():
    grid = discretize(circle(0.01), 5)
    tr = simulate_kinematic(constant((1e-3, 0.0, 0.5), 0.1), make_friction("reduced_ellipsoid", grid, P0))
    assert tr.pose[-1] == pytest.approx((1e-4, 0.0, 0.05))


def test_too_large_step_fails_cleanly():
    grid = discretize(circle(0.01), 11)
    with pytest.raises(IntegrationError):
        simulate_kinematic(constant((1e-2, 0, 0), 0.1), make_friction("distributed", grid, P1), FixedStep(1e-3))


def test_step_must_divide_profile():
    grid = discretize(circle(0.01), 5)
    with pytest.raises(ValueError):
        simulate_kinematic(constant((1e-3, 0, 0), 0.01), make_friction("reduced_ellipsoid", grid, P1), FixedStep(3e-3))


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown model"):
        make_friction("magic", discretize(circle(0.01), 5), P1)


def test_rigid_body_constructors():
    d = RigidBody2D.disc(2.0, 0.1)
    assert d.inertia == pytest.approx(0.01)
    b = RigidBody2D.box(0.2, 0.15, 0.08, (0.025, 0.0))
    assert b.inertia == pytest.approx(0.2 * (0.15**2 + 0.08**2) / 12)
    with pytest.raises(ValueError):
        RigidBody2D(0.0, 1.0)


def test_load_profile_holds_samples_and_rejects_negative_force():
    loads = LoadProfile(lambda t: 1.0 + t, update_rate=10.0)
    assert loads.f_N(0.37) == pytest.approx(1.3)
    with pytest.raises(ValueError):
        LoadProfile(lambda t: -1.0).f_N(0.0)


def test_breakaway_matches_static_coefficient():
    grid = discretize(circle(0.05), 21, GRAVITY)
    f, tau = breakaway(grid, P1, GRAVITY)
    assert f == pytest.approx(1.2 * GRAVITY, rel=1e-9)
    assert tau == pytest.approx(1.2 * GRAVITY * grid.r, rel=1e-6)


def test_unloaded_body_stays_at_rest():
    body = RigidBody2D.disc()
    grid = discretize(circle(0.05), 11, GRAVITY)
    tr = simulate_dynamic(body, LoadProfile(lambda t: GRAVITY), make_friction("distributed", grid, P1),
                          duration=0.05, output_dt=0.01)
    assert np.array_equal(tr.pose, np.zeros_like(tr.pose))


@pytest.mark.parametrize("kind", ["distributed", "reduced_ls"])
def test_pushed_disc_accelerates_against_coulomb_friction(kind):
    body = RigidBody2D.disc()
    grid = discretize(circle(0.05), 11, GRAVITY)
    push = 20.0
    loads = LoadProfile(lambda t: GRAVITY, lambda t: (push, 0.0, 0.0))
    tr = simulate_dynamic(body, loads, make_friction(kind, grid, P0), Adaptive(), 0.05, 0.01)
    a = np.diff(tr.twist[-4:, 0]) / 0.01
    assert np.allclose(a, push - GRAVITY, rtol=1e-3)
    assert np.allclose(tr.wrench[-1], (-GRAVITY, 0.0, 0.0), rtol=1e-3, atol=1e-4)


def test_body_frame_contact_rotates_with_body():
    body = RigidBody2D.disc()
    grid = discretize(circle(0.05), 11, GRAVITY)
    loads = LoadProfile(lambda t: GRAVITY, lambda t: (0.0, 0.0, 1.0))
    tr = simulate_dynamic(body, loads, make_friction("reduced_ls", grid, P0), Adaptive(), 0.2, 0.01)
    assert tr.twist[-1, 2] > 0 and abs(tr.pose[-1, 0]) < 1e-9 and abs(tr.pose[-1, 1]) < 1e-9


def test_force_dependent_reduced_model_recomputes_table():
    spec = hertzian(k_per_newton=2.0)
    grid = discretize(spec, 11, 2.0)
    fr = make_friction("reduced_ls", grid, P1, spec=spec, n_ls=6)
    fr.set_normal_force(2.0)
    assert fr.recomputes == 0
    fr.set_normal_force(3.0)
    assert fr.recomputes == 1
    assert fr.model.r == pytest.approx(discretize(spec, 11, 3.0).r)
    fixed = make_friction("reduced_ls", grid, P1, spec=hertzian(k=2.0), n_ls=6)
    fixed.set_normal_force(3.0)
    assert fixed.recomputes == 0


def test_distributed_force_dependent_needs_room():
    spec = replace(hertzian(k=2.0), extent=0.02)
    grid = discretize(spec, 11, 2.0)
    fr = make_friction("distributed", grid, P1, spec=spec)
    fr.set_normal_force(1.0)
    assert fr.w.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fr.set_normal_force(100.0)


def test_gripper_holds_with_small_moment_arm():
    tr = gripper_scenario(2, hertzian(k=2.0), 1, "reduced_ls", duration=0.5, n=11, n_ls=10)
    # settles after a small initial slip; the swinging case turns by ~1 rad
    moved = np.abs(tr.pose - tr.pose[0])
    assert np.max(moved[:, :2]) < 1e-4 and np.max(moved[:, 2]) < 1e-2
    assert abs(tr.twist[-1, 2]) < 1e-3
    # the two pads carry the weight
    assert tr.wrench[-1, 1] == pytest.approx(0.2 * GRAVITY, rel=1e-2)


def test_gripper_rejects_unknown_case():
    with pytest.raises(ValueError):
        gripper_scenario(3, hertzian(), 1)
