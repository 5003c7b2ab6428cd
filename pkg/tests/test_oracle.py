import math

import numpy as np
import pytest

from hodokit import (
    DegenerateCollinear,
    IntegratorConfig,
    Method,
    NotHyperbolic,
    OutOfPlane,
    SingularPosition,
    State,
    StepLimitExceeded,
    SystemParams,
    accelerate,
    asymptotic_direction,
    conic_from_state,
    conserved,
    fit_circle,
    integrate,
    plane_frame,
    sample_hodograph,
    sweep_theta,
    velocity_circle,
)
from hodokit.verify import orbit_period, orbit_state

TWO_PI = 2 * math.pi


def test_accelerate_examples(unit):
    np.testing.assert_array_equal(accelerate((1, 0, 0), unit), [-1, 0, 0])
    np.testing.assert_array_equal(accelerate((2, 0, 0), unit), [-0.25, 0, 0])
    np.testing.assert_array_equal(accelerate((0, 1, 0), SystemParams(2.0, 1.0)), [0, -0.5, 0])
    with pytest.raises(SingularPosition):
        accelerate((0, 0, 0), unit)


def test_circular_orbit_returns_after_one_period(circular, unit):
    traj = integrate(circular, unit, TWO_PI)
    assert traj.t[-1] == TWO_PI
    np.testing.assert_allclose(traj.x[-1], circular.x, atol=1e-8)
    np.testing.assert_allclose(traj.v[-1], circular.v, atol=1e-8)


def test_canonical_speed_tends_to_energy_radius(canonical, unit):
    traj = integrate(canonical, unit, math.inf, until_radius=1e6)
    assert traj.r[-1] >= 1e6
    assert np.linalg.norm(traj.v[-1]) == pytest.approx(math.sqrt(2), abs=1e-5)


def test_zero_length_run(canonical, unit):
    traj = integrate(canonical, unit, canonical.t)
    assert len(traj) == 1
    assert traj.final == canonical


def test_trajectory_is_monotone_in_time(canonical, unit):
    fwd = integrate(canonical, unit, 50.0)
    assert np.all(np.diff(fwd.t) > 0)
    back = integrate(canonical, unit, -50.0)
    assert np.all(np.diff(back.t) < 0)
    assert np.all(back.r > 0)


def test_dense_output_matches_exact_circular_motion(circular, unit):
    grid = np.linspace(0.0, 20.0, 777)
    traj = integrate(circular, unit, 20.0, t_eval=grid)
    np.testing.assert_array_equal(traj.t, grid)
    exact = np.column_stack([np.cos(grid), np.sin(grid), np.zeros_like(grid)])
    np.testing.assert_allclose(traj.x, exact, atol=1e-8)
    np.testing.assert_allclose(traj.v, exact[:, [1, 0, 2]] * [-1, 1, 0], atol=1e-8)


def test_t_eval_validation(canonical, unit):
    with pytest.raises(ValueError):
        integrate(canonical, unit, 1.0, t_eval=[0.5, 0.2])
    with pytest.raises(ValueError):
        integrate(canonical, unit, 1.0, t_eval=[0.5, 2.0])
    with pytest.raises(ValueError):
        integrate(canonical, unit, math.inf)


def test_time_symmetry(elliptic, canonical, unit):
    for s in (elliptic, canonical):
        fwd = integrate(s, unit, 30.0).final
        back = integrate(fwd, unit, 0.0).final
        np.testing.assert_allclose(back.x, s.x, atol=1e-7)
        np.testing.assert_allclose(back.v, s.v, atol=1e-7)


@pytest.mark.parametrize("e", [0.0, 0.44, 0.9, 3.0])
def test_conservation_over_many_characteristic_times(e):
    p = SystemParams(1.5, 0.8)
    s = orbit_state(p, e, 1.1, 0.3)
    c0 = conserved(s, p)
    # characteristic time Λ/R = j³/(m k²)
    tau = c0.j**3 / (p.m * p.k**2)
    traj = integrate(s, p, 100 * tau)
    for i in range(0, len(traj), max(1, len(traj) // 50)):
        c = conserved(traj.state(i), p)
        assert abs(c.j - c0.j) / c0.j < 1e-8
        assert abs(c.h - c0.h) / abs(c0.h) < 1e-8


@pytest.mark.slow
def test_leapfrog_energy_has_no_secular_drift(elliptic, unit):
    period = orbit_period(elliptic, unit)
    cfg = IntegratorConfig(method=Method.LEAPFROG, initial_step=period / 500)
    per = 50
    n_periods = 10_000
    grid = period * np.arange(1, per * n_periods + 1) / per
    traj = integrate(elliptic, unit, float(grid[-1]), cfg, t_eval=grid)
    h = 0.5 * np.sum(traj.v**2, axis=1) - 1.0 / traj.r
    h0 = -0.5 * (1 - 0.44**2) / 1.44
    means = h.reshape(n_periods, per).mean(axis=1)
    assert np.max(np.abs(h - h0)) / abs(h0) < 1e-3
    # running mean over 100-period blocks
    blocks = means.reshape(100, 100).mean(axis=1)
    assert np.max(np.abs(blocks - blocks[0])) / abs(h0) < 1e-6


def test_leapfrog_needs_step(canonical, unit):
    with pytest.raises(ValueError):
        integrate(canonical, unit, 1.0, IntegratorConfig(method="leapfrog"))


def test_leapfrog_agrees_with_rk45(elliptic, unit):
    cfg = IntegratorConfig(method=Method.LEAPFROG, initial_step=1e-4)
    a = integrate(elliptic, unit, 3.0, cfg).final
    b = integrate(elliptic, unit, 3.0).final
    np.testing.assert_allclose(a.x, b.x, atol=1e-6)


def test_angular_momentum_matches_polar_rate(elliptic, canonical, unit):
    for s in (elliptic, canonical):
        f = plane_frame(s, unit)
        dt = 1e-4
        grid = np.arange(0, 401) * 0.01
        traj = integrate(s, unit, 4.0 + dt, t_eval=np.sort(np.concatenate([grid, grid[1:-1] + dt, [4.0 + dt]])))
        t, th = sweep_theta(traj, f)
        j = conserved(s, unit).j
        for i in range(1, len(t) - 1, 2):
            rate = (th[i + 1] - th[i]) / (t[i + 1] - t[i])
            r_mid = 0.5 * (traj.r[i] + traj.r[i + 1])
            assert unit.m * r_mid**2 * rate == pytest.approx(j, rel=1e-6)


def test_sweep_theta_circular(circular, unit):
    traj = integrate(circular, unit, TWO_PI)
    _, th = sweep_theta(traj, plane_frame(circular, unit))
    assert th[0] == 0.0
    assert th[-1] - th[0] == pytest.approx(TWO_PI, abs=1e-8)
    assert np.all(np.diff(th) > 0)


def test_sweep_theta_canonical_reaches_asymptote(canonical, unit):
    traj = integrate(canonical, unit, math.inf, until_radius=1e6)
    _, th = sweep_theta(traj, plane_frame(canonical, unit))
    assert th[-1] == pytest.approx(1.9106332, abs=1e-5)
    assert np.all(np.diff(th) > 0)


def test_sweep_theta_out_of_plane(canonical, unit):
    traj = integrate(canonical, unit, 1.0)
    tilted = plane_frame(State((1, 0, 0), (0, 2, 0.5)), unit)
    with pytest.raises(OutOfPlane):
        sweep_theta(traj, tilted)


def test_asymptotic_direction_canonical(canonical, unit):
    fwd = asymptotic_direction(canonical, unit, "forward")
    back = asymptotic_direction(canonical, unit, "backward")
    np.testing.assert_allclose(fwd, [-1 / 3, 0.9428090, 0], atol=1e-4)
    # incoming physical velocity is −d_in = (1/3, +2√2/3, 0)
    np.testing.assert_allclose(back, [1 / 3, 0.9428090, 0], atol=1e-4)


def test_asymptotic_direction_no_deflection_limit(unit):
    s = State((1, 0, 0), (0, 1e4, 0))
    fwd = asymptotic_direction(s, unit, "forward", radius_factor=1e2)
    back = asymptotic_direction(s, unit, "backward", radius_factor=1e2)
    np.testing.assert_allclose(fwd, back, atol=1e-4)
    np.testing.assert_allclose(fwd, [0, 1, 0], atol=1e-4)


def test_asymptotic_direction_errors(elliptic, canonical, unit):
    with pytest.raises(NotHyperbolic):
        asymptotic_direction(elliptic, unit)
    with pytest.raises(ValueError):
        asymptotic_direction(canonical, unit, "sideways")


def test_fit_circle_examples(canonical, unit):
    fit = fit_circle([(1, 0), (0, 1), (-1, 0)])
    assert fit.center == pytest.approx((0, 0), abs=1e-15)
    assert fit.radius == pytest.approx(1, rel=1e-15)
    assert fit.rms_residual < 1e-15
    circle, orbit = velocity_circle(canonical, unit), conic_from_state(canonical, unit)
    pts = [(v[0], v[1]) for _, v in sample_hodograph(circle, orbit, 100)]
    fit = fit_circle(pts)
    assert fit.center == pytest.approx((0, 1.5), abs=1e-12)
    assert fit.radius == pytest.approx(0.5, rel=1e-12)
    assert fit.rms_residual < 1e-12


def test_fit_circle_on_integrated_velocities(canonical, unit):
    traj = integrate(canonical, unit, math.inf, until_radius=20 * 4.0)
    back = integrate(canonical, unit, -math.inf, until_radius=20 * 4.0)
    v = np.vstack([back.v[::-1], traj.v[1:]])
    fit = fit_circle(v[:, :2])
    assert fit.center[0] == pytest.approx(0.0, abs=1e-6)
    assert fit.center[1] == pytest.approx(1.5, rel=1e-6)
    assert fit.radius == pytest.approx(0.5, rel=1e-6)
    assert fit.rms_residual < 1e-7


def test_fit_circle_rejects_degenerate():
    with pytest.raises(DegenerateCollinear):
        fit_circle([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DegenerateCollinear):
        fit_circle([(0, 0), (1, 1)])
    with pytest.raises(DegenerateCollinear):
        fit_circle([(1, 1)] * 5)


def test_collision_guard(unit):
    s = State((1, 0, 0), (0, 1e-3, 0))
    with pytest.raises(SingularPosition):
        integrate(s, unit, 10.0, IntegratorConfig(min_radius_guard=0.01))


def test_step_limit(canonical, unit):
    with pytest.raises(StepLimitExceeded):
        integrate(canonical, unit, 1000.0, IntegratorConfig(max_steps=5))
    cfg = IntegratorConfig(method="leapfrog", initial_step=1e-3, max_steps=10)
    with pytest.raises(StepLimitExceeded):
        integrate(canonical, unit, 1.0, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")


def test_bit_reproducible(canonical, unit):
    a = integrate(canonical, unit, 25.0)
    b = integrate(canonical, unit, 25.0)
    assert a.x.tobytes() == b.x.tobytes() and a.t.tobytes() == b.t.tobytes()
