import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frozen_planet import (
    DomainError,
    InitialData,
    IntegratorOptions,
    MeanPair,
    NoCollision,
    integrate_to_collision,
    kappa_quadrature,
    resample_uniform,
    trajectory_means,
)
from frozen_planet.freefall import fall_time
from frozen_planet.integrate import Trajectory, collision_exponent, kepler_collision_time

INIT = InitialData(2.5, 1.3)
MEANS = MeanPair(2.6, 0.9)


@pytest.fixture(scope="module")
def traj():
    return integrate_to_collision(INIT, MEANS, 0.5)


def test_trajectory_shape(traj):
    assert traj.t[0] == 0.0 and traj.q2[-1] == 0.0
    assert traj.v1[0] == 0.0 and traj.v2[0] == 0.0
    assert np.all(np.diff(traj.t) > 0)
    assert np.isfinite(traj.q1[-1]) and np.isfinite(traj.v1[-1])
    assert traj.v2[-1] == -math.inf
    assert np.all(np.diff(traj.q2) < 0)
    assert np.all(np.diff(traj.q1) > 0)


def test_relative_velocity_positive(traj):
    assert np.all(traj.v1[1:] - traj.v2[1:] > 0)


def test_energy_drift_bound(traj):
    opts = IntegratorOptions()
    assert traj.energy_drift <= 10 * (opts.rel_tol + opts.abs_tol) * traj.T


def test_drift_shrinks_with_tolerance(traj):
    tight = integrate_to_collision(INIT, MEANS, 0.5, IntegratorOptions().scaled(0.1))
    assert tight.energy_drift * 10 <= traj.energy_drift


def test_dense_output_matches_samples(traj):
    for k in (0, len(traj.t) // 3, len(traj.t) - 2):
        row = traj.dense(traj.t[k])
        assert row[1] == pytest.approx(traj.q1[k], abs=1e-12)
        assert row[2] == pytest.approx(traj.q2[k], abs=1e-12)


def test_collision_exponent(traj):
    assert collision_exponent(traj) == pytest.approx(2 / 3, rel=1e-2)


def test_threshold_halving_moves_T_below_event_tol():
    opts = IntegratorOptions(rel_tol=1e-12, abs_tol=1e-12)
    a = integrate_to_collision(INIT, MEANS, 0.5, opts)
    b = integrate_to_collision(INIT, MEANS, 0.5,
                               IntegratorOptions(rel_tol=1e-12, abs_tol=1e-12, collision_threshold=0.05))
    assert abs(a.T - b.T) < opts.event_tol


@pytest.mark.parametrize("q0", [1.0, 2.0, 5.0])
def test_kepler_sanity(q0):
    # q'' = -2/q**2 is the alpha = 1 fall with strength 2
    assert kepler_collision_time(q0) == pytest.approx(fall_time(1.0, q0, strength=2.0), abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 0.99), st.floats(0.3, 3.0), st.floats(0.1, 0.9), st.floats(0.3, 3.0), st.floats(0.0, 1.0))
def test_low_start_collides_early(a2, gap, m2_frac, mgap, r):
    tr = integrate_to_collision(InitialData(a2 + gap, a2), MeanPair(a2 * m2_frac + mgap, a2 * m2_frac), r)
    assert tr.T < 1.0
    assert np.all(tr.q2 <= -tr.t**2 / a2**2 + a2 + 1e-12)


def test_means_of_series():
    t = np.linspace(0.0, 2.0, 5)
    tr = Trajectory(t=t, q1=np.full(5, 3.0), q2=2.0 - t, v1=np.zeros(5), v2=-np.ones(5),
                    energy=np.zeros(5), iq1=3.0 * t, iq2=2.0 * t - 0.5 * t**2,
                    r=1.0, meanfield=MeanPair(3.0, 1.0))
    m = trajectory_means(tr)
    assert m.m1 == 3.0
    assert 0 < m.m2 < tr.q2[0]


def test_means_of_integrated_orbit(traj):
    m = trajectory_means(traj)
    assert 0 < m.m2 < traj.q2[0]
    assert traj.q1[0] < m.m1 < traj.q1[-1]


def test_kepler_mean_when_interaction_negligible():
    # outer electron far away: q2 is a pure -2/q fall and m2/q2(0) -> kappa(1)
    tr = integrate_to_collision(InitialData(1e6, 1.0), MeanPair(1e6, 0.5), 0.0)
    assert tr.means.m2 / tr.q2[0] == pytest.approx(kappa_quadrature(1.0), abs=1e-9)


def test_resample(traj):
    two = resample_uniform(traj, 2)
    assert list(two.t) == [0.0, traj.T]
    assert two.q2[-1] == 0.0 and two.q1[0] == traj.q1[0]
    fine = resample_uniform(traj, 400)
    assert np.all(np.diff(fine.q1) > 0) and np.all(np.diff(fine.q2) < 0)
    assert fine.means == pytest.approx(traj.means, abs=1e-12)
    # the running integrals come from the dense output, check them against Simpson
    from scipy.integrate import simpson
    assert simpson(fine.q1, x=fine.t) / fine.T == pytest.approx(traj.means.m1, rel=1e-6)
    with pytest.raises(ValueError):
        resample_uniform(traj, 1)


def test_errors():
    with pytest.raises(DomainError):
        integrate_to_collision(InitialData(1.0, 1.5), MEANS, 0.5)
    with pytest.raises(DomainError):
        integrate_to_collision(INIT, MeanPair(0.5, 0.9), 0.5)
    with pytest.raises(NoCollision):
        integrate_to_collision(INIT, MEANS, 0.5, IntegratorOptions(max_steps=5))
    with pytest.raises(NoCollision):
        integrate_to_collision(INIT, MEANS, 0.5, IntegratorOptions(t_max=0.1))


def test_deterministic():
    a = integrate_to_collision(INIT, MEANS, 0.5)
    b = integrate_to_collision(INIT, MEANS, 0.5)
    assert np.array_equal(a.q1, b.q1) and a.T == b.T
