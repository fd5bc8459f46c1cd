"""Acceptance criteria 1-9, one PASS/FAIL line each (also listed in the terminal summary)."""

import math
import random
from pathlib import Path

import numpy as np
import pytest

from frozen_planet import (
    IntegratorOptions,
    constant_g_fall,
    f_ratio,
    fall_time,
    integrate_to_collision,
    kappa_gamma,
    kappa_quadrature,
    newton_solve,
    seed_r1,
    sweep,
    verify_orbit,
)
from frozen_planet.cli import main
from frozen_planet.integrate import InitialData, collision_exponent, kepler_collision_time
from frozen_planet.io import read_orbit, write_orbit
from frozen_planet.model import MeanPair

from conftest import record

GOLDEN = sorted((Path(__file__).parent / "golden").glob("orbit_*.json"))


def test_1_appendix_exactness():
    e1 = abs(kappa_gamma(1.0) - 0.75)
    e2 = abs(kappa_gamma(2.0) - math.pi / 4)
    eq = max(abs(kappa_quadrature(a) - kappa_gamma(a)) for a in np.geomspace(0.1, 10.0, 50))
    ok = e1 <= 1e-12 and e2 <= 1e-12 and eq <= 1e-8
    record(1, ok, f"|k(1)-3/4|={e1:.1e} |k(2)-pi/4|={e2:.1e} max|quad-gamma|={eq:.1e}")
    assert ok


def test_2_constant_g_fall():
    rng = random.Random(20)
    worst = 0.0
    for _ in range(10):
        q0, g = rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0)
        res = constant_g_fall(q0, g)
        worst = max(worst, abs(res.tau - math.sqrt(2 * q0 / g)), abs(res.qbar / q0 - 2 / 3))
    record(2, worst <= 1e-12, f"max error {worst:.1e} over 10 random (q0, g)")
    assert worst <= 1e-12


def test_3_f_ratio():
    e1 = abs(f_ratio(1 / 3) - 2)
    e2 = abs(f_ratio(144 / 145) - 17 / 5)
    vals = np.array([f_ratio(r) for r in np.linspace(0.0, 1.0, 1000)])
    mono = bool(np.all(np.diff(vals) > 0))
    ok = e1 <= 1e-12 and e2 <= 1e-12 and mono
    record(3, ok, f"|f(1/3)-2|={e1:.1e} |f(144/145)-17/5|={e2:.1e} monotone={mono}")
    assert ok


def test_4_r1_solution():
    orb = newton_solve(seed_r1(), 1.0)
    tr = orb.traj
    var = float((tr.q1.max() - tr.q1.min()) / tr.q1[0])
    ratio_err = abs(tr.means.m2 / tr.means.m1 - (1 - 1 / math.sqrt(2)))
    ok = orb.residual_norm < 1e-8 and var < 1e-6 and ratio_err <= 1e-8 and tr.q2[0] >= 1
    record(4, ok, f"|R|={orb.residual_norm:.1e} q1 variation={var:.1e} "
                  f"mean ratio err={ratio_err:.1e} q2(0)={tr.q2[0]:.6f}")
    assert ok


def test_5_full_sweep(branch20):
    reports = [verify_orbit(o) for o in branch20.orbits]
    failed = [(rep.r, c.name) for rep in reports for c in rep.failed()]
    worst = min(c.margin for rep in reports for c in rep.checks)
    ok = not failed and all(len(rep.checks) == 13 for rep in reports)
    status = "complete" if branch20.stall is None else f"BranchStall: {branch20.stall}"
    record(5, ok, f"{len(branch20)} orbits ({status}), failed checks {failed or 'none'}, "
                  f"smallest margin {worst:.2e}")
    assert ok


def test_6_integrator_quality(orbit_half):
    u = orbit_half.unknowns
    init, means = InitialData(u.a1, u.a2), MeanPair(u.m1, u.m2)
    base = integrate_to_collision(init, means, 0.5)
    tight = integrate_to_collision(init, means, 0.5, IntegratorOptions().scaled(0.1))
    shrink = base.energy_drift / tight.energy_drift
    slope = collision_exponent(base)
    slope_err = abs(slope / (2 / 3) - 1)
    ok = base.energy_drift < 1e-8 and shrink >= 10 and slope_err <= 0.01
    record(6, ok, f"drift={base.energy_drift:.2e} shrink={shrink:.1f}x exponent={slope:.6f}")
    assert ok


def test_7_cross_oracle():
    # potential -2/q is four times the reference -1/(2q): tau scales by 1/2
    errs = [abs(kepler_collision_time(q0) - 0.5 * fall_time(1.0, q0)) for q0 in (1.0, 2.0, 5.0)]
    ok = max(errs) <= 1e-8
    record(7, ok, f"max |T_ode - tau| = {max(errs):.1e} for q0 in (1, 2, 5)")
    assert ok


@pytest.mark.slow
def test_8_refinement(branch20):
    fine = sweep(1.0, 0.0, 40)
    by_r = {o.r: o.unknowns for o in fine.orbits}
    shared = [o for o in branch20.orbits if o.r in by_r]
    diff = max(max(abs(a - b) for a, b in zip(o.unknowns, by_r[o.r])) for o in shared)
    ok = fine.stall is None and len(shared) == len(branch20) and diff <= 1e-8
    record(8, ok, f"{len(shared)} shared r values, max unknown difference {diff:.1e}")
    assert ok


def test_9_persistence(tmp_path, capsys):
    exact = True
    for path in GOLDEN:
        orb = read_orbit(path)
        write_orbit(orb, tmp_path / path.name, timestamp=orb.metadata["timestamp"])
        back = read_orbit(tmp_path / path.name)
        exact &= (tmp_path / path.name).read_text() == path.read_text()
        exact &= back.unknowns == orb.unknowns and back.r == orb.r and back.energy == orb.energy
        exact &= all(np.array_equal(getattr(back.traj, k), getattr(orb.traj, k))
                     for k in ("t", "q1", "q2", "v1", "v2", "energy", "iq1", "iq2"))
    good = [main(["verify", str(p)]) for p in GOLDEN]
    bad_path = tmp_path / "bad.json"
    orb = read_orbit(GOLDEN[0])
    orb.traj.q2 *= 0.5 / orb.traj.q2[0]
    write_orbit(orb, bad_path)
    bad = main(["verify", str(bad_path)])
    missing = main(["verify", str(tmp_path / "nope.json")])
    capsys.readouterr()
    ok = exact and len(GOLDEN) == 3 and good == [0, 0, 0] and bad == 1 and missing == 2
    record(9, ok, f"{len(GOLDEN)} goldens field-exact={exact}, verify exits good={good} bad={bad} missing={missing}")
    assert ok
