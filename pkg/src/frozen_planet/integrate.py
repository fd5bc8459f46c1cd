"""Adaptive integration of the frozen-planet dynamics up to the nuclear collision.

The flow starts at rest and runs in physical time until ``q2`` drops below
``collision_threshold``.  From there on it continues in the Levi-Civita chart

    q2 = x**2,   dt = x**2 ds,   h = v2**2/2 - 2/q2

where the Kepler singularity is gone:

    x''  = (x/2) h + (x**3/2) F
    h'   = 2 x x' F

with ``F = -(interaction)`` the non-Kepler part of the acceleration of q2.  The
collision is the zero of ``x`` and is located on the dense output.  The
integrals of q1 and q2 are carried as extra states so the mean values come out
with the same accuracy as the orbit itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import DOP853, OdeSolution
from scipy.optimize import brentq

from .errors import DomainError, NoCollision
from .model import MeanPair, check_r

_MAX_DOMAIN_RETRIES = 30
_TOL_PIVOT = 1e-10
_TOL_SAFETY = 0.3  # keeps the global energy error under 10 (rtol + atol) T


class InitialData(NamedTuple):
    a1: float
    a2: float


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_steps: int = 1_000_000
    collision_threshold: float = 0.1
    t_max: float = 100.0
    event_tol: float = 1e-12

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if not self.collision_threshold > 0:
            raise ValueError("collision_threshold must be positive")

    def scaled(self, factor: float) -> "IntegratorOptions":
        return replace(self, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor)


# ---------------------------------------------------------------------------
# stepping driver


class _Leg(NamedTuple):
    ts: list
    ys: list
    interpolants: list
    t_end: float
    y_end: np.ndarray
    steps: int


def _local_tol(tol: float) -> float:
    """Per-step tolerance making the global error roughly proportional to ``tol``.

    An order-8 pair with per-step control has global error ~ tol**(8/9).
    """
    return _TOL_SAFETY * _TOL_PIVOT * (tol / _TOL_PIVOT) ** (9.0 / 8.0)


def _drive(fun, t0, y0, t_bound, opts, event, steps_left):
    """Step ``fun`` from ``(t0, y0)`` until ``event`` changes sign from + to <= 0.

    Returns every accepted step end plus the located event point.  Steps whose
    trial stages leave the domain are retried with a smaller step.
    """
    solver = DOP853(fun, t0, np.asarray(y0, dtype=float), t_bound,
                    rtol=_local_tol(opts.rel_tol), atol=_local_tol(opts.abs_tol))
    ts, ys, interps = [t0], [solver.y.copy()], []
    steps = 0
    while True:
        if steps >= steps_left:
            raise NoCollision(f"no collision within {opts.max_steps} steps")
        for _ in range(_MAX_DOMAIN_RETRIES):
            try:
                msg = solver.step()
                break
            except DomainError:
                solver.h_abs *= 0.25
        else:
            raise DomainError(f"trial stages keep leaving the domain near t={solver.t!r}")
        if solver.status == "failed":
            raise NoCollision(f"integrator failed at t={solver.t!r}: {msg}")
        steps += 1
        dense = solver.dense_output()
        interps.append(dense)
        if event(solver.y) <= 0.0:
            t_lo, t_hi = solver.t_old, solver.t
            if event(dense(t_lo)) <= 0.0:
                t_star = t_lo
            else:
                t_star = brentq(lambda s: event(dense(s)), t_lo, t_hi,
                                xtol=opts.event_tol * 1e-3, rtol=4 * np.finfo(float).eps)
            y_star = dense(t_star)
            if t_star > ts[-1]:
                ts.append(t_star)
                ys.append(y_star)
            else:
                # zero-length remainder, keep the last sample but pin the event state
                ys[-1] = y_star
            return _Leg(ts, ys, interps, t_star, y_star, steps)
        if solver.status == "finished":
            raise NoCollision(f"no collision before t_bound={t_bound!r}")
        ts.append(solver.t)
        ys.append(solver.y.copy())


def _solution(leg: _Leg) -> OdeSolution:
    grid = [leg.interpolants[0].t_old] + [d.t for d in leg.interpolants]
    return OdeSolution(grid, leg.interpolants)


# ---------------------------------------------------------------------------
# right-hand sides


def _physical_rhs(m1, m2, r):
    d2 = (m1 - m2) ** 2

    def fun(t, y):
        q1, q2, v1, v2 = y[0], y[1], y[2], y[3]
        if q2 <= 0.0 or q1 <= q2:
            raise DomainError(f"inadmissible state q1={q1!r}, q2={q2!r}")
        rep = r / d2 + (1.0 - r) / (q1 - q2) ** 2
        return np.array([v1, v2, -2.0 / (q1 * q1) + rep, -2.0 / (q2 * q2) - rep, q1, q2])

    return fun


def _regularized_rhs(m1, m2, r):
    # state: x, w = dx/ds, h, q1, v1, t, int q1 dt, int q2 dt
    d2 = (m1 - m2) ** 2

    def fun(s, z):
        x, w, h, q1, v1 = z[0], z[1], z[2], z[3], z[4]
        x2 = x * x
        gap = q1 - x2
        if gap <= 0.0:
            raise DomainError(f"electrons crossed: q1={q1!r} <= q2={x2!r}")
        rep = r / d2 + (1.0 - r) / (gap * gap)
        return np.array([
            w,
            0.5 * x * h - 0.5 * x2 * x * rep,
            -2.0 * x * w * rep,
            x2 * v1,
            x2 * (-2.0 / (q1 * q1) + rep),
            x2,
            x2 * q1,
            x2 * x2,
        ])

    return fun


def _to_regularized(y):
    q1, q2, v1, v2, i1, i2 = y
    x = math.sqrt(q2)
    return np.array([x, 0.5 * x * v2, 0.5 * v2 * v2 - 2.0 / q2, q1, v1, 0.0, i1, i2])


def _energy_phys(q1, q2, v1, v2, m1, m2, r):
    return (0.5 * (v1 * v1 + v2 * v2) - 2.0 / q1 - 2.0 / q2
            - r * (q1 - q2) / (m1 - m2) ** 2 + (1.0 - r) / (q1 - q2))


def _row_phys(y, m1, m2, r, t):
    q1, q2, v1, v2, i1, i2 = y
    return (t, q1, q2, v1, v2, _energy_phys(q1, q2, v1, v2, m1, m2, r), i1, i2)


def _row_reg(z, m1, m2, r, t_offset):
    x, w, h, q1, v1, t, i1, i2 = z
    q2 = x * x
    v2 = 2.0 * w / x if x != 0.0 else -math.inf
    e = (0.5 * v1 * v1 + h - 2.0 / q1
         - r * (q1 - q2) / (m1 - m2) ** 2 + (1.0 - r) / (q1 - q2))
    return (t + t_offset, q1, q2, v1, v2, e, i1, i2)


# ---------------------------------------------------------------------------
# trajectory


_COLUMNS = ("t", "q1", "q2", "v1", "v2", "energy", "iq1", "iq2")


class DenseOrbit:
    """Continuous extension of an integrated orbit, in physical time."""

    def __init__(self, phys, t_switch, reg, s_end, m1, m2, r):
        self.phys = phys
        self.t_switch = t_switch
        self.reg = reg
        self.s_end = s_end
        self._m = (m1, m2, r)

    def regularized(self, s: float) -> np.ndarray:
        return self.reg(s)

    def s_of_t(self, t: float) -> float:
        if t >= self.T:
            return self.s_end
        return brentq(lambda s: self.reg(s)[5] + self.t_switch - t, 0.0, self.s_end,
                      xtol=1e-15, rtol=4 * np.finfo(float).eps)

    @property
    def T(self) -> float:
        return self.t_switch + float(self.reg(self.s_end)[5])

    def __call__(self, t: float) -> tuple:
        """Row ``(t, q1, q2, v1, v2, E, int q1, int q2)`` at physical time ``t``."""
        m1, m2, r = self._m
        if self.phys is not None and t <= self.t_switch:
            return _row_phys(self.phys(t), m1, m2, r, t)
        row = _row_reg(self.reg(self.s_of_t(t)), m1, m2, r, self.t_switch)
        return (t,) + row[1:]


@dataclass
class Trajectory:
    """Sampled half-orbit from rest at t = 0 to the collision q2(T) = 0.

    The arrays are parallel; ``iq1``/``iq2`` hold the running integrals of q1
    and q2.  ``v2`` at the collision is ``-inf``.
    """

    t: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    energy: np.ndarray
    iq1: np.ndarray
    iq2: np.ndarray
    r: float
    meanfield: MeanPair
    n_steps: int = 0
    dense: DenseOrbit | None = field(default=None, repr=False, compare=False)

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def means(self) -> MeanPair:
        return trajectory_means(self)

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def from_rows(cls, rows, **kwargs) -> "Trajectory":
        cols = np.array(rows, dtype=float).T
        return cls(**dict(zip(_COLUMNS, cols)), **kwargs)


def integrate_to_collision(init: InitialData, m: MeanPair, r: float,
                           opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate from ``(a1, a2)`` at rest until q2 hits the nucleus."""
    opts = opts or IntegratorOptions()
    r = check_r(r)
    a1, a2 = float(init[0]), float(init[1])
    m1, m2 = float(m[0]), float(m[1])
    if not (0.0 < a2 < a1):
        raise DomainError(f"initial data must satisfy 0 < a2 < a1, got {a1!r}, {a2!r}")
    if not m1 > m2:
        raise DomainError(f"means must satisfy m1 > m2, got {m1!r}, {m2!r}")
    thr = opts.collision_threshold

    rows = []
    y0 = np.array([a1, a2, 0.0, 0.0, 0.0, 0.0])
    steps = 0
    phys = None
    t_switch = 0.0
    if a2 > thr:
        leg = _drive(_physical_rhs(m1, m2, r), 0.0, y0, opts.t_max, opts,
                     lambda y: y[1] - thr, opts.max_steps)
        steps += leg.steps
        phys = _solution(leg)
        t_switch = leg.t_end
        y0 = leg.y_end
        rows.extend(_row_phys(y, m1, m2, r, t) for t, y in zip(leg.ts, leg.ys))
        rows.pop()  # restated as the first regularized sample

    z0 = _to_regularized(y0)
    # x decreases at a rate close to sqrt(2); this bound is never reached
    s_bound = 10.0 * (z0[0] + 1.0) + opts.t_max
    leg = _drive(_regularized_rhs(m1, m2, r), 0.0, z0, s_bound, opts,
                 lambda z: z[0], opts.max_steps - steps)
    steps += leg.steps
    reg = _solution(leg)
    for z in leg.ys:
        rows.append(_row_reg(z, m1, m2, r, t_switch))
    last = list(rows[-1])
    last[2] = 0.0
    last[4] = -math.inf
    rows[-1] = tuple(last)
    if rows[-1][0] > opts.t_max:
        raise NoCollision(f"collision at t={rows[-1][0]!r} beyond t_max={opts.t_max!r}")

    dense = DenseOrbit(phys, t_switch, reg, leg.t_end, m1, m2, r)
    return Trajectory.from_rows(rows, r=r, meanfield=MeanPair(m1, m2), n_steps=steps, dense=dense)


def trajectory_means(traj: Trajectory) -> MeanPair:
    """Time averages of q1 and q2 over [0, T] from the carried integrals."""
    T = traj.T
    if not T > 0:
        raise ValueError("trajectory has zero duration")
    return MeanPair(float(traj.iq1[-1]) / T, float(traj.iq2[-1]) / T)


def resample_uniform(traj: Trajectory, n: int) -> Trajectory:
    """Re-sample on ``n`` equally spaced times in [0, T] through the dense output."""
    if n < 2:
        raise ValueError("need at least two samples")
    if traj.dense is None:
        raise ValueError("trajectory carries no dense output")
    T = traj.T
    times = np.linspace(0.0, T, n)
    times[-1] = T
    rows = [traj.dense(t) for t in times[:-1]]
    rows.append(tuple(getattr(traj, c)[-1] for c in _COLUMNS))
    return Trajectory.from_rows(rows, r=traj.r, meanfield=traj.meanfield,
                                n_steps=traj.n_steps, dense=traj.dense)


def collision_exponent(traj: Trajectory, tau_hi: float = 1e-6, n: int = 50) -> float:
    """Least-squares slope of log q2 against log(T - t) on [tau_hi/10, tau_hi].

    A Kepler collision has q2 ~ c (T - t)**(2/3).
    """
    if traj.dense is None:
        raise ValueError("trajectory carries no dense output")
    d = traj.dense
    # T - t(s) and x(s) in the regularized chart, no cancellation against T
    s_grid = np.linspace(0.0, d.s_end, 2001)
    t_end = d.reg(d.s_end)[5]
    tau = np.array([t_end - d.reg(s)[5] for s in s_grid])
    if tau[0] < tau_hi:
        raise ValueError("regularized leg is shorter than the requested decade")
    s_hi = brentq(lambda s: t_end - d.reg(s)[5] - tau_hi, 0.0, d.s_end, xtol=1e-15)
    s_lo = brentq(lambda s: t_end - d.reg(s)[5] - tau_hi / 10, s_hi, d.s_end, xtol=1e-15)
    ss = np.linspace(s_hi, s_lo, n)
    zs = np.array([d.reg(s) for s in ss])
    taus = t_end - zs[:, 5]
    slope, _ = np.polyfit(np.log(taus), np.log(zs[:, 0] ** 2), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# single-body falls, used as oracles for the closed fall-time formulas


def kepler_collision_time(q0: float, mu: float = 2.0,
                          opts: IntegratorOptions | None = None) -> float:
    """Collision time of q'' = -mu/q**2 from rest at q0, via the regularized chart."""
    opts = opts or IntegratorOptions()
    thr = opts.collision_threshold
    t_switch, q, v = 0.0, float(q0), 0.0
    if q0 > thr:
        def phys(t, y):
            if y[0] <= 0.0:
                raise DomainError("q left the domain")
            return np.array([y[1], -mu / (y[0] * y[0])])

        leg = _drive(phys, 0.0, [q0, 0.0], opts.t_max, opts, lambda y: y[0] - thr, opts.max_steps)
        t_switch, (q, v) = leg.t_end, leg.y_end

    def reg(s, z):
        x, w, h, _ = z
        return np.array([w, 0.5 * x * h, 0.0, x * x])

    x = math.sqrt(q)
    z0 = [x, 0.5 * x * v, 0.5 * v * v - mu / q, 0.0]
    leg = _drive(reg, 0.0, z0, 10.0 * (x + 1.0) + opts.t_max, opts, lambda z: z[0], opts.max_steps)
    return t_switch + float(leg.y_end[3])


def free_fall_time(accel: Callable[[float], float], q0: float, q_stop: float,
                   opts: IntegratorOptions | None = None) -> float:
    """Physical-time integration of q'' = accel(q) from rest until q = q_stop."""
    opts = opts or IntegratorOptions()

    def fun(t, y):
        if y[0] <= 0.0:
            raise DomainError("q left the domain")
        return np.array([y[1], accel(y[0])])

    leg = _drive(fun, 0.0, [q0, 0.0], opts.t_max, opts, lambda y: y[0] - q_stop, opts.max_steps)
    return float(leg.t_end)
