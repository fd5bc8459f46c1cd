"""Shooting solver for symmetric frozen planet orbits.

Unknowns are the two starting heights and the two mean values.  An orbit is
integrated from rest until q2 collides; a solution has collision time 1,
vanishing q1 velocity at the collision and self-consistent means.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, NoCollision, NoConvergence
from .integrate import (
    InitialData,
    IntegratorOptions,
    Trajectory,
    integrate_to_collision,
)
from .model import MeanPair, check_r, r1_mean_ratio

log = logging.getLogger(__name__)

FD_STEP = 1e-6
MAX_HALVINGS = 30


class UnknownVector(NamedTuple):
    a1: float  # q1(0)
    a2: float  # q2(0)
    m1: float
    m2: float

    def check(self) -> "UnknownVector":
        if not (self.a1 > self.a2 > 0.0 and self.m1 > self.m2 > 0.0):
            raise DomainError(f"inadmissible unknowns {tuple(self)!r}")
        return self


class ResidualVector(NamedTuple):
    collision_time: float  # T - 1
    turning_velocity: float  # v1(T)
    mean1: float
    mean2: float

    @property
    def norm(self) -> float:
        return max(abs(c) for c in self)


@dataclass
class SolvedOrbit:
    r: float
    unknowns: UnknownVector
    traj: Trajectory
    residual_norm: float
    energy: float
    iterations: int = 0
    metadata: dict = field(default_factory=dict)


def to_log(u: UnknownVector) -> np.ndarray:
    u.check()
    return np.log([u.a2, u.a1 - u.a2, u.m2, u.m1 - u.m2])


def from_log(y) -> UnknownVector:
    e = np.exp(np.asarray(y, dtype=float))
    return UnknownVector(float(e[0] + e[1]), float(e[0]), float(e[2] + e[3]), float(e[2]))


def shoot(u: UnknownVector, r: float, opts: IntegratorOptions | None = None):
    """Integrate the guess ``u``; returns ``(ResidualVector, Trajectory)``."""
    u = UnknownVector(*map(float, u)).check()
    traj = integrate_to_collision(InitialData(u.a1, u.a2), MeanPair(u.m1, u.m2), r, opts)
    means = traj.means
    res = ResidualVector(traj.T - 1.0, float(traj.v1[-1]), means.m1 - u.m1, means.m2 - u.m2)
    return res, traj


def residual(u: UnknownVector, r: float, opts: IntegratorOptions | None = None) -> ResidualVector:
    return shoot(u, r, opts)[0]


# ---------------------------------------------------------------------------
# damped Newton


def _safe(fun, y):
    try:
        return fun(y)
    except (DomainError, NoCollision, NoConvergence, OverflowError, FloatingPointError):
        return None


def fd_jacobian(fun: Callable, y: np.ndarray, f0: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Forward-difference Jacobian; falls back to a backward step if the forward guess is rejected."""
    n = len(y)
    jac = np.empty((len(f0), n))
    for j in range(n):
        yj = y.copy()
        h = step * max(1.0, abs(y[j]))
        yj[j] += h
        out = _safe(fun, yj)
        if out is None:
            yj[j] = y[j] - h
            out = _safe(fun, yj)
            if out is None:
                raise NoConvergence(f"Jacobian column {j} cannot be evaluated")
            h = -h
        jac[:, j] = (np.asarray(out[0]) - f0) / h
    return jac


def damped_newton(fun: Callable, y0, tol: float, max_iter: int):
    """Newton iteration on ``fun(y) -> (residual, payload)`` with max-norm backtracking.

    Inadmissible trial points count as an infinite residual.  Returns
    ``(y, residual, payload, iterations)``.
    """
    y = np.asarray(y0, dtype=float)
    out = fun(y)
    f, payload = np.asarray(out[0]), out[1]
    norm = float(np.max(np.abs(f)))
    for it in range(max_iter + 1):
        log.debug("newton it=%d |R|=%.3e", it, norm)
        if norm < tol:
            return y, f, payload, it
        if it == max_iter:
            break
        jac = fd_jacobian(fun, y, f)
        try:
            dy = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at iteration {it}") from exc
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            trial = _safe(fun, y + lam * dy)
            if trial is not None:
                f_new = np.asarray(trial[0])
                norm_new = float(np.max(np.abs(f_new)))
                if np.isfinite(norm_new) and norm_new < norm:
                    y, f, payload, norm = y + lam * dy, f_new, trial[1], norm_new
                    break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at |R|={norm:.3e} (iteration {it})")
    raise NoConvergence(f"no convergence in {max_iter} iterations, |R|={norm:.3e}")


def _orbit(u, res, traj, r, iterations, opts, strategy) -> SolvedOrbit:
    return SolvedOrbit(
        r=r,
        unknowns=u,
        traj=traj,
        residual_norm=res.norm,
        energy=float(traj.energy[0]),
        iterations=iterations,
        metadata={
            "rel_tol": opts.rel_tol,
            "abs_tol": opts.abs_tol,
            "collision_threshold": opts.collision_threshold,
            "steps": traj.n_steps,
            "strategy": strategy,
        },
    )


def newton_solve(u0: UnknownVector, r: float, tol: float = 1e-10, max_iter: int = 40,
                 opts: IntegratorOptions | None = None, strategy: str = "full") -> SolvedOrbit:
    """Solve the shooting system at homotopy parameter ``r``.

    ``strategy="full"`` runs Newton on all four unknowns at once.  ``"nested"``
    solves the mean-value equations in an outer 2x2 Newton whose every
    evaluation shoots for the starting heights with an inner 2x2 Newton.
    """
    r = check_r(r)
    opts = opts or IntegratorOptions()
    if strategy == "nested":
        return _nested_solve(u0, r, tol, max_iter, opts)
    if strategy != "full":
        raise ValueError(f"unknown strategy {strategy!r}")

    def fun(y):
        res, traj = shoot(from_log(y), r, opts)
        return np.array(res), (res, traj)

    y, _, (res, traj), its = damped_newton(fun, to_log(UnknownVector(*u0)), tol, max_iter)
    return _orbit(from_log(y), res, traj, r, its, opts, strategy)


def _nested_solve(u0, r, tol, max_iter, opts) -> SolvedOrbit:
    # Plain Picard on the means diverges for r > 0 (the solution is a repelling
    # fixed point of the mean map), so the outer equation M(m) = m gets Newton too.
    u = UnknownVector(*u0).check()
    warm = {"y": np.log([u.a2, u.a1 - u.a2]), "its": 0}

    def inner(m1, m2):
        def fun(y):
            a2, gap = np.exp(y)
            v = UnknownVector(a2 + gap, a2, m1, m2)
            res, traj = shoot(v, r, opts)
            return np.array(res[:2]), (res, traj, v)

        y, _, payload, its = damped_newton(fun, warm["y"], tol, max_iter)
        warm["y"] = y
        warm["its"] += its
        return payload

    def outer(z):
        m2, mgap = np.exp(z)
        res, traj, v = inner(m2 + mgap, m2)
        return np.array(res[2:]), (res, traj, v)

    _, _, (res, traj, v), its = damped_newton(outer, np.log([u.m2, u.m1 - u.m2]), tol, max_iter)
    log.debug("nested: %d outer, %d inner iterations", its, warm["its"])
    return _orbit(v, res, traj, r, its, opts, "nested")


# ---------------------------------------------------------------------------
# r = 1 seed


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)


def reduced_r1_fall(a1: float, a2: float) -> tuple[float, float]:
    """Collision time and mean of q2 when q1 is frozen at a1 and r = 1.

    With q1 constant the mean-field force on q2 is the constant 2/a1**2, so
    q2'' = -2/q2**2 - 2/a1**2.  Writing q2 = a2 sin(theta)**2 makes the energy
    quadrature analytic on [0, pi/2].
    """
    c = 2.0 / a1**2
    theta = 0.25 * math.pi * (_GL_NODES + 1.0)
    s2 = np.sin(theta) ** 2
    dt = 2.0 * a2 * s2 / np.sqrt(4.0 / a2 + 2.0 * c * a2 * s2)
    T = 0.25 * math.pi * float(np.dot(_GL_WEIGHTS, dt))
    iq = 0.25 * math.pi * float(np.dot(_GL_WEIGHTS, a2 * s2 * dt))
    return T, iq / T


def seed_r1(tol: float = 1e-14, max_iter: int = 50) -> UnknownVector:
    """Starting point at r = 1 from the reduced 2x2 problem in (q1(0), q2(0))."""
    ratio = r1_mean_ratio()

    def fun(y):
        a1, a2 = np.exp(y)
        T, m2 = reduced_r1_fall(a1, a2)
        return np.array([T - 1.0, m2 / a1 - ratio]), None

    y, *_ = damped_newton(fun, np.log([3.0, 1.3]), tol, max_iter)
    a1, a2 = (float(v) for v in np.exp(y))
    return UnknownVector(a1, a2, a1, ratio * a1)


# ---------------------------------------------------------------------------
# symmetric extension


def extend_symmetric(orb: SolvedOrbit) -> Trajectory:
    """Periodic orbit on [0, 2T] obtained by running the half orbit backwards.

    Positions mirror around the collision, velocities flip sign; the running
    integrals continue so that the means are unchanged.
    """
    tr = orb.traj
    T = tr.T
    rev = slice(-2, None, -1)
    cat = np.concatenate
    return Trajectory(
        t=cat([tr.t, 2.0 * T - tr.t[rev]]),
        q1=cat([tr.q1, tr.q1[rev]]),
        q2=cat([tr.q2, tr.q2[rev]]),
        v1=cat([tr.v1, -tr.v1[rev]]),
        v2=cat([tr.v2, -tr.v2[rev]]),
        energy=cat([tr.energy, tr.energy[rev]]),
        iq1=cat([tr.iq1, 2.0 * tr.iq1[-1] - tr.iq1[rev]]),
        iq2=cat([tr.iq2, 2.0 * tr.iq2[-1] - tr.iq2[rev]]),
        r=tr.r,
        meanfield=tr.meanfield,
        n_steps=tr.n_steps,
    )
