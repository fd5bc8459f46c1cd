"""Collinear Helium dynamics interpolating between instantaneous and mean repulsion.

Both electrons live on the ray (0, inf) with the nucleus (charge 2) at the
origin.  ``q2`` is the electron that falls into the nucleus, ``q1 > q2`` the
one that stays almost frozen.  The electron-electron repulsion is the convex
combination

    r / (m1 - m2)**2 + (1 - r) / (q1 - q2)**2

of the interaction of the mean positions ``m1, m2`` and the instantaneous one.
Everything is dimensionless.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .errors import DomainError


class PhaseState(NamedTuple):
    q1: float
    q2: float
    v1: float = 0.0
    v2: float = 0.0


class MeanPair(NamedTuple):
    m1: float
    m2: float


def check_r(r: float) -> float:
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"homotopy parameter r={r!r} outside [0, 1]")
    return r


def _check_state(q1: float, q2: float) -> None:
    if not q2 > 0.0:
        raise DomainError(f"q2={q2!r} must be positive")
    if not q1 > q2:
        raise DomainError(f"electrons crossed: q1={q1!r} <= q2={q2!r}")


def _check_means(m1: float, m2: float) -> None:
    if not m1 > m2:
        raise DomainError(f"mean gap m1 - m2 = {m1 - m2!r} must be positive")


def interaction(q1: float, q2: float, m1: float, m2: float, r: float) -> float:
    """Repulsive acceleration felt by q1 (and, with opposite sign, by q2)."""
    return r / (m1 - m2) ** 2 + (1.0 - r) / (q1 - q2) ** 2


def vector_field(s: PhaseState, m: MeanPair, r: float) -> tuple[float, float]:
    """Accelerations ``(a1, a2)`` of the two electrons."""
    _check_state(s.q1, s.q2)
    _check_means(m.m1, m.m2)
    r = check_r(r)
    rep = interaction(s.q1, s.q2, m.m1, m.m2, r)
    return -2.0 / s.q1**2 + rep, -2.0 / s.q2**2 - rep


def potential(q1: float, q2: float, m1: float, m2: float, r: float) -> float:
    # -d/dq1 of the mean term must give +r/D**2, hence the minus sign
    return -2.0 / q1 - 2.0 / q2 - r * (q1 - q2) / (m1 - m2) ** 2 + (1.0 - r) / (q1 - q2)


def energy(s: PhaseState, m: MeanPair, r: float) -> float:
    """First integral of :func:`vector_field` for fixed means.

    E = (v1^2 + v2^2)/2 - 2/q1 - 2/q2 - r (q1 - q2)/(m1 - m2)^2 + (1 - r)/(q1 - q2)
    """
    _check_state(s.q1, s.q2)
    _check_means(m.m1, m.m2)
    r = check_r(r)
    return 0.5 * (s.v1**2 + s.v2**2) + potential(s.q1, s.q2, m.m1, m.m2, r)


def jerk1(s: PhaseState, r: float) -> float:
    """Time derivative of a1 along the flow (the means are constants)."""
    if not s.q1 > s.q2:
        raise DomainError(f"electrons crossed: q1={s.q1!r} <= q2={s.q2!r}")
    r = check_r(r)
    return 4.0 * s.v1 / s.q1**3 - 2.0 * (1.0 - r) * (s.v1 - s.v2) / (s.q1 - s.q2) ** 3


def r1_mean_ratio() -> float:
    """m2/m1 forced by a constant q1 at r = 1: 2/q1^2 = 1/(m1 - m2)^2."""
    return 1.0 - 1.0 / math.sqrt(2.0)
