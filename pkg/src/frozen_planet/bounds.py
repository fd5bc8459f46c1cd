"""Explicit a-priori constants and an auditor that checks solved orbits against them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import check_r

DEFAULT_EPS = 1.0 - math.pi / 4.0  # 1 - kappa(2), the -1/q**2 mean fall
REPORT_TOL = 1e-8
_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConstantsLedger:
    eps: float
    c0: float
    c1: float
    c2: float
    c3: float
    c4: float
    kappa: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def compute_constants(eps: float = DEFAULT_EPS) -> ConstantsLedger:
    """Evaluate the chain eps -> c0 -> c1 -> c2 -> c3 -> c4 -> kappa.

    c2 is the smaller of c1/145 (gap bound (1 - r) c1 on r <= 144/145) and
    1/30 (the bound on r >= 144/145).
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    c0 = 260.0 + 3.0 / (2.0 * eps**2)
    c1 = 1.0 / (3.0 * (c0 + 2.0) ** 2)
    c2 = min(c1 / 145.0, 1.0 / 30.0)
    c3 = 2.0 + 1.0 / (2.0 * c2**2)
    c4 = (c3 + 1.0) / (math.sqrt(2.0) - 1.0)
    return ConstantsLedger(eps, c0, c1, c2, c3, c4, max(c4, 1.0 / c2))


def f_ratio(r: float) -> float:
    """sqrt(1 + r) / (sqrt(1 + r) - sqrt(r)); lower bound factor for m1/m2."""
    r = check_r(r)
    s = math.sqrt(1.0 + r)
    return s / (s - math.sqrt(r))


@dataclass(frozen=True)
class BoundCheck:
    name: str
    inequality: str
    left: float
    right: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.right - self.left


@dataclass
class BoundReport:
    r: float
    checks: list
    report_tol: float
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c for c in self.checks if not c.passed]

    def outcome(self) -> dict:
        return {c.name: c.passed for c in self.checks}

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            out.append(f"{flag} {c.name:<22} {c.inequality:<42} margin={c.margin:.6e}")
        return out


def _golden_min(fun, lo: float, hi: float, tol: float = 1e-13) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = fun(d)
    t = 0.5 * (a + b)
    return t, fun(t)


def minimum_gap(traj) -> float:
    """Minimum of q1 - q2, refined on the dense output around the grid minimum."""
    gap = traj.q1 - traj.q2
    k = int(np.argmin(gap))
    best = float(gap[k])
    if traj.dense is None:
        return best
    lo = traj.t[max(k - 1, 0)]
    hi = traj.t[min(k + 1, len(traj.t) - 1)]

    def g(t):
        row = traj.dense(t)
        return row[1] - row[2]

    _, refined = _golden_min(g, float(lo), float(hi))
    return min(best, float(refined))


def verify_orbit(orb, ledger: ConstantsLedger | None = None,
                 report_tol: float = REPORT_TOL) -> BoundReport:
    """Audit one solved orbit against the monotonicity, gap, mean-value and size bounds.

    Each check is stated as ``left <= right``; it passes when
    ``right - left >= -report_tol``.
    """
    ledger = ledger or compute_constants()
    tr = orb.traj
    r = float(orb.r)
    q1, q2, v1, v2 = tr.q1, tr.q2, tr.v1, tr.v2
    delta = float(q1[0] - q2[0])
    m1, m2 = tr.means
    gap_min = minimum_gap(tr)
    checks = []

    def add(name, text, left, right):
        left, right = float(left), float(right)
        checks.append(BoundCheck(name, text, left, right, right - left >= -report_tol))

    add("q2_decreasing", "0 <= min(q2[k] - q2[k+1])", 0.0, np.min(-np.diff(q2)))
    add("q1_increasing", "0 <= min(q1[k+1] - q1[k])", 0.0, np.min(np.diff(q1)))
    with np.errstate(invalid="ignore"):
        rel_vel = v1[1:] - v2[1:]
    add("relative_velocity", "0 <= v1 - v2 for t > 0", 0.0, np.min(rel_vel))
    add("q2_start_lower", "1 <= q2(0)", 1.0, q2[0])
    add("gap_lower", "Delta <= min(q1 - q2)", delta, gap_min)
    add("gap_vs_c1", "(1 - r) c1 <= Delta", (1.0 - r) * ledger.c1, delta)
    add("gap_vs_c2", "c2 <= Delta", ledger.c2, delta)
    add("mean_ratio", "m2 <= (1 - sqrt(r/(1+r))) m1", m2, (1.0 - math.sqrt(r / (1.0 + r))) * m1)
    add("q2_start_upper", "q2(0) <= c3", q2[0], ledger.c3)
    add("q1_end_upper", "q1(T) <= c4", q1[-1], ledger.c4)
    add("compactness", "max(q1, 1/(q1 - q2)) <= kappa", max(np.max(q1), 1.0 / gap_min), ledger.kappa)
    add("energy_drift", "max|E(t) - E(0)| <= report_tol", tr.energy_drift, report_tol)
    add("mean_fall", "m2 <= (1 - eps) q2(0)", m2, (1.0 - ledger.eps) * q2[0])

    info = {
        "delta": delta,
        "min_gap": gap_min,
        "max_abs_v1": float(np.max(np.abs(v1))),
        "admissible_eps": float(1.0 - m2 / q2[0]),
        "q1_strictly_increasing": bool(np.all(np.diff(q1) > 0)),
        "eps": ledger.eps,
    }
    return BoundReport(r, checks, report_tol, info)
