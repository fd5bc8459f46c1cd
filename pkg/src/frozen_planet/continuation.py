"""Parameter continuation of solved orbits in the homotopy parameter r."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BranchStall, DomainError, NoCollision, NoConvergence
from .integrate import IntegratorOptions
from .model import check_r
from .solve import SolvedOrbit, UnknownVector, newton_solve, seed_r1

log = logging.getLogger(__name__)

MIN_STEP = 1e-6
MAX_HALVINGS = 10


@dataclass
class Branch:
    orbits: list = field(default_factory=list)
    predictors: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    stall: str | None = None

    def __len__(self) -> int:
        return len(self.orbits)

    @property
    def r_values(self) -> list:
        return [o.r for o in self.orbits]


def predict(prev: Sequence[SolvedOrbit], r_next: float) -> UnknownVector:
    """Secant extrapolation from the last two members, or a copy of the last one."""
    if not prev:
        raise ValueError("need at least one branch member")
    last = prev[-1]
    if len(prev) < 2 or prev[-2].r == last.r:
        return UnknownVector(*last.unknowns)
    before = prev[-2]
    u1, u0 = np.array(last.unknowns), np.array(before.unknowns)
    guess = u1 + (u1 - u0) * ((r_next - last.r) / (last.r - before.r))
    return UnknownVector(*(float(v) for v in guess))


def sweep(r_from: float, r_to: float, n_steps: int, opts: IntegratorOptions | None = None,
          seed: UnknownVector | None = None, tol: float = 1e-10, max_iter: int = 40,
          raise_on_stall: bool = False) -> Branch:
    """March from ``r_from`` to ``r_to`` over ``n_steps`` equal steps.

    A failed corrector halves the step (at most ten times, never below 1e-6);
    the grid points ``r_from + k (r_to - r_from)/n_steps`` are always hit.
    """
    r_from, r_to = check_r(r_from), check_r(r_to)
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    opts = opts or IntegratorOptions()
    branch = Branch(config={"r_from": r_from, "r_to": r_to, "n_steps": n_steps, "tol": tol,
                            "rel_tol": opts.rel_tol, "abs_tol": opts.abs_tol,
                            "collision_threshold": opts.collision_threshold})
    if seed is None:
        if r_from != 1.0:
            raise ValueError("a seed is required unless the sweep starts at r = 1")
        seed = seed_r1()
    first = newton_solve(seed, r_from, tol, max_iter, opts)
    branch.orbits.append(first)
    branch.predictors.append("seed")
    if r_from == r_to:
        return branch

    grid = [((n_steps - k) * r_from + k * r_to) / n_steps for k in range(1, n_steps)] + [r_to]
    nominal = abs(r_to - r_from) / n_steps
    direction = 1.0 if r_to > r_from else -1.0
    for target in grid:
        halvings = 0
        step = nominal
        while branch.orbits[-1].r != target:
            r_cur = branch.orbits[-1].r
            r_next = target if abs(target - r_cur) <= step * (1 + 1e-12) else r_cur + direction * step
            guess = predict(branch.orbits[-2:], r_next)
            try:
                orb = newton_solve(guess, r_next, tol, max_iter, opts)
            except (NoConvergence, DomainError, NoCollision) as exc:
                branch.failures.append({"r": r_next, "step": step, "error": str(exc)})
                log.info("corrector failed at r=%.6g (step %.3g): %s", r_next, step, exc)
                halvings += 1
                step *= 0.5
                if halvings > MAX_HALVINGS or step < MIN_STEP:
                    branch.stall = (f"step halving bottomed out at r={r_cur!r} "
                                    f"(step {step:.3g}): {exc}")
                    if raise_on_stall:
                        raise BranchStall(branch.stall, branch) from exc
                    return branch
                continue
            branch.orbits.append(orb)
            branch.predictors.append("secant" if len(branch.orbits) > 2 else "copy")
    return branch
