"""Symmetric frozen planet orbits of collinear Helium under interpolated electron repulsion."""

from .bounds import ConstantsLedger, compute_constants, f_ratio, verify_orbit
from .continuation import Branch, predict, sweep
from .errors import BranchStall, DomainError, NoCollision, NoConvergence, SchemaError
from .freefall import constant_g_fall, fall_time, gamma_fn, kappa_gamma, kappa_quadrature
from .integrate import (
    InitialData,
    IntegratorOptions,
    Trajectory,
    integrate_to_collision,
    resample_uniform,
    trajectory_means,
)
from .model import MeanPair, PhaseState, energy, jerk1, vector_field
from .solve import (
    SolvedOrbit,
    UnknownVector,
    extend_symmetric,
    newton_solve,
    residual,
    seed_r1,
)

__version__ = "0.1.0"
