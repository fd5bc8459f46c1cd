"""Fall times and time-averaged heights of one-dimensional free falls from rest.

Two independent routes are kept side by side: closed forms through the Gamma
function, and direct quadrature of the fall integrals

    tau      = int_0^q0 dq / sqrt(2 (f(q0) - f(q)))
    int q dt = int_0^q0 q dq / sqrt(2 (f(q0) - f(q)))

for the homogeneous potentials f(q) = -mu / q**alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NoConvergence

# Lanczos approximation, g = 7, nine terms; relative error ~1e-15 for x >= 0.5
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(z: float) -> float:
    # z is the shifted argument x - 1
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    return acc


def _lanczos_gamma(x: float) -> float:
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * _lanczos_series(z)


def gamma_fn(x: float) -> float:
    """Gamma function for real x > 0.

    Arguments below 40 are shifted into [1, 2) with Gamma(x + 1) = x Gamma(x)
    so that ratios of Gammas a whole number apart come out exact.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"gamma_fn needs x > 0, got {x!r}")
    if x == math.floor(x) and x <= 171:
        return float(math.factorial(int(x) - 1))
    if x >= 40.0:
        return _lanczos_gamma(x)
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    scale = 1.0
    while x >= 2.0:
        x -= 1.0
        scale *= x
    while x < 1.0:
        scale /= x
        x += 1.0
    return scale * _lanczos_gamma(x)


def log_gamma(x: float) -> float:
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


def _gamma_ratio(num: tuple, den: tuple) -> float:
    if max(num + den) < 150.0:
        value = 1.0
        for a in num:
            value *= gamma_fn(a)
        for b in den:
            value /= gamma_fn(b)
        return value
    return math.exp(sum(map(log_gamma, num)) - sum(map(log_gamma, den)))


def beta_fn(a: float, b: float) -> float:
    return _gamma_ratio((a, b), (a + b,))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    return alpha


def kappa_gamma(alpha: float) -> float:
    """Average-to-initial height ratio for the fall in -1/q**alpha, closed form."""
    a = _check_alpha(alpha)
    return _gamma_ratio(((4.0 + a) / (2.0 * a), (1.0 + a) / a),
                        ((2.0 + a) / a, (2.0 + a) / (2.0 * a)))


def fall_time(alpha: float, q0: float, strength: float = 0.5) -> float:
    """Time to fall from rest at ``q0`` into the origin in the potential -strength/q**alpha.

    The default ``strength=0.5`` is the normalisation in which

        tau = q0**((alpha + 2)/2) / alpha * B((2 + alpha)/(2 alpha), 1/2);

    any other strength k rescales tau by 1/sqrt(2k).
    """
    a = _check_alpha(alpha)
    if not (q0 > 0.0 and strength > 0.0):
        raise DomainError("q0 and strength must be positive")
    tau = q0 ** ((a + 2.0) / 2.0) / a * beta_fn((2.0 + a) / (2.0 * a), 0.5)
    return tau / math.sqrt(2.0 * strength)


@dataclass(frozen=True)
class FreeFallResult:
    alpha: Optional[float]  # None for constant acceleration
    q0: float
    tau: float
    qbar: float

    @property
    def kappa(self) -> float:
        return self.qbar / self.q0


def constant_g_fall(q0: float, g: float) -> FreeFallResult:
    """Fall with constant acceleration g: q(t) = q0 - g t**2 / 2."""
    if not (q0 > 0.0 and g > 0.0):
        raise DomainError("q0 and g must be positive")
    return FreeFallResult(None, float(q0), math.sqrt(2.0 * q0 / g), 2.0 * q0 / 3.0)


def homogeneous_fall(alpha: float, q0: float, strength: float = 0.5) -> FreeFallResult:
    tau = fall_time(alpha, q0, strength)
    return FreeFallResult(float(alpha), float(q0), tau, kappa_gamma(alpha) * q0)


# ---------------------------------------------------------------------------
# quadrature route


@lru_cache(maxsize=None)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def graded_gauss_legendre(fun: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                          levels: int, n: int, ratio: float = 0.15) -> float:
    """Gauss-Legendre on panels shrinking geometrically towards the endpoint ``b``.

    Algebraic endpoint singularities (b - x)**p are integrated to exponential
    accuracy in ``levels``.
    """
    x, w = _leggauss(n)
    length = b - a
    cuts = [a] + [b - length * ratio**k for k in range(1, levels + 1)] + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (hi - lo)
        total += half * float(np.dot(w, fun(lo + half * (x + 1.0))))
    return total


def adaptive_graded(fun, a: float, b: float, tol: float = 1e-12, max_levels: int = 60) -> float:
    prev = None
    for levels in range(8, max_levels + 1, 4):
        for n in (24, 32):
            value = graded_gauss_legendre(fun, a, b, levels, n)
            if prev is not None and abs(value - prev) <= tol * max(abs(value), 1e-300):
                return value
            prev = value
    raise NoConvergence(f"graded quadrature did not settle to {tol:g} on [{a}, {b}]")


def kappa_quadrature(alpha: float, mu: float = 1.0, q0: float = 1.0) -> float:
    """Average-to-initial height ratio for the fall in -mu/q**alpha, by quadrature.

    Substituting q = q0 cos(theta)**(2/alpha) removes the inverse square-root
    singularity at q0 and the vanishing weight at the origin; what remains is a
    power-type singularity at theta = pi/2 handled by graded panels.
    """
    a = _check_alpha(alpha)
    if not (mu > 0.0 and q0 > 0.0):
        raise DomainError("mu and q0 must be positive")

    def f(q):
        return -mu / q**a

    def weight(theta):
        c = np.cos(theta)
        q = q0 * c ** (2.0 / a)
        dq = (2.0 * q0 / a) * c ** ((2.0 - a) / a) * np.sin(theta)
        # q underflows to 0 near pi/2 for small alpha; the weight is 0 there
        with np.errstate(divide="ignore", invalid="ignore"):
            w = dq / np.sqrt(f(q0) - f(q))
        return q, np.where(q > 0.0, w, 0.0)

    def numerator(theta):
        q, w = weight(theta)
        return q * w

    def denominator(theta):
        return weight(theta)[1]

    half_pi = 0.5 * math.pi
    return adaptive_graded(numerator, 0.0, half_pi) / (q0 * adaptive_graded(denominator, 0.0, half_pi))


def fall_integrals(f: Callable[[np.ndarray], np.ndarray], q0: float) -> tuple[float, float]:
    """``(tau, int_0^tau q dt)`` for a fall from rest at q0 with dq/dt = -sqrt(2(f(q0) - f(q))).

    ``f`` must be increasing on (0, q0] and vectorised.  Uses q = q0 cos(phi)**2,
    which turns the square-root singularity at q0 into a smooth integrand.
    """
    if not q0 > 0.0:
        raise DomainError("q0 must be positive")
    f0 = float(f(np.array([q0]))[0])

    def weight(phi):
        c = np.cos(phi)
        q = q0 * c * c
        return q, 2.0 * q0 * c * np.sin(phi) / np.sqrt(2.0 * (f0 - f(q)))

    half_pi = 0.5 * math.pi
    tau = adaptive_graded(lambda p: weight(p)[1], 0.0, half_pi)
    iq = adaptive_graded(lambda p: np.prod(weight(p), axis=0), 0.0, half_pi)
    return tau, iq


def mean_fall(f: Callable[[np.ndarray], np.ndarray], q0: float) -> FreeFallResult:
    tau, iq = fall_integrals(f, q0)
    return FreeFallResult(None, float(q0), tau, iq / tau)
