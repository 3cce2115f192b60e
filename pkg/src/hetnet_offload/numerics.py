"""Numerical kernels shared by the analytic modules.

Everything here is deterministic: same inputs, same outputs, no global
state besides memoization caches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import scipy.integrate
import scipy.special

__all__ = [
    "QuadratureSettings",
    "DEFAULT_SETTINGS",
    "NumericalError",
    "semi_infinite_integral",
    "decaying_integral",
    "z_integral",
    "stirling2",
    "pv_area_moment",
    "TYPICAL_CELL_SHAPE",
    "TAGGED_CELL_SHAPE",
    "AREA_BIAS_FACTOR",
]

# Shape parameters of the Gamma approximation to the (area-weighted) Poisson
# Voronoi cell area at unit density: C(1) ~ Gamma(3.5, rate 3.5), and the
# cell containing an independent uniform point ~ Gamma(4.5, rate 3.5).
TYPICAL_CELL_SHAPE = 3.5
TAGGED_CELL_SHAPE = 4.5


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances for the semi-infinite integrals.

    rel_tol / abs_tol bound the quadrature error estimate;
    max_subdivisions caps the adaptive interval count.
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200


DEFAULT_SETTINGS = QuadratureSettings()

# Tighter tolerances used internally where results feed 1e-8-level checks
# (association probabilities summing to one, closed-form cross-validation).
TIGHT_SETTINGS = QuadratureSettings(rel_tol=1e-11, abs_tol=1e-14, max_subdivisions=500)


class NumericalError(RuntimeError):
    """Quadrature failed to converge; carries the partial estimate."""

    def __init__(self, message: str, partial: float | None = None):
        super().__init__(message)
        self.partial = partial


def _quad(f, lo, hi, settings: QuadratureSettings) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", scipy.integrate.IntegrationWarning)
        value, abserr = scipy.integrate.quad(
            f,
            lo,
            hi,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.max_subdivisions,
        )
    for w in caught:
        if issubclass(w.category, scipy.integrate.IntegrationWarning):
            raise NumericalError(
                f"quadrature on [{lo}, {hi}] did not converge: {w.message}",
                partial=value,
            )
    return value


def semi_infinite_integral(
    f: Callable[[float], float],
    lower: float = 0.0,
    settings: QuadratureSettings | None = None,
) -> float:
    """Integrate f over [lower, inf) for an eventually-decaying integrand.

    The infinite tail is handled by the adaptive Gauss-Kronrod rule after
    the standard rational change of variable mapping [lower, inf) onto a
    finite interval.  Raises NumericalError (with the partial estimate
    attached) if the requested tolerances cannot be met.
    """
    settings = settings or DEFAULT_SETTINGS
    return _quad(f, lower, math.inf, settings)


def decaying_integral(
    g: Callable[[float], float],
    settings: QuadratureSettings | None = None,
    tail_ratio: float = 1e-16,
) -> float:
    """Integrate g over [0, inf) when g is decreasing with its peak at 0.

    The upper limit is chosen where the integrand has fallen below
    ``tail_ratio`` of its peak value (doubling/halving search), then the
    finite interval is integrated adaptively.  Intended for the
    exp(-sum_k c_k u^e_k) kernels of the association and coverage
    integrals, whose truncated tail is provably below the cut level times
    the remaining mass.
    """
    settings = settings or DEFAULT_SETTINGS
    peak = g(0.0)
    if peak <= 0.0:
        return 0.0
    cut = peak * tail_ratio
    upper = 1.0
    if g(upper) > cut:
        while g(upper) > cut and upper < 2.0**64:
            upper *= 2.0
    else:
        while g(upper / 2.0) <= cut and upper > 2.0**-60:
            upper /= 2.0
    return _quad(g, 0.0, upper, settings)


@lru_cache(maxsize=None)
def _z_cached(a: float, b: float, c: float) -> float:
    if a == 0.0:
        return 0.0
    if math.isinf(a):
        return math.inf
    if b == 4.0:
        # For exponent 4 the integrand 1/(1+u^2) has an arctan primitive.
        return math.sqrt(a) * (math.pi / 2.0 - math.atan(math.sqrt(c / a)))
    p = b / 2.0
    # integral_L^inf du/(1+u^p) with L=(c/a)^(2/b) reduces to an incomplete
    # Beta function; the regularized-beta argument simplifies to a/(a+c).
    t0 = a / (a + c) if not math.isinf(c) else 0.0
    complete = scipy.special.beta(1.0 - 1.0 / p, 1.0 / p)
    frac = scipy.special.betainc(1.0 - 1.0 / p, 1.0 / p, t0)
    return a ** (2.0 / b) * complete * frac / p

def z_integral(a: float, b: float, c: float) -> float:
    """Z(a, b, c) = a^(2/b) * integral_{(c/a)^(2/b)}^inf du / (1 + u^(b/2)).

    The building block of every interference term: a is the (scaled) SINR
    threshold, b the path-loss exponent of the interfering class, c the
    lower-bound offset (c=0 for closed interferers, which can be arbitrarily
    close).  Z(1,4,1) = pi/4 and Z(1,4,0) = pi/2.
    """
    if b <= 2.0:
        raise ValueError(f"path-loss exponent must exceed 2 (got {b})")
    if a < 0.0 or c < 0.0:
        raise ValueError(f"Z arguments must be non-negative (a={a}, c={c})")
    return _z_cached(float(a), float(b), float(c))


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind: partitions of n items into k blocks."""
    if n < 0 or k < 0:
        raise ValueError("stirling2 arguments must be non-negative")
    if n == 0 and k == 0:
        return 1
    if n == 0 or k == 0:
        return 0
    if k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def pv_area_moment(j: int) -> float:
    """j-th moment of the unit-density typical cell area, E[C(1)^j].

    Under the Gamma(3.5, 3.5) area law this is Gamma(3.5+j) / (Gamma(3.5)
    * 3.5^j); the first three moments are 1, 9/7, 2.020408...
    """
    if j < 0:
        raise ValueError("moment order must be non-negative")
    return math.exp(
        math.lgamma(TYPICAL_CELL_SHAPE + j)
        - math.lgamma(TYPICAL_CELL_SHAPE)
        - j * math.log(TYPICAL_CELL_SHAPE)
    )


# E[C(1)^2]: the area bias linking per-user and per-cell averages.  Kept in
# exact rational form; the literature's 1.28 is this value rounded.
AREA_BIAS_FACTOR = 9.0 / 7.0
