"""Association probabilities, serving-distance law, and cell-load models.

The typical user at the origin picks, among open classes, the class whose
nearest AP maximizes T_mk * d^(-alpha_mk) with T = P * B.  With every class
an independent PPP, the chance that class (i,j) wins is

    A_ij = 2 pi lam_ij int_0^inf z exp(-pi sum_mk G_mk z^(2 a_ij / a_mk)) dz,
    G_mk = lam_mk * (T_mk / T_ij)^(2 / a_mk),

the sum running over open classes.  When all open classes share one
exponent the integral collapses to A_ij = lam_ij / sum G_mk.

Loads: with users a PPP of density lam_u, the number of *other* users
sharing the AP serving the typical user is negative-binomial; its PGF and
moments follow from a Gamma(3.5, 3.5) area law for the typical cell of a
unit-density Voronoi tessellation, area-biased to Gamma(4.5, 3.5) for the
cell a random user lands in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ClassId, NetworkConfig
from .numerics import (
    AREA_BIAS_FACTOR,
    TAGGED_CELL_SHAPE,
    TYPICAL_CELL_SHAPE,
    NumericalError,
    QuadratureSettings,
    TIGHT_SETTINGS,
    decaying_integral,
    pv_area_moment,
    stirling2,
)

__all__ = [
    "association_probability",
    "association_probabilities",
    "rat_offload_fraction",
    "mean_association_area",
    "served_distance_pdf",
    "LoadDistribution",
    "load_ratio",
    "tagged_load_distribution",
    "typical_load_pmf",
    "tagged_load_moment",
]


def _serving_class(config: NetworkConfig, serving: ClassId):
    cls = config.class_for(serving)
    if not serving.is_open or cls.density <= 0.0:
        raise ValueError(f"serving class {serving.label()} must be open with positive density")
    return cls


def _g_terms(config: NetworkConfig, serving: ClassId) -> list[tuple[float, float]]:
    """(G_mk, alpha_ij/alpha_mk) per open class, for integrands in u = z^2."""
    ref = _serving_class(config, serving)
    terms = []
    for cls in config.open_classes():
        weight_ratio = cls.weight / ref.weight
        g = cls.density * weight_ratio ** (2.0 / cls.exponent)
        terms.append((g, ref.exponent / cls.exponent))
    return terms


def association_probability(
    config: NetworkConfig,
    serving: ClassId,
    settings: QuadratureSettings | None = None,
) -> float:
    """Probability that the typical user is served by class `serving`."""
    cls = _serving_class(config, serving)
    terms = _g_terms(config, serving)
    if all(expo == 1.0 for _, expo in terms):
        return cls.density / sum(g for g, _ in terms)

    def integrand(u: float) -> float:
        return math.exp(-math.pi * sum(g * u**expo for g, expo in terms))

    settings = settings or TIGHT_SETTINGS
    return math.pi * cls.density * decaying_integral(integrand, settings)


def association_probabilities(
    config: NetworkConfig, settings: QuadratureSettings | None = None
) -> dict[ClassId, float]:
    """A_ij for every open class.  Sums to 1 over a valid config."""
    return {
        cls.id: association_probability(config, cls.id, settings)
        for cls in config.open_classes()
    }


def rat_offload_fraction(
    config: NetworkConfig, rat: int, settings: QuadratureSettings | None = None
) -> float:
    """Fraction of users served by any open class of one RAT."""
    total = 0.0
    found = False
    for cls in config.open_classes():
        if cls.id.rat == rat:
            total += association_probability(config, cls.id, settings)
            found = True
    if not found:
        raise ValueError(f"RAT {rat} has no open class with positive density")
    return total


def mean_association_area(
    config: NetworkConfig, serving: ClassId, settings: QuadratureSettings | None = None
) -> float:
    """Mean area (km^2) of a serving-class association cell, A_ij / lam_ij."""
    cls = _serving_class(config, serving)
    return association_probability(config, serving, settings) / cls.density


def served_distance_pdf(
    config: NetworkConfig,
    serving: ClassId,
    y,
    settings: QuadratureSettings | None = None,
):
    """PDF of the user-to-server distance given service by class `serving`.

    f(y) = (2 pi lam_ij / A_ij) y exp(-pi sum_mk G_mk y^(2 a_ij / a_mk)).
    Accepts a scalar or array of distances (km).
    """
    cls = _serving_class(config, serving)
    terms = _g_terms(config, serving)
    a = association_probability(config, serving, settings)
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0.0):
        raise ValueError("distances must be non-negative")
    expo_sum = np.zeros_like(y_arr)
    for g, expo in terms:
        expo_sum += g * (y_arr**2) ** expo
    out = (2.0 * math.pi * cls.density / a) * y_arr * np.exp(-math.pi * expo_sum)
    return float(out) if np.isscalar(y) else out


# ---------------------------------------------------------------------------
# Cell load
# ---------------------------------------------------------------------------


def load_ratio(
    config: NetworkConfig, serving: ClassId, settings: QuadratureSettings | None = None
) -> float:
    """Mean users per serving-class cell, r = lam_u * A_ij / lam_ij."""
    cls = _serving_class(config, serving)
    if config.user_density < 0.0:
        raise ValueError("user density must be non-negative")
    return config.user_density * association_probability(config, serving, settings) / cls.density


@dataclass(frozen=True)
class LoadDistribution:
    """Truncated PMF of the number of other users on the tagged AP.

    serving  class whose tagged AP is described
    ratio    r = lam_u * A_ij / lam_ij
    pmf      pmf[n] = P(O = n) for n = 0..n_max
    n_max    truncation index (inclusive)
    """

    serving: ClassId
    ratio: float
    pmf: np.ndarray
    n_max: int

    def mean(self) -> float:
        return float(np.arange(self.pmf.size) @ self.pmf)

    def total_mass(self) -> float:
        return float(self.pmf.sum())


_MAX_PMF_TERMS = 200_000


def _nb_pmf(r: float, shape: float, n_max: int | None) -> np.ndarray:
    """Negative-binomial pmf with Gamma mixing shape `shape` and rate 3.5.

    p(0) = (3.5 / (3.5+r))^shape,  p(n+1)/p(n) = (n+shape)/(n+1) * r/(3.5+r).

    With n_max=None the truncation point is chosen adaptively so the
    discarded tail mass is below 1e-10 and the discarded tail of the mean
    below 1e-9 * (1+r); geometric-ratio bounds make both checks cheap.
    """
    if r < 0.0:
        raise ValueError(f"load ratio must be non-negative (got {r})")
    rate = TYPICAL_CELL_SHAPE  # 3.5, shared by both load laws
    q = r / (rate + r) if r > 0.0 else 0.0
    p0 = (rate / (rate + r)) ** shape

    if n_max is not None:
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        pmf = np.empty(n_max + 1)
        pmf[0] = p0
        for n in range(n_max):
            pmf[n + 1] = pmf[n] * ((n + shape) / (n + 1.0)) * q
        return pmf

    floor = max(50, math.ceil(4.0 * r) + 20)
    out = [p0]
    n = 0
    while True:
        ratio = ((n + shape) / (n + 1.0)) * q
        if n >= floor and ratio < 1.0:
            # ratios decrease in n, so the remaining tail is dominated by a
            # geometric series with this ratio
            geo = ratio / (1.0 - ratio)
            tail_mass = out[-1] * geo
            tail_mean = out[-1] * (n * geo + ratio / (1.0 - ratio) ** 2)
            if tail_mass <= 1e-10 and tail_mean <= 1e-9 * (1.0 + r):
                break
        out.append(out[-1] * ratio)
        n += 1
        if n > _MAX_PMF_TERMS:
            raise NumericalError(f"load pmf did not truncate by n={n} (r={r})")
    return np.asarray(out)


def tagged_load_distribution(
    config: NetworkConfig,
    serving: ClassId,
    n_max: int | None = None,
    settings: QuadratureSettings | None = None,
) -> LoadDistribution:
    """Distribution of the *other* users sharing the typical user's AP.

    The tagged AP's cell is area-biased (the user already landed in it), so
    the mixing area is Gamma(4.5, 3.5) and the mean is (9/7) r rather
    than r.
    """
    r = load_ratio(config, serving, settings)
    pmf = _nb_pmf(r, TAGGED_CELL_SHAPE, n_max)
    return LoadDistribution(serving=serving, ratio=r, pmf=pmf, n_max=pmf.size - 1)


def typical_load_pmf(
    config: NetworkConfig,
    serving: ClassId,
    n_max: int | None = None,
    settings: QuadratureSettings | None = None,
) -> LoadDistribution:
    """Distribution of users on the *typical* AP of a class (no area bias)."""
    r = load_ratio(config, serving, settings)
    pmf = _nb_pmf(r, TYPICAL_CELL_SHAPE, n_max)
    return LoadDistribution(serving=serving, ratio=r, pmf=pmf, n_max=pmf.size - 1)


def tagged_load_moment(
    config: NetworkConfig,
    serving: ClassId,
    n: int,
    settings: QuadratureSettings | None = None,
) -> float:
    """E[O^n] for the tagged-AP other-user count.

    E[O^n] = sum_{k=1..n} r^k S(n,k) E[C(1)^(k+1)] with S the Stirling
    numbers of the second kind; n = 1 gives the (9/7) r mean.
    """
    if n < 0:
        raise ValueError("moment order must be non-negative")
    if n == 0:
        return 1.0
    r = load_ratio(config, serving, settings)
    return sum(r**k * stirling2(n, k) * pv_area_moment(k + 1) for k in range(1, n + 1))


# re-export for callers collapsing the load pmf to its mean
MEAN_LOAD_BIAS = AREA_BIAS_FACTOR
