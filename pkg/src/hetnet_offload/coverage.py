"""SINR and rate coverage of the typical user.

Conditioned on service by open class (i,j) at distance y, Rayleigh fading
turns the coverage probability into a Laplace-transform product, giving

    S_ij(tau) = (2 pi lam_ij / A_ij) int_0^inf y exp(
        - tau sigma_i^2 y^{a_ij} / P_ij
        - pi [ sum_k D_ij(k, tau) y^{2 a_ij / a_ik}
             + sum_mk G_ij(m,k) y^{2 a_ij / a_mk} ] ) dy,

where the D sum runs over the tiers of the serving RAT (same-RAT
interference beyond the association exclusion radius; closed tiers have no
exclusion) and the G sum over all open classes (the serving-distance law).
Every D term is built from the kernel Z(a, b, c) of `numerics`.

Rates: an AP serving n+1 users splits its bandwidth evenly, so the typical
user's rate is W / (n+1) * log2(1 + SINR) and rate coverage mixes S_ij over
the tagged-AP load pmf.  A mean-load approximation and (for equal
exponents, no noise) a fully closed form are provided as cheap variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .association import (
    MEAN_LOAD_BIAS,
    association_probabilities,
    load_ratio,
    tagged_load_distribution,
)
from .model import ClassId, NetworkConfig
from .numerics import QuadratureSettings, decaying_integral, z_integral

__all__ = [
    "shannon_threshold",
    "d_coefficient",
    "sinr_coverage_conditioned",
    "sinr_coverage",
    "sinr_ccdf",
    "rate_coverage",
    "rate_ccdf",
    "rate_coverage_mean_load",
    "rate_coverage_closed_form",
    "CcdfCurve",
    "ClosedFormInapplicableError",
]


class ClosedFormInapplicableError(ValueError):
    """A closed-form path was requested outside its validity conditions."""


def shannon_threshold(x: float) -> float:
    """SINR needed for spectral efficiency x: t(x) = 2^x - 1."""
    if x < 0.0:
        raise ValueError(f"spectral efficiency must be non-negative (got {x})")
    if x > 1000.0:  # 2^x overflows float64 past ~1024
        return math.inf
    return 2.0**x - 1.0


@dataclass(frozen=True)
class CcdfCurve:
    """A coverage curve over a common threshold grid.

    axis       "sinr_linear" or "rate_bps"
    grid       thresholds, increasing
    values     P(metric > grid[k]) for the typical user
    per_class  conditional curves given the serving class
    weights    association probabilities; values = sum_ij weights * per_class
    """

    axis: str
    grid: np.ndarray
    values: np.ndarray
    per_class: Mapping[ClassId, np.ndarray]
    weights: Mapping[ClassId, float]


def d_coefficient(config: NetworkConfig, serving: ClassId, tier: int, tau: float) -> float:
    """Same-RAT interference coefficient D_ij(tier, tau).

    Sums the open part (interferers pushed beyond the association exclusion
    radius, offset T_hat/P_hat = bias ratio) and the closed part (offset 0)
    of the given tier of the serving RAT.
    """
    ref = config.class_for(serving)
    if not serving.is_open:
        raise ValueError(f"serving class {serving.label()} must be open")
    total = 0.0
    found = False
    for cls in config.classes_of_rat(serving.rat):
        if cls.id.tier != tier:
            continue
        found = True
        p_hat = cls.power / ref.power
        offset = (cls.bias / ref.bias) if cls.id.is_open else 0.0
        total += cls.density * p_hat ** (2.0 / cls.exponent) * z_integral(tau, cls.exponent, offset)
    if not found:
        raise ValueError(f"RAT {serving.rat} has no tier {tier} with positive density")
    return total


@dataclass(frozen=True)
class _ClassContext:
    """Per-serving-class quantities that do not depend on the threshold."""

    cid: ClassId
    density: float
    exponent: float
    assoc: float
    noise_over_power: float  # sigma_i^2 / P_ij
    g_terms: tuple[tuple[float, float], ...]  # (G_mk, a_ij/a_mk)
    rat_classes: tuple  # present classes of the serving RAT


def _class_context(config: NetworkConfig, serving: ClassId, assoc: float) -> _ClassContext:
    ref = config.class_for(serving)
    g_terms = []
    for cls in config.open_classes():
        w = cls.weight / ref.weight
        g_terms.append((cls.density * w ** (2.0 / cls.exponent), ref.exponent / cls.exponent))
    return _ClassContext(
        cid=serving,
        density=ref.density,
        exponent=ref.exponent,
        assoc=assoc,
        noise_over_power=config.noise_for(serving.rat) / ref.power,
        g_terms=tuple(g_terms),
        rat_classes=config.classes_of_rat(serving.rat),
    )


def _interference_terms(ctx: _ClassContext, config: NetworkConfig, tau: float):
    """All (coefficient, exponent) pairs of exp(-pi sum c u^e) in u = y^2."""
    ref = config.class_for(ctx.cid)
    terms = list(ctx.g_terms)
    for cls in ctx.rat_classes:
        p_hat = cls.power / ref.power
        offset = (cls.bias / ref.bias) if cls.id.is_open else 0.0
        d = cls.density * p_hat ** (2.0 / cls.exponent) * z_integral(tau, cls.exponent, offset)
        terms.append((d, ctx.exponent / cls.exponent))
    return terms


def _conditional_coverage(
    ctx: _ClassContext,
    config: NetworkConfig,
    tau: float,
    settings: QuadratureSettings | None,
    allow_closed_form: bool,
) -> float:
    if math.isinf(tau):
        return 0.0
    terms = _interference_terms(ctx, config, tau)
    noise_coef = tau * ctx.noise_over_power
    if allow_closed_form and noise_coef == 0.0 and all(e == 1.0 for _, e in terms):
        return ctx.density / (ctx.assoc * sum(c for c, _ in terms))

    half_alpha = ctx.exponent / 2.0

    def integrand(u: float) -> float:
        s = noise_coef * u**half_alpha
        for c, e in terms:
            s += math.pi * c * u**e
        return math.exp(-s)

    return math.pi * ctx.density / ctx.assoc * decaying_integral(integrand, settings)


def sinr_coverage_conditioned(
    config: NetworkConfig,
    serving: ClassId,
    tau: float,
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
) -> float:
    """P(SINR > tau | served by `serving`).

    With no noise and a single common exponent the integral collapses to
    lam_ij / (A_ij (sum_k D + sum_mk G)); `allow_closed_form=False` forces
    the quadrature route (the two must agree, and tests hold them to it).
    """
    if tau < 0.0:
        raise ValueError(f"SINR threshold must be non-negative (got {tau})")
    from .association import association_probability

    assoc = association_probability(config, serving)
    ctx = _class_context(config, serving, assoc)
    return _conditional_coverage(ctx, config, tau, settings, allow_closed_form)


def sinr_coverage(
    config: NetworkConfig,
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
) -> float:
    """P(SINR > tau_ij) with each class checked against its own threshold."""
    probs = association_probabilities(config)
    total = 0.0
    for cls in config.open_classes():
        tau = config.sinr_threshold_for(cls.id)
        ctx = _class_context(config, cls.id, probs[cls.id])
        total += probs[cls.id] * _conditional_coverage(ctx, config, tau, settings, allow_closed_form)
    return total


def sinr_ccdf(
    config: NetworkConfig,
    taus: Sequence[float],
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
) -> CcdfCurve:
    """SINR CCDF over a common linear threshold grid applied to all classes."""
    grid = np.asarray(taus, dtype=float)
    if np.any(grid < 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("threshold grid must be non-negative and strictly increasing")
    probs = association_probabilities(config)
    per_class: dict[ClassId, np.ndarray] = {}
    for cls in config.open_classes():
        ctx = _class_context(config, cls.id, probs[cls.id])
        per_class[cls.id] = np.array(
            [_conditional_coverage(ctx, config, t, settings, allow_closed_form) for t in grid]
        )
    values = np.zeros_like(grid)
    for cid, curve in per_class.items():
        values += probs[cid] * curve
    return CcdfCurve("sinr_linear", grid, values, per_class, probs)


# ---------------------------------------------------------------------------
# Rate coverage
# ---------------------------------------------------------------------------


def _conditional_rate_coverage(
    ctx: _ClassContext,
    config: NetworkConfig,
    rho: float,
    pmf: np.ndarray,
    bandwidth: float,
    settings: QuadratureSettings | None,
    allow_closed_form: bool,
) -> float:
    """P(rate > rho | serving class), mixing SINR coverage over the load pmf."""
    spectral = rho / bandwidth
    total = 0.0
    for n, weight in enumerate(pmf):
        if weight == 0.0:
            continue
        tau = shannon_threshold(spectral * (n + 1))
        total += weight * _conditional_coverage(ctx, config, tau, settings, allow_closed_form)
    return total


def rate_coverage(
    config: NetworkConfig,
    n_max: int | None = None,
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
    rho_common: float | None = None,
) -> float:
    """P(rate > rho_ij): load-averaged SINR coverage, weighted by association.

    Thresholds come from config.rate_threshold unless `rho_common`
    overrides them all (used by percentile solving and CCDF sweeps).
    """
    probs = association_probabilities(config)
    total = 0.0
    for cls in config.open_classes():
        rho = rho_common if rho_common is not None else config.rate_threshold_for(cls.id)
        if rho < 0.0:
            raise ValueError(f"rate threshold must be non-negative (got {rho})")
        dist = tagged_load_distribution(config, cls.id, n_max)
        ctx = _class_context(config, cls.id, probs[cls.id])
        total += probs[cls.id] * _conditional_rate_coverage(
            ctx, config, rho, dist.pmf, cls.bandwidth, settings, allow_closed_form
        )
    return total


def rate_ccdf(
    config: NetworkConfig,
    rhos: Sequence[float],
    n_max: int | None = None,
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
) -> CcdfCurve:
    """Rate CCDF over a common bits/s grid applied to all classes."""
    grid = np.asarray(rhos, dtype=float)
    if np.any(grid < 0.0) or np.any(np.diff(grid) <= 0.0):
        raise ValueError("rate grid must be non-negative and strictly increasing")
    probs = association_probabilities(config)
    per_class: dict[ClassId, np.ndarray] = {}
    for cls in config.open_classes():
        dist = tagged_load_distribution(config, cls.id, n_max)
        ctx = _class_context(config, cls.id, probs[cls.id])
        per_class[cls.id] = np.array(
            [
                _conditional_rate_coverage(
                    ctx, config, rho, dist.pmf, cls.bandwidth, settings, allow_closed_form
                )
                for rho in grid
            ]
        )
    values = np.zeros_like(grid)
    for cid, curve in per_class.items():
        values += probs[cid] * curve
    return CcdfCurve("rate_bps", grid, values, per_class, probs)


def rate_coverage_mean_load(
    config: NetworkConfig,
    settings: QuadratureSettings | None = None,
    allow_closed_form: bool = True,
    rho_common: float | None = None,
) -> float:
    """Rate coverage with the load pmf collapsed to its mean.

    Each class sees the single effective load 1 + (9/7) r_ij; accurate when
    the load is concentrated, cheap always.
    """
    probs = association_probabilities(config)
    total = 0.0
    for cls in config.open_classes():
        rho = rho_common if rho_common is not None else config.rate_threshold_for(cls.id)
        mean_load = 1.0 + MEAN_LOAD_BIAS * load_ratio(config, cls.id)
        tau = shannon_threshold(rho / cls.bandwidth * mean_load)
        ctx = _class_context(config, cls.id, probs[cls.id])
        total += probs[cls.id] * _conditional_coverage(ctx, config, tau, settings, allow_closed_form)
    return total


def rate_coverage_closed_form(config: NetworkConfig, rho_common: float | None = None) -> float:
    """Closed-form mean-load rate coverage.

    Valid only for interference-limited (zero noise) configs whose present
    classes share one path-loss exponent:

        R = sum_ij lam_ij / (sum_k D_ij(k, t_ij) + sum_mk G_ij(m,k)),
        t_ij = t(rho_ij / W_ij * (1 + 9/7 r_ij)).

    Raises ClosedFormInapplicableError otherwise.
    """
    exps = {c.exponent for c in config.present_classes()}
    if len(exps) > 1:
        raise ClosedFormInapplicableError(f"exponents must all match (got {sorted(exps)})")
    noisy = [rat for rat in config.rats() if config.noise_for(rat) != 0.0]
    if noisy:
        raise ClosedFormInapplicableError(f"noise must be zero for all RATs (RATs {noisy} are noisy)")
    probs = association_probabilities(config)
    total = 0.0
    for cls in config.open_classes():
        rho = rho_common if rho_common is not None else config.rate_threshold_for(cls.id)
        mean_load = 1.0 + MEAN_LOAD_BIAS * load_ratio(config, cls.id)
        tau = shannon_threshold(rho / cls.bandwidth * mean_load)
        if math.isinf(tau):
            continue
        ctx = _class_context(config, cls.id, probs[cls.id])
        coef = sum(c for c, _ in _interference_terms(ctx, config, tau))
        total += cls.density / coef
    return total
