"""Offload design: bias/density optimization and percentile-rate solving.

For a two-class, equal-exponent, interference-limited network the SIR
coverage as a function of the bias ratio b = B_2/B_1 reduces to

    S(b) = 1 / (Z1 + 1 + x) + 1 / (Z2 + 1 + 1/x),
    x = a (P_hat b)^(2/alpha),   Z_i = Z(tau_i, alpha, 1),

with a = lam_2/lam_1 and P_hat = P_2/P_1: x is the RAT-2 association
probability odds.  The maximizer is x = Z1/Z2, giving the closed-form
optimal bias, the offload fraction A_2 = Z1/(Z1+Z2) and a maximum coverage
(Z1+Z2)/(Z1+Z2+Z1 Z2) that does not depend on the density ratio at all.

The rate objective has no such closed maximizer (the load couples to b
through A_ij), so the rate solver brackets by exhaustive coarse grid and
polishes with golden-section search in log-bias, recording every
evaluation so multimodality would be visible in the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .association import association_probability, rat_offload_fraction
from .coverage import (
    rate_coverage,
    rate_coverage_closed_form,
    rate_coverage_mean_load,
    sinr_coverage,
)
from .model import ClassId, NetworkConfig, db_to_linear, linear_to_db
from .numerics import QuadratureSettings, z_integral

__all__ = [
    "TwoRatScenario",
    "OptimizationResult",
    "SolverError",
    "two_class_sir_coverage",
    "optimal_bias_sir",
    "optimal_density_sir",
    "optimal_bias_rate",
    "golden_section_max",
    "bias_sweep",
    "percentile_rate",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


class SolverError(RuntimeError):
    """A solver could not bracket or reach its target."""


@dataclass(frozen=True)
class TwoRatScenario:
    """Two open classes on different RATs, equal exponents, no noise.

    density_ratio  a = lam_2 / lam_1
    bias_ratio     b = B_2 / B_1
    power_ratio    P_1 / P_2 (enters the optimal-bias closed form)
    """

    class1: ClassId
    class2: ClassId
    density_ratio: float
    bias_ratio: float = 1.0
    power_ratio: float = 1.0

    def __post_init__(self):
        if self.class1.rat == self.class2.rat:
            raise ValueError("scenario classes must live on different RATs")
        if not (self.class1.is_open and self.class2.is_open):
            raise ValueError("scenario classes must both be open")
        if self.density_ratio <= 0.0 or self.bias_ratio <= 0.0 or self.power_ratio <= 0.0:
            raise ValueError("scenario ratios must be positive")

    @classmethod
    def from_config(cls, config: NetworkConfig) -> "TwoRatScenario":
        """Extract the scenario from a two-open-class NetworkConfig.

        Requires exactly two open classes on distinct RATs with a common
        exponent, no closed classes, and zero noise everywhere.
        """
        open_classes = config.open_classes()
        if len(open_classes) != 2:
            raise ValueError(f"need exactly two open classes, got {len(open_classes)}")
        if len(open_classes) != len(config.present_classes()):
            raise ValueError("closed classes are outside the two-RAT scenario")
        c1, c2 = open_classes
        if c1.exponent != c2.exponent:
            raise ValueError("scenario requires one common path-loss exponent")
        if any(config.noise_for(r) != 0.0 for r in config.rats()):
            raise ValueError("scenario assumes zero noise (SIR regime)")
        return cls(
            class1=c1.id,
            class2=c2.id,
            density_ratio=c2.density / c1.density,
            bias_ratio=c2.bias / c1.bias,
            power_ratio=c1.power / c2.power,
        )


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of a bias search.

    b_opt             linear bias ratio B_2/B_1
    objective_at_opt  coverage at the optimum
    offload_fraction  A_2 at the optimum
    trace             (bias, objective) evaluations; empty for closed forms
    boundary_warning  maximizer hit the search bracket edge
    """

    b_opt: float
    objective_at_opt: float
    offload_fraction: float
    trace: tuple[tuple[float, float], ...] = ()
    boundary_warning: bool = False


def two_class_sir_coverage(
    scenario: TwoRatScenario, tau1: float, tau2: float, alpha: float, bias_ratio: float
) -> float:
    """SIR coverage of the two-class scenario at a given bias ratio."""
    if alpha <= 2.0:
        raise ValueError(f"exponent must exceed 2 (got {alpha})")
    z1 = z_integral(tau1, alpha, 1.0)
    z2 = z_integral(tau2, alpha, 1.0)
    x = scenario.density_ratio * (bias_ratio / scenario.power_ratio) ** (2.0 / alpha)
    return 1.0 / (z1 + 1.0 + x) + 1.0 / (z2 + 1.0 + 1.0 / x)


def optimal_bias_sir(
    scenario: TwoRatScenario, tau1: float, tau2: float, alpha: float
) -> OptimizationResult:
    """Closed-form SIR-coverage-maximizing bias ratio.

    b_opt = (P_1/P_2) (Z1 / (a Z2))^(alpha/2); the offload fraction at the
    optimum, Z1/(Z1+Z2), depends only on the thresholds, and the optimal
    coverage (Z1+Z2)/(Z1+Z2+Z1 Z2) is invariant to the density ratio.
    """
    if tau1 <= 0.0 or tau2 <= 0.0:
        raise ValueError("SIR thresholds must be positive for the closed form")
    if alpha <= 2.0:
        raise ValueError(f"exponent must exceed 2 (got {alpha})")
    z1 = z_integral(tau1, alpha, 1.0)
    z2 = z_integral(tau2, alpha, 1.0)
    b_opt = scenario.power_ratio * (z1 / (scenario.density_ratio * z2)) ** (alpha / 2.0)
    return OptimizationResult(
        b_opt=b_opt,
        objective_at_opt=(z1 + z2) / (z1 + z2 + z1 * z2),
        offload_fraction=z1 / (z1 + z2),
        trace=(),
    )


def optimal_density_sir(
    scenario: TwoRatScenario, tau1: float, tau2: float, alpha: float, fixed_bias_ratio: float
) -> float:
    """SIR-coverage-maximizing density ratio a at a fixed bias ratio.

    Same stationarity condition as the bias optimum, solved for a:
    a_opt = (P_1/(P_2 b))^(2/alpha) Z1/Z2.
    """
    if tau1 <= 0.0 or tau2 <= 0.0:
        raise ValueError("SIR thresholds must be positive for the closed form")
    if fixed_bias_ratio <= 0.0:
        raise ValueError("bias ratio must be positive")
    z1 = z_integral(tau1, alpha, 1.0)
    z2 = z_integral(tau2, alpha, 1.0)
    return (scenario.power_ratio / fixed_bias_ratio) ** (2.0 / alpha) * z1 / z2


def golden_section_max(f, lo: float, hi: float, tol: float, trace: list | None = None):
    """Golden-section maximization of a unimodal f on [lo, hi].

    Returns (x_best, f_best); every evaluation is appended to `trace`.
    """
    if hi <= lo:
        raise ValueError("need lo < hi")

    def probe(x):
        y = f(x)
        if trace is not None:
            trace.append((x, y))
        return y

    a, b = lo, hi
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc = probe(c)
    yd = probe(d)
    while h > tol:
        if yc >= yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + _INV_PHI2 * h
            yc = probe(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + _INV_PHI * h
            yd = probe(d)
    if yc >= yd:
        return c, yc
    return d, yd


def _rate_objective(method: str, settings):
    """A callable (config, rho_common) -> rate coverage for one method name."""
    if method == "closedform":
        return lambda cfg, rho=None: rate_coverage_closed_form(cfg, rho_common=rho)
    if method == "meanload":
        return lambda cfg, rho=None: rate_coverage_mean_load(cfg, settings, rho_common=rho)
    if method == "theorem1":
        return lambda cfg, rho=None: rate_coverage(cfg, settings=settings, rho_common=rho)
    raise ValueError(f"unknown method {method!r}")


def optimal_bias_rate(
    config: NetworkConfig,
    target: ClassId | None = None,
    bracket_db: tuple[float, float] = (-20.0, 20.0),
    coarse_step_db: float = 1.0,
    tol_db: float = 0.01,
    method: str = "closedform",
    settings: QuadratureSettings | None = None,
) -> OptimizationResult:
    """Rate-coverage-maximizing association bias for one open class.

    The objective is the mean-load rate coverage (closed form by default,
    per the equal-exponent zero-noise regime it was derived for; `method`
    can switch to the quadrature mean-load route or the full load-averaged
    coverage).  Search: evaluate a coarse dB grid over `bracket_db` (which
    must span at least 40 dB), then refine around the best grid point with
    golden-section search down to `tol_db`.  If the coarse maximum sits on
    the bracket edge the result carries boundary_warning=True.
    """
    lo_db, hi_db = bracket_db
    if hi_db - lo_db < 40.0:
        raise ValueError("bias bracket must span at least 40 dB")
    if target is None:
        scenario = TwoRatScenario.from_config(config)
        target = scenario.class2
    if not target.is_open:
        raise ValueError(f"target class {target.label()} must be open")
    config.class_for(target)  # raise early on unknown class
    objective = _rate_objective(method, settings)

    trace: list[tuple[float, float]] = []

    def f_db(b_db: float) -> float:
        b = db_to_linear(b_db)
        value = objective(config.with_bias(target, b))
        trace.append((b, value))
        return value

    steps = int(round((hi_db - lo_db) / coarse_step_db))
    grid = [lo_db + k * coarse_step_db for k in range(steps + 1)]
    values = [f_db(x) for x in grid]
    k_best = max(range(len(grid)), key=values.__getitem__)
    boundary = k_best in (0, len(grid) - 1)

    if boundary:
        b_db, best = grid[k_best], values[k_best]
    else:
        # f_db records its own evaluations, so no separate probe trace needed
        b_db, best = golden_section_max(f_db, grid[k_best - 1], grid[k_best + 1], tol_db)
        if values[k_best] > best:
            b_db, best = grid[k_best], values[k_best]

    b_opt = db_to_linear(b_db)
    tuned = config.with_bias(target, b_opt)
    offload = rat_offload_fraction(tuned, target.rat)
    return OptimizationResult(
        b_opt=b_opt,
        objective_at_opt=best,
        offload_fraction=offload,
        trace=tuple(trace),
        boundary_warning=boundary,
    )


def bias_sweep(
    config: NetworkConfig,
    target: ClassId,
    grid_db,
    metric: str = "rate_coverage",
    coverage_target: float = 0.95,
    method: str = "theorem1",
    settings: QuadratureSettings | None = None,
) -> list[tuple[float, float]]:
    """Evaluate a coverage metric over a grid of biases (dB) for one class.

    metric: sir_coverage | rate_coverage | percentile_rate.  Works for any
    number of classes; only `target`'s bias moves.
    """
    if not target.is_open:
        raise ValueError(f"target class {target.label()} must be open")
    config.class_for(target)  # raise early on unknown class
    if metric not in ("sir_coverage", "rate_coverage", "percentile_rate"):
        raise ValueError(f"unknown metric {metric!r}")
    rate_obj = _rate_objective(method, settings) if metric == "rate_coverage" else None
    out = []
    for b_db in grid_db:
        tuned = config.with_bias(target, db_to_linear(b_db))
        if metric == "sir_coverage":
            value = sinr_coverage(tuned, settings)
        elif metric == "rate_coverage":
            value = rate_obj(tuned)
        else:
            value = percentile_rate(tuned, coverage_target, method=method, settings=settings)
        out.append((float(b_db), value))
    return out


def percentile_rate(
    config: NetworkConfig,
    coverage_target: float,
    method: str = "theorem1",
    settings: QuadratureSettings | None = None,
    rel_tol: float = 1e-3,
) -> float:
    """The rate rho with R(rho) = coverage_target (e.g. 0.95 -> rho_95).

    R is nonincreasing in a common rate threshold, so bisection on log-rho
    applies.  The bracket starts at [1 bps, max bandwidth] and expands
    upward on demand; failure to reach the target at 1 bps raises
    SolverError.
    """
    if not (0.0 < coverage_target < 1.0):
        raise ValueError(f"coverage target must be in (0,1), got {coverage_target}")
    base = _rate_objective(method, settings)

    def r_of(rho: float) -> float:
        return base(config, rho)

    lo = 1.0
    if r_of(lo) < coverage_target:
        raise SolverError(
            f"rate coverage at 1 bps is below the target {coverage_target}; no solution"
        )
    hi = max(c.bandwidth for c in config.open_classes())
    expansions = 0
    while r_of(hi) >= coverage_target:
        lo = hi
        hi *= 10.0
        expansions += 1
        if expansions > 12:
            raise SolverError("could not bracket the percentile rate from above")
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        if r_of(mid) >= coverage_target:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
