"""Brute-force Monte Carlo oracle for the analytic coverage results.

Each trial realizes every AP class as a point process in a square window
centred on the typical user (the origin), picks the serving AP by the
weighted criterion max T_mk x^(-alpha_mk), draws i.i.d. Exp(1) fading,
computes SINR against same-RAT interference (open + closed, server
excluded), then drops an independent user PPP, associates every user by
the same criterion, and counts the users landing on the tagged AP.  The
trial rate is exactly (W_serving / load) * log2(1 + SINR).

Reproducibility contract: the random stream of class (m,k) in trial t is
derived from (seed, t, m, k, access) and the user stream from (seed, t),
so results are bit-identical for any worker count or block schedule, and
deleting a class leaves every other stream untouched (which is what makes
"removing closed APs never lowers SINR at fixed seed" a per-trial
property, not merely a distributional one).

Load counting is exact but pruned: a user u served by the tagged AP x*
must have x* as its nearest serving-class AP, hence d(u, x*) <= D/sqrt(2)
where D is the distance from x* to its nearest same-class neighbour whose
direction (from x*) falls in the same eighth-of-plane sector as u's.
[Proof: both directions lie in one half-open octant, so they differ by
less than pi/4; the perpendicular-bisector condition d(u,x*) <= d(u,x)
forces |u - x*| cos(angle) <= |x - x*|/2 with cos(angle) > 1/sqrt(2).]
Users outside every sector bound are discarded wholesale; the survivors
(a few hundred out of tens of thousands) get exact nearest-neighbour and
cross-class weight checks.  `_tagged_user_count_reference` implements the
unpruned full association and the tests hold the two equal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .coverage import CcdfCurve
from .model import ApClass, ClassId, NetworkConfig, require_valid

__all__ = [
    "SimSettings",
    "TrialOutcome",
    "EmpiricalSummary",
    "sample_deployment",
    "run_trial",
    "run_batch",
    "default_rate_grid",
    "default_sinr_grid",
]

_ACCESS_CODE = {"open": 1, "closed": 2}  # user stream reserves (t, 0, 0, 0)


@dataclass(frozen=True)
class SimSettings:
    """Simulation controls.

    window_km         side of the square window, user at its centre
    trials            number of independent trials
    seed              root seed; every stream derives from (seed, trial, ...)
    deployment        "ppp" | "grid", or a per-ClassId mapping
    parallel_workers  process count; results are worker-count invariant
    """

    window_km: float = 20.0
    trials: int = 100_000
    seed: int = 0
    deployment: str | Mapping[ClassId, str] = "ppp"
    parallel_workers: int = 1


@dataclass(frozen=True)
class TrialOutcome:
    """One trial's view of the typical user.

    serving is None when no open AP landed in the window (vanishingly rare
    at sane densities); load counts the typical user itself plus the other
    users on the tagged AP.
    """

    serving: ClassId | None
    distance_km: float
    sinr_linear: float
    load: int
    rate_bps: float


@dataclass
class EmpiricalSummary:
    sinr_ccdf: CcdfCurve
    rate_ccdf: CcdfCurve
    association_freq: dict[ClassId, float]
    load_histogram: dict[ClassId, np.ndarray]
    mean_cell_area: dict[ClassId, float]
    trial_count: int
    far_serving_trials: int = 0
    mean_ap_count: dict[ClassId, float] = field(default_factory=dict)


def default_rate_grid() -> np.ndarray:
    """Log-spaced rate grid (bps) used when the caller does not pass one."""
    return np.logspace(3.0, 9.0, 61)


def default_sinr_grid() -> np.ndarray:
    """Linear SINR grid covering -20..60 dB in 1 dB steps."""
    return 10.0 ** (np.arange(-20.0, 60.5, 1.0) / 10.0)


def _deployment_for(settings: SimSettings, cid: ClassId) -> str:
    mode = settings.deployment
    if isinstance(mode, str):
        out = mode
    else:
        out = mode.get(cid, "ppp")
    if out not in ("ppp", "grid"):
        raise ValueError(f"unknown deployment mode {out!r} for {cid.label()}")
    return out


def _class_rng(seed: int, trial: int, cid: ClassId) -> np.random.Generator:
    key = (trial, cid.rat, cid.tier, _ACCESS_CODE[cid.access])
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _user_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial, 0, 0, 0)))


def sample_deployment(
    cls: ApClass, settings: SimSettings, rng: np.random.Generator, mode: str | None = None
) -> np.ndarray:
    """Sample one trial's AP positions for a class, shape (n, 2), km.

    "ppp": Poisson(lam * window^2) points uniform in the window.
    "grid": square lattice of spacing 1/sqrt(lam) with a common random
    offset per trial (so the typical user's position within the lattice
    cell is uniform rather than pinned).
    """
    if mode is None:
        mode = _deployment_for(settings, cls.id)
    w = settings.window_km
    half = w / 2.0
    if cls.density <= 0.0:
        return np.empty((0, 2))
    if mode == "ppp":
        n = rng.poisson(cls.density * w * w)
        return rng.uniform(-half, half, size=(n, 2))
    spacing = 1.0 / math.sqrt(cls.density)
    off = rng.uniform(0.0, spacing, size=2)
    xs = np.arange(off[0], w, spacing) - half
    ys = np.arange(off[1], w, spacing) - half
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack((gx.ravel(), gy.ravel()))


def _min_dist2(points: np.ndarray, sites: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Squared distance from each point to its nearest site (chunked)."""
    out = np.empty(points.shape[0])
    for s in range(0, points.shape[0], chunk):
        blk = points[s : s + chunk]
        d2 = (blk[:, 0, None] - sites[None, :, 0]) ** 2 + (blk[:, 1, None] - sites[None, :, 1]) ** 2
        out[s : s + chunk] = d2.min(axis=1)
    return out


def _octant(xy: np.ndarray) -> np.ndarray:
    """Direction sector 0..7 of each row vector (eighth-of-plane bins)."""
    return (np.floor(np.arctan2(xy[:, 1], xy[:, 0]) / (math.pi / 4.0)).astype(np.int64) + 4) % 8


def _tagged_user_count(
    config: NetworkConfig,
    points: dict[ClassId, np.ndarray],
    serving: ApClass,
    server_idx: int,
    users: np.ndarray,
) -> int:
    """Number of users associated with the tagged AP (exact, pruned)."""
    if users.shape[0] == 0:
        return 0
    server = points[serving.id][server_idx]
    own = np.delete(points[serving.id], server_idx, axis=0)
    d_u2 = (users[:, 0] - server[0]) ** 2 + (users[:, 1] - server[1]) ** 2

    if own.shape[0]:
        rel_o = own - server
        d_o2 = rel_o[:, 0] ** 2 + rel_o[:, 1] ** 2
        reach2 = np.full(8, np.inf)
        np.minimum.at(reach2, _octant(rel_o), d_o2)
        reach2 /= 2.0  # (D / sqrt(2))^2 per sector
        # cheap global cut first, sector-exact cut on the remainder
        near = np.flatnonzero(d_u2 <= np.max(reach2))
        if near.size == 0:
            return 0
        d_n2 = d_u2[near]
        cand = d_n2 <= reach2[_octant(users[near] - server)]
        cu = users[near[cand]]
        cd2 = d_n2[cand]
        if cu.shape[0] == 0:
            return 0
        # exact own-class check: the tagged AP must be u's nearest; ties go
        # to the tagged AP (zero-probability event, any rule works).  Only
        # own-class sites within 2 d_max of the server can beat it.
        own_near = own[d_o2 <= 4.0 * cd2.max()]
        if own_near.shape[0]:
            keep = _min_dist2(cu, own_near) >= cd2
            cu = cu[keep]
            cd2 = cd2[keep]
    else:
        cu = users
        cd2 = d_u2

    if cu.shape[0] == 0:
        return 0
    with np.errstate(divide="ignore"):
        w_srv = serving.weight * cd2 ** (-serving.exponent / 2.0)
    d_max = math.sqrt(cd2.max())
    for cls in config.open_classes():
        if cls.id == serving.id or cu.shape[0] == 0:
            continue
        pts = points[cls.id]
        if pts.shape[0] == 0:
            continue
        # a class-c site can only strip user u if it sits within the
        # exclusion radius g(d_u) = (T_c/T_s)^(1/a_c) d_u^(a_s/a_c) of u,
        # hence within d_max + g(d_max) of the server
        g_max = (cls.weight / serving.weight) ** (1.0 / cls.exponent) * d_max ** (
            serving.exponent / cls.exponent
        )
        d_s2 = (pts[:, 0] - server[0]) ** 2 + (pts[:, 1] - server[1]) ** 2
        sites = pts[d_s2 <= (d_max + g_max) ** 2]
        if sites.shape[0] == 0:
            continue
        with np.errstate(divide="ignore"):
            w_other = cls.weight * _min_dist2(cu, sites) ** (-cls.exponent / 2.0)
        keep = (w_srv > w_other) | ((w_srv == w_other) & (serving.id < cls.id))
        cu = cu[keep]
        w_srv = w_srv[keep]
    return int(cu.shape[0])


def _tagged_user_count_reference(
    config: NetworkConfig,
    points: dict[ClassId, np.ndarray],
    serving: ApClass,
    server_idx: int,
    users: np.ndarray,
) -> int:
    """Unpruned full-association load count; oracle for _tagged_user_count."""
    if users.shape[0] == 0:
        return 0
    best_w = np.full(users.shape[0], -np.inf)
    on_server = np.zeros(users.shape[0], dtype=bool)
    for cls in config.open_classes():
        pts = points[cls.id]
        if pts.shape[0] == 0:
            continue
        d2 = (users[:, 0, None] - pts[None, :, 0]) ** 2 + (users[:, 1, None] - pts[None, :, 1]) ** 2
        nn = d2.argmin(axis=1)
        with np.errstate(divide="ignore"):
            w = cls.weight * d2[np.arange(len(users)), nn] ** (-cls.exponent / 2.0)
        better = w > best_w  # strict: earlier (smaller) ClassId wins ties
        best_w[better] = w[better]
        if cls.id == serving.id:
            on_server = better & (nn == server_idx)
        else:
            on_server &= ~better
    return int(on_server.sum())


def _run_trial_full(config: NetworkConfig, settings: SimSettings, trial: int):
    """One trial: (TrialOutcome, per-present-class AP counts)."""
    classes = config.present_classes()
    points: dict[ClassId, np.ndarray] = {}
    gains: dict[ClassId, np.ndarray] = {}
    counts = np.zeros(len(classes))
    for k, cls in enumerate(classes):
        rng = _class_rng(settings.seed, trial, cls.id)
        pts = sample_deployment(cls, settings, rng)
        points[cls.id] = pts
        gains[cls.id] = rng.exponential(1.0, pts.shape[0])
        counts[k] = pts.shape[0]

    best = None  # (ApClass, index, distance, weight); ties -> smallest ClassId
    for cls in classes:
        if not cls.id.is_open:
            continue
        pts = points[cls.id]
        if pts.shape[0] == 0:
            continue
        d2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        i = int(np.argmin(d2))
        dist = math.sqrt(d2[i])
        weight = cls.weight * dist ** (-cls.exponent) if dist > 0.0 else math.inf
        if best is None or weight > best[3]:
            best = (cls, i, dist, weight)
    if best is None:
        return TrialOutcome(None, math.nan, 0.0, 1, 0.0), counts
    serving, sidx, sdist, _ = best

    power_received = serving.power * gains[serving.id][sidx] * sdist ** (-serving.exponent)
    interference = 0.0
    for cls in config.classes_of_rat(serving.id.rat):
        pts = points[cls.id]
        if pts.shape[0] == 0:
            continue
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        with np.errstate(divide="ignore"):
            contrib = cls.power * gains[cls.id] * r2 ** (-cls.exponent / 2.0)
        if cls.id == serving.id:
            contrib = contrib.copy()
            contrib[sidx] = 0.0
        interference += float(contrib.sum())
    denom = interference + config.noise_for(serving.id.rat)
    sinr = power_received / denom if denom > 0.0 else math.inf

    load = 1
    if config.user_density > 0.0:
        urng = _user_rng(settings.seed, trial)
        w = settings.window_km
        n_users = urng.poisson(config.user_density * w * w)
        users = urng.uniform(-w / 2.0, w / 2.0, size=(n_users, 2))
        load += _tagged_user_count(config, points, serving, sidx, users)

    rate = serving.bandwidth / load * math.log2(1.0 + sinr)
    return TrialOutcome(serving.id, sdist, sinr, load, rate), counts


def run_trial(config: NetworkConfig, settings: SimSettings, trial_index: int) -> TrialOutcome:
    """Simulate a single trial (see module docstring for the procedure)."""
    return _run_trial_full(config, settings, trial_index)[0]


def _run_block(config: NetworkConfig, settings: SimSettings, start: int, stop: int):
    n = stop - start
    open_ids = [c.id for c in config.open_classes()]
    rank = {cid: k for k, cid in enumerate(open_ids)}
    serving = np.full(n, -1, dtype=np.int16)
    dist = np.empty(n)
    sinr = np.empty(n)
    load = np.empty(n, dtype=np.int64)
    rate = np.empty(n)
    count_sum = np.zeros(len(config.present_classes()))
    for k in range(n):
        out, counts = _run_trial_full(config, settings, start + k)
        if out.serving is not None:
            serving[k] = rank[out.serving]
        dist[k] = out.distance_km
        sinr[k] = out.sinr_linear
        load[k] = out.load
        rate[k] = out.rate_bps
        count_sum += counts
    return serving, dist, sinr, load, rate, count_sum


def _block_worker(args):
    return _run_block(*args)


def run_batch(
    config: NetworkConfig,
    settings: SimSettings,
    rate_grid: np.ndarray | None = None,
    sinr_grid: np.ndarray | None = None,
) -> EmpiricalSummary:
    """Run all trials and aggregate empirical distributions.

    The aggregation is a deterministic ordered merge over fixed trial
    blocks, so the summary depends only on (config, settings, grids) —
    not on the worker count or scheduling.
    """
    require_valid(config)
    if settings.trials < 1:
        raise ValueError("need at least one trial")
    for cls in config.present_classes():
        _deployment_for(settings, cls.id)  # validate modes up front
    rate_grid = default_rate_grid() if rate_grid is None else np.asarray(rate_grid, dtype=float)
    sinr_grid = default_sinr_grid() if sinr_grid is None else np.asarray(sinr_grid, dtype=float)

    block = 512
    spans = [(s, min(s + block, settings.trials)) for s in range(0, settings.trials, block)]
    tasks = [(config, settings, s, e) for s, e in spans]
    if settings.parallel_workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=settings.parallel_workers) as pool:
            results = list(pool.map(_block_worker, tasks))
    else:
        results = [_run_block(*t) for t in tasks]

    serving = np.concatenate([r[0] for r in results])
    dist = np.concatenate([r[1] for r in results])
    sinr = np.concatenate([r[2] for r in results])
    load = np.concatenate([r[3] for r in results])
    rate = np.concatenate([r[4] for r in results])
    count_sum = sum(r[5] for r in results)

    trials = settings.trials
    open_classes = config.open_classes()
    present = config.present_classes()

    far = int(np.sum(dist[serving >= 0] > settings.window_km / 4.0))
    if far:
        warnings.warn(
            f"{far} trials served from beyond window/4; "
            "window may be too small for this density mix",
            stacklevel=2,
        )

    freq: dict[ClassId, float] = {}
    load_hist: dict[ClassId, np.ndarray] = {}
    per_class_sinr: dict[ClassId, np.ndarray] = {}
    per_class_rate: dict[ClassId, np.ndarray] = {}
    for k, cls in enumerate(open_classes):
        mask = serving == k
        m = int(mask.sum())
        freq[cls.id] = m / trials
        load_hist[cls.id] = np.bincount(load[mask]) if m else np.zeros(1, dtype=np.int64)
        if m:
            per_class_sinr[cls.id] = (sinr[mask][:, None] > sinr_grid[None, :]).mean(axis=0)
            per_class_rate[cls.id] = (rate[mask][:, None] > rate_grid[None, :]).mean(axis=0)
        else:
            per_class_sinr[cls.id] = np.zeros_like(sinr_grid)
            per_class_rate[cls.id] = np.zeros_like(rate_grid)

    sinr_vals = (sinr[:, None] > sinr_grid[None, :]).mean(axis=0)
    rate_vals = (rate[:, None] > rate_grid[None, :]).mean(axis=0)

    mean_count = {cls.id: count_sum[k] / trials for k, cls in enumerate(present)}
    area = settings.window_km**2
    mean_cell_area = {
        cid: freq[cid] * area / mean_count[cid] if mean_count[cid] > 0 else math.nan
        for cid in freq
    }

    return EmpiricalSummary(
        sinr_ccdf=CcdfCurve("sinr_linear", sinr_grid, sinr_vals, per_class_sinr, dict(freq)),
        rate_ccdf=CcdfCurve("rate_bps", rate_grid, rate_vals, per_class_rate, dict(freq)),
        association_freq=freq,
        load_histogram=load_hist,
        mean_cell_area=mean_cell_area,
        trial_count=trials,
        far_serving_trials=far,
        mean_ap_count=mean_count,
    )
