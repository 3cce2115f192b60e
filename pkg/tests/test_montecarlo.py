"""Simulator: deployments, RNG contracts, pruned-vs-exhaustive load counts."""

import math

import numpy as np
import pytest

from conftest import dual_rat_config, four_class_config, single_class_config, two_class_config
from hetnet_offload import ClassId, SimSettings, run_batch, run_trial, sample_deployment
from hetnet_offload.montecarlo import (
    _class_rng,
    _run_trial_full,
    _tagged_user_count,
    _tagged_user_count_reference,
    _user_rng,
)

MACRO = ClassId(1, 1)
SMALL = ClassId(2, 3)


def test_ppp_deployment_statistics():
    """Counts fluctuate around lam * w^2 and stay inside the window."""
    config = dual_rat_config()
    cls = config.class_for(SMALL)
    settings = SimSettings(window_km=10.0, trials=1, seed=3)
    counts = []
    for t in range(200):
        pts = sample_deployment(cls, settings, _class_rng(3, t, cls.id))
        counts.append(pts.shape[0])
        assert np.all(np.abs(pts) <= 5.0)
    mean = np.mean(counts)
    want = cls.density * 100.0
    assert abs(mean - want) < 4.0 * math.sqrt(want / 200.0)


def test_grid_deployment_is_a_lattice():
    """Unit density on a 20 km window: exactly 400 sites, unit spacing."""
    config = single_class_config(density=1.0)
    cls = config.class_for(MACRO)
    settings = SimSettings(window_km=20.0, trials=1, seed=0, deployment="grid")
    pts = sample_deployment(cls, settings, _class_rng(0, 0, cls.id))
    assert pts.shape == (400, 2)
    xs = np.unique(np.round(pts[:, 0], 9))
    assert xs.size == 20
    assert np.allclose(np.diff(xs), 1.0)
    # a fresh trial draws a different common offset
    pts2 = sample_deployment(cls, settings, _class_rng(0, 1, cls.id))
    assert not np.allclose(pts[:5], pts2[:5])


def test_zero_density_class_is_empty():
    config = dual_rat_config()
    cls = config.class_for(MACRO)
    from dataclasses import replace

    empty = replace(cls, density=0.0)
    pts = sample_deployment(empty, SimSettings(trials=1), _class_rng(0, 0, cls.id))
    assert pts.shape == (0, 2)


def test_unknown_deployment_mode_rejected():
    config = dual_rat_config()
    with pytest.raises(ValueError, match="deployment"):
        run_batch(config, SimSettings(trials=1, deployment="hex"))


def _trial_pieces(config, settings, trial):
    """Re-derive one trial's deployment, serving AP and user set by contract."""
    points = {}
    for cls in config.present_classes():
        rng = _class_rng(settings.seed, trial, cls.id)
        points[cls.id] = sample_deployment(cls, settings, rng)
    best = None
    for cls in config.open_classes():
        pts = points[cls.id]
        if pts.shape[0] == 0:
            continue
        d2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        i = int(np.argmin(d2))
        d = math.sqrt(d2[i])
        w = cls.weight * d ** (-cls.exponent) if d > 0 else math.inf
        if best is None or w > best[2]:
            best = (cls, i, w)
    urng = _user_rng(settings.seed, trial)
    w_km = settings.window_km
    n_users = urng.poisson(config.user_density * w_km * w_km)
    users = urng.uniform(-w_km / 2.0, w_km / 2.0, size=(n_users, 2))
    return points, best[0], best[1], users


@pytest.mark.parametrize(
    "config,n_trials",
    [
        (dual_rat_config(), 120),
        (four_class_config(b23_db=6.0), 70),
        (two_class_config(bias_db=10.0), 40),
    ],
    ids=["dual-rat", "four-class", "two-class-biased"],
)
def test_pruned_count_equals_exhaustive_count(config, n_trials):
    """The octant-pruned tagged-load counter is exact, not approximate."""
    settings = SimSettings(window_km=8.0, trials=1, seed=11)
    for trial in range(n_trials):
        points, serving, sidx, users = _trial_pieces(config, settings, trial)
        fast = _tagged_user_count(config, points, serving, sidx, users)
        slow = _tagged_user_count_reference(config, points, serving, sidx, users)
        assert fast == slow, f"trial {trial}: {fast} != {slow}"


def test_trial_outcome_is_internally_consistent():
    config = dual_rat_config()
    settings = SimSettings(window_km=12.0, trials=1, seed=2)
    open_ids = {c.id for c in config.open_classes()}
    for trial in range(25):
        out = run_trial(config, settings, trial)
        assert out.serving in open_ids
        assert out.load >= 1
        assert out.distance_km >= 0.0
        cls = config.class_for(out.serving)
        want_rate = cls.bandwidth / out.load * math.log2(1.0 + out.sinr_linear)
        assert out.rate_bps == pytest.approx(want_rate, rel=1e-12)


def test_same_seed_reproduces_trials():
    config = dual_rat_config()
    settings = SimSettings(window_km=10.0, trials=1, seed=42)
    a = run_trial(config, settings, 7)
    b = run_trial(config, settings, 7)
    assert a == b
    c = run_trial(config, SimSettings(window_km=10.0, trials=1, seed=43), 7)
    assert a != c


def test_closed_removal_never_lowers_sinr():
    """Per-trial coupling: dropping closed interferers only removes power."""
    config = dual_rat_config()
    open_only = config.without_closed()
    settings = SimSettings(window_km=10.0, trials=1, seed=5)
    for trial in range(60):
        with_closed = run_trial(config, settings, trial)
        without = run_trial(open_only, settings, trial)
        assert without.serving == with_closed.serving
        assert without.distance_km == with_closed.distance_km
        assert without.load == with_closed.load
        assert without.sinr_linear >= with_closed.sinr_linear


def test_run_batch_summary_identities():
    config = dual_rat_config()
    settings = SimSettings(window_km=10.0, trials=400, seed=9)
    summary = run_batch(config, settings)
    assert summary.trial_count == 400
    assert summary.far_serving_trials == 0
    freq = summary.association_freq
    assert sum(freq.values()) == pytest.approx(1.0, abs=1e-12)
    # overall CCDF is the frequency-weighted per-class mix
    for curve in (summary.sinr_ccdf, summary.rate_ccdf):
        mix = sum(freq[cid] * curve.per_class[cid] for cid in curve.per_class)
        assert np.allclose(curve.values, mix, atol=1e-12)
        assert np.all(np.diff(curve.values) <= 1e-12)
        assert curve.values[0] <= 1.0 and curve.values[-1] >= 0.0
    # load histograms: one entry per served trial, none at load zero
    for cid, hist in summary.load_histogram.items():
        assert hist[0] == 0
        assert hist.sum() == round(freq[cid] * 400)
    for cid, count in summary.mean_ap_count.items():
        lam = config.class_for(cid).density
        assert count == pytest.approx(lam * 100.0, rel=0.1)
    for cid, area in summary.mean_cell_area.items():
        assert area > 0.0


def test_worker_count_does_not_change_results():
    """Block-deterministic streams: the pool is a pure throughput knob."""
    config = dual_rat_config(user_density=10.0)
    one = run_batch(config, SimSettings(window_km=8.0, trials=600, seed=4, parallel_workers=1))
    two = run_batch(config, SimSettings(window_km=8.0, trials=600, seed=4, parallel_workers=2))
    assert np.array_equal(one.sinr_ccdf.values, two.sinr_ccdf.values)
    assert np.array_equal(one.rate_ccdf.values, two.rate_ccdf.values)
    assert one.association_freq == two.association_freq
    for cid in one.load_histogram:
        assert np.array_equal(one.load_histogram[cid], two.load_histogram[cid])
    assert one.mean_ap_count == two.mean_ap_count


def test_run_batch_rejects_empty_runs():
    with pytest.raises(ValueError, match="trial"):
        run_batch(dual_rat_config(), SimSettings(trials=0))
