import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from buoylink.errors import ConfigError, DomainError
from buoylink.los_engine import (
    LinkGeometry,
    LosStatistics,
    LosTimeline,
    SegmentSet,
    SweepAxis,
    TransectKernel,
    aggregate,
    clos_ccdf,
    clos_time_share,
    find_first_blocker,
    is_blocked,
    los_timeline,
    outage_probability,
    run_monte_carlo,
    segment_timeline,
    simulate,
    sweep,
)
from buoylink.sea_state import (
    SeaStateParams,
    build_spectrum_grid,
    flat_realization,
    realization_seed,
    sample_realization,
)

from conftest import make_realization

SMALL_MC = dict(window_s=60.0, dt_s=0.1, n_realizations=6, master_seed=42)


def brute_blocked(omegas, ks, amps, phases, geom, t):
    """Pure-Python scan of the blocking criterion along the transect."""
    def eta(x):
        return sum(a * math.cos(w * t + k * x + p) for w, k, a, p in zip(omegas, ks, amps, phases))

    lhs = (geom.tower_height_m - (eta(0.0) + geom.antenna_height_m)) / geom.distance_m
    n = 1
    while n * geom.search_step_m < geom.distance_m:
        x = n * geom.search_step_m
        if lhs > (geom.tower_height_m - eta(x)) / (geom.distance_m - x):
            return x, eta(x)
        n += 1
    return None


# --- geometry -----------------------------------------------------------------


def test_geometry_validation():
    with pytest.raises(ConfigError):
        LinkGeometry(1000, 10, antenna_height_m=10)
    with pytest.raises(ConfigError):
        LinkGeometry(10, 30, search_step_m=2)
    with pytest.raises(ConfigError):
        LinkGeometry(-1, 30)
    xs = LinkGeometry(10, 30, search_step_m=1).search_positions()
    assert xs.tolist() == list(range(1, 10))


# --- blocking criterion ---------------------------------------------------------


def test_flat_sea_never_blocks():
    g = build_spectrum_grid(SeaStateParams(1.0, 4.0))
    flat = flat_realization(g)
    geom = LinkGeometry(1000, 30, 1)
    assert not any(is_blocked(flat, geom, 0.0, x) for x in (1, 50, 999.5))
    assert find_first_blocker(flat, LinkGeometry(1000, 30, 0), 3.0) is None


def test_monochrome_hand_values(monochrome):
    assert is_blocked(monochrome, LinkGeometry(1000, 10, 0), 0.0, 50.0)
    assert not is_blocked(monochrome, LinkGeometry(1000, 30, 0), 0.0, 50.0)
    with pytest.raises(DomainError):
        is_blocked(monochrome, LinkGeometry(1000, 10, 0), 0.0, 1000.0)
    with pytest.raises(DomainError):
        is_blocked(monochrome, LinkGeometry(1000, 10, 0), 0.0, 0.0)


def test_monochrome_first_blocker_matches_scan(monochrome):
    geom = LinkGeometry(1000, 10, 0)
    got = find_first_blocker(monochrome, geom, 0.0)
    want = brute_blocked([1.0], [2 * math.pi / 100], [0.5], [math.pi], geom, 0.0)
    assert got is not None
    assert got[0] == want[0]
    assert got[1] == pytest.approx(want[1], abs=1e-12)
    # the rising flank ahead of the x = 50 m crest already violates the criterion
    assert got[0] < 50
    assert is_blocked(monochrome, geom, 0.0, got[0])
    assert not any(is_blocked(monochrome, geom, 0.0, x) for x in range(1, int(got[0])))


@settings(max_examples=25, deadline=None)
@given(
    n_f=st.integers(1, 4),
    seed=st.integers(0, 2**32),
    h_a=st.floats(0, 1.5),
    h_twr=st.floats(2, 8),
)
def test_lattice_agrees_with_exhaustive_scan(n_f, seed, h_a, h_twr):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.5, 6.0, n_f)
    k = w**2 / 9.80665
    a = rng.uniform(0.05, 0.6, n_f)
    p = rng.uniform(0, 2 * math.pi, n_f)
    real = make_realization(w, k, a, p)
    geom = LinkGeometry(60.0, h_twr, min(h_a, h_twr * 0.9), search_step_m=0.1)
    ts = np.arange(20) * 0.25
    tl = TransectKernel(real.grid, geom).timeline(real, len(ts), 0.25, log_blockers=True)
    log = {int(r[0]): r[1:] for r in tl.blocker_log}
    for j, t in enumerate(ts):
        want = brute_blocked(w, k, a, p, geom, t)
        assert tl.flags[j] == (want is None)
        if want is not None:
            assert log[j][0] == pytest.approx(want[0], abs=1e-9)
            assert log[j][1] == pytest.approx(want[1], abs=1e-9)
            fb = find_first_blocker(real, geom, t)
            assert fb[0] == pytest.approx(want[0], abs=1e-9)


# --- timelines ------------------------------------------------------------------


@pytest.fixture(scope="module")
def grid_short():
    return build_spectrum_grid(SeaStateParams(0.5, 2.0))


def test_flat_timeline_all_clear(grid_short):
    tl = los_timeline(flat_realization(grid_short), LinkGeometry(1000, 30, 0))
    assert len(tl.flags) == 600 and tl.flags.all()
    assert tl.window_s == pytest.approx(60.0)


def test_time_step_must_resolve_waves(grid_short):
    real = sample_realization(grid_short, 1)
    with pytest.raises(ConfigError, match="1/f_N"):
        los_timeline(real, LinkGeometry(1000, 30, 0), window_s=60, dt_s=0.75)
    with pytest.raises(ConfigError):
        los_timeline(real, LinkGeometry(1000, 30, 0), window_s=60.05, dt_s=0.1)


def test_tall_antenna_is_always_clear(grid_short):
    real = sample_realization(grid_short, 9)
    geom = LinkGeometry(1000, 30, 2 * real.crest_bound)
    assert los_timeline(real, geom).flags.all()


def test_blocker_log_only_on_blocked_steps(grid_short):
    real = sample_realization(grid_short, realization_seed(0, 3))
    tl = los_timeline(real, LinkGeometry(1000, 30, 0), log_blockers=True)
    assert (~tl.flags).sum() == len(tl.blocker_log) > 0
    idx = tl.blocker_log[:, 0].astype(int)
    assert not tl.flags[idx].any()
    j = idx[0]
    fb = find_first_blocker(real, LinkGeometry(1000, 30, 0), j * 0.1)
    assert fb[0] == tl.blocker_log[0, 1]


def test_pruned_kernel_matches_unpruned(grid_short):
    # crest-bound pruning must not change any verdict of the full scan
    geom = LinkGeometry(1000, 30, 0)
    for i in range(3):
        real = sample_realization(grid_short, realization_seed(7, i))
        tl = los_timeline(real, geom, window_s=5, dt_s=0.1)
        for j in range(0, 50, 7):
            assert tl.flags[j] == (find_first_blocker(real, geom, j * 0.1) is None)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**63), lo=st.floats(0, 0.5), step=st.floats(0.01, 1.0))
def test_antenna_height_monotone_per_seed(grid_short, seed, lo, step):
    real = sample_realization(grid_short, seed)
    a = los_timeline(real, LinkGeometry(1000, 30, lo)).flags
    b = los_timeline(real, LinkGeometry(1000, 30, lo + step)).flags
    assert not np.any(a & ~b)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**63), h=st.floats(5, 40), dh=st.floats(0.1, 30))
def test_tower_height_monotone_per_seed(grid_short, seed, h, dh):
    real = sample_realization(grid_short, seed)
    a = los_timeline(real, LinkGeometry(500, h, 0)).flags
    b = los_timeline(real, LinkGeometry(500, h + dh, 0)).flags
    assert not np.any(a & ~b)


# --- segmentation and statistics -----------------------------------------------


def test_segment_hand_example():
    s = segment_timeline(LosTimeline(0.1, np.array([True, True, False, True])))
    assert np.allclose(s.clos_durations_s, [0.2, 0.1])
    assert np.allclose(s.blos_durations_s, [0.1])
    s = segment_timeline(LosTimeline(0.1, np.ones(600, bool)))
    assert s.clos_runs.tolist() == [600] and s.clos_durations_s[0] == pytest.approx(60.0)
    with pytest.raises(DomainError):
        segment_timeline(LosTimeline(0.1, np.zeros(0, bool)))


@given(st.lists(st.booleans(), min_size=1, max_size=300))
def test_segments_partition_window(flags):
    f = np.array(flags)
    s = segment_timeline(LosTimeline(0.1, f))
    assert s.n_samples == len(f)
    assert s.clos_runs.sum() == f.sum()
    assert np.all(s.clos_runs > 0) and np.all(s.blos_runs > 0)
    assert abs(len(s.clos_runs) - len(s.blos_runs)) <= 1


def _sets(*flag_lists):
    return [segment_timeline(LosTimeline(0.1, np.array(f, bool))) for f in flag_lists]


def test_aggregate_single_clear_window():
    st_ = aggregate(_sets([True] * 600), 0.1, 60.0)
    assert st_.p_los == 1.0 and st_.p_blos == 0.0
    assert st_.histogram[599] == 1 and st_.histogram.sum() == 1
    assert st_.gamma_clos_s == pytest.approx(60.0)
    assert st_.time_share[599] == 1.0
    assert np.all(st_.ccdf == 1.0)
    assert outage_probability(st_, 30.0) == 0.0


def test_aggregate_pools_and_moments():
    a = [True, True, False, True] + [False] * 596
    b = [True] * 3 + [False] * 597
    st_ = aggregate(_sets(a, b), 0.1, 60.0)
    assert st_.p_los == pytest.approx(6 / 1200)
    assert st_.histogram[:3].tolist() == [1, 1, 1]
    durations = np.array([0.2, 0.1, 0.3])
    assert st_.mu_clos_s == pytest.approx(durations.mean())
    assert st_.sigma_clos_s == pytest.approx(durations.std())
    assert st_.gamma_clos_s == pytest.approx(0.1)  # tie -> shortest bin
    assert st_.p_los + st_.p_blos == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        aggregate([], 0.1, 60.0)
    with pytest.raises(DomainError):
        aggregate(_sets([True] * 10), 0.1, 60.0)


def test_time_share_and_ccdf_hand_values():
    st_ = aggregate(_sets([True, True, False, True]), 0.1, 0.4)
    assert np.allclose(st_.time_share[:2], [1 / 3, 2 / 3])
    assert st_.time_share.sum() == pytest.approx(1.0, abs=1e-12)
    assert st_.ccdf[0] == 1.0 and st_.ccdf[1] == 0.5
    doubled = aggregate(_sets([True, True, False, True]) * 2, 0.1, 0.4)
    assert np.allclose(doubled.time_share, st_.time_share)
    assert np.allclose(doubled.ccdf, st_.ccdf)


def test_all_blocked_shares_undefined():
    st_ = aggregate(_sets([False] * 5), 0.1, 0.5)
    assert st_.p_los == 0.0 and math.isnan(st_.mu_clos_s)
    with pytest.raises(DomainError):
        clos_time_share(st_)
    with pytest.raises(DomainError):
        clos_ccdf(st_)
    assert outage_probability(st_, 0.1) == 1.0


def test_outage_hand_value():
    hist = np.array([1, 0, 0, 3])
    st_ = LosStatistics(0.8, hist, np.zeros(4, int), 0, 0, 0, 1, 0.1, 0.4)
    assert clos_ccdf(st_)[3] == 0.75
    assert outage_probability(st_, 0.4) == pytest.approx(0.4)
    # t_h rounds up to the next bin edge
    assert outage_probability(st_, 0.15) == outage_probability(st_, 0.4)
    assert outage_probability(st_, 0.1) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        outage_probability(st_, 0.0)
    with pytest.raises(DomainError):
        outage_probability(st_, 0.5)


# --- Monte Carlo -----------------------------------------------------------------


def test_simulated_statistics_invariants():
    st_ = run_monte_carlo(SeaStateParams(0.5, 2.0), LinkGeometry(1000, 30, 0), **SMALL_MC)
    assert 0 <= st_.p_los <= 1
    assert st_.p_los + st_.p_blos == pytest.approx(1.0, abs=1e-12)
    f = st_.ccdf
    assert f[0] == pytest.approx(1.0) and np.all(np.diff(f) <= 1e-15) and np.all(f >= 0)
    assert st_.time_share.sum() == pytest.approx(1.0, abs=1e-12)
    assert outage_probability(st_, st_.dt_s) == pytest.approx(st_.p_blos, abs=1e-12)
    clos_time = (st_.histogram * st_.bin_times).sum()
    assert clos_time / (st_.n_realizations * 60.0) == pytest.approx(st_.p_los, abs=1e-12)


def test_repeatable_and_worker_independent():
    sea, geom = SeaStateParams(0.5, 2.0), LinkGeometry(1000, 30, 0)
    a = run_monte_carlo(sea, geom, **SMALL_MC)
    b = run_monte_carlo(sea, geom, **SMALL_MC)
    c = run_monte_carlo(sea, geom, workers=2, **SMALL_MC)
    for other in (b, c):
        assert other.to_dict() == a.to_dict()


def test_realization_order_does_not_matter():
    sea, geom = SeaStateParams(0.5, 2.0), LinkGeometry(1000, 30, 0)
    sets = simulate(sea, geom, **SMALL_MC)
    fwd = aggregate(sets, 0.1, 60.0)
    rev = aggregate(sets[::-1], 0.1, 60.0)
    assert fwd.to_dict() == rev.to_dict()


def test_antenna_height_raises_probability_on_common_seeds():
    sea = SeaStateParams(0.5, 2.0)
    lo = run_monte_carlo(sea, LinkGeometry(1000, 30, 0), **SMALL_MC)
    hi = run_monte_carlo(sea, LinkGeometry(1000, 30, 1), **SMALL_MC)
    assert hi.p_los >= lo.p_los


def test_single_value_sweep_equals_direct_run():
    sea, geom = SeaStateParams(0.5, 2.0), LinkGeometry(1000, 30, 0)
    (v, st_), = sweep(SweepAxis.DISTANCE, [500.0], sea, geom, **SMALL_MC)
    direct = run_monte_carlo(sea, LinkGeometry(500, 30, 0), **SMALL_MC)
    assert v == 500.0 and st_.to_dict() == direct.to_dict()
    with pytest.raises(DomainError):
        sweep("d", [], sea, geom)
    out = sweep("htwr", [20, 40], sea, geom, **SMALL_MC)
    assert out[1][1].p_los >= out[0][1].p_los


def test_sweep_peak_period_axis():
    out = sweep("tp", [2.0, 3.0], SeaStateParams(0.5, 2.0), LinkGeometry(1000, 30, 0), **SMALL_MC)
    assert [v for v, _ in out] == [2.0, 3.0]
