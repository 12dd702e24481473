import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from volising.binarize import (
    MappingParams,
    SpinMatrix,
    build_spin_matrix,
    filter_degenerate,
    read_spins,
    threshold_spins,
    window_sums,
    write_spins,
)
from volising.errors import EmptyDatasetError, ValidationError
from volising.ingest import VolumeGrid
from volising.synth import synth_market_volumes


def grid_of(vol):
    vol = np.asarray(vol, dtype=np.int64)
    while vol.ndim < 3:
        vol = vol[None]
    return VolumeGrid(tuple(f"S{i}" for i in range(vol.shape[0])), vol.shape[1], vol.shape[2], vol)


def naive_window_sums(v, dt, ds):
    return np.array([sum(v[k:k + dt]) for k in range(0, len(v) - dt + 1, ds)])


def test_window_sums_hand_example():
    g = grid_of([4, 0, 2, 6])
    assert window_sums(g, 0, 0, 2).tolist() == [4, 2, 8]


def test_window_sums_full_day():
    g = grid_of([4, 0, 2, 6])
    assert window_sums(g, 0, 0, 4).tolist() == [12]


def test_window_sums_zero():
    assert not window_sums(grid_of(np.zeros(9)), 0, 0, 3).any()


def test_window_longer_than_day():
    with pytest.raises(ValidationError):
        window_sums(grid_of([1, 2, 3]), 0, 0, 4)


@settings(max_examples=80, deadline=None)
@given(arrays(np.int64, st.integers(1, 60), elements=st.integers(0, 10**6)),
       st.integers(1, 60), st.integers(1, 7))
def test_running_sum_matches_naive(v, dt, ds):
    if dt > len(v):
        return
    got = window_sums(grid_of(v), 0, 0, dt, ds)
    np.testing.assert_array_equal(got, naive_window_sums(v, dt, ds))


def test_threshold_hand_example():
    # V_av = 3, chi = 1, dt = 2 -> threshold 6
    assert threshold_spins([4, 2, 8], 6.0).tolist() == [-1, -1, 1]


def test_threshold_tie_maps_up():
    assert threshold_spins([0, 0, 0], 0.0).tolist() == [1, 1, 1]


def test_tiny_chi_gives_trade_indicator():
    sums = np.array([0, 100, 0, 3500, 200])
    v_th = 1e-12 * 760.0 * 5
    assert threshold_spins(sums, v_th).tolist() == [-1, 1, -1, 1, 1]


def test_build_single_stock():
    sm = build_spin_matrix(grid_of([4, 0, 2, 6]), MappingParams(2, 1.0))
    assert sm.spins[:, 0].tolist() == [-1, -1, 1]


def test_chi_zero_all_up(rng):
    g = grid_of(rng.integers(0, 3, size=(3, 2, 50)))
    sm = build_spin_matrix(g, MappingParams(5, 0.0))
    assert (sm.spins == 1).all()


def test_identical_days_give_identical_blocks(rng):
    day = rng.integers(0, 500, size=40)
    sm = build_spin_matrix(grid_of([[day, day]]), MappingParams(6, 0.8))
    w = sm.samples_per_day
    np.testing.assert_array_equal(sm.spins[:w], sm.spins[w:])


@pytest.mark.parametrize("day_length, dt, ds", [(100, 10, 1), (100, 10, 3), (57, 57, 2), (30, 1, 4)])
def test_sample_count(rng, day_length, dt, ds):
    g = grid_of(rng.integers(0, 5, size=(2, 3, day_length)))
    sm = build_spin_matrix(g, MappingParams(dt, 1.0, ds))
    assert sm.n_samples == 3 * ((day_length - dt) // ds + 1)
    assert sm.day_boundaries[-1] == (sm.n_samples - sm.samples_per_day, sm.n_samples)


def test_windows_do_not_cross_days():
    # all volume sits at the end of day 0 and the start of day 1
    vol = np.zeros((1, 2, 10), dtype=np.int64)
    vol[0, 0, 9] = 100
    vol[0, 1, 0] = 100
    sm = build_spin_matrix(grid_of(vol), MappingParams(4, 0.5))
    assert sm.spins[:, 0].tolist() == [-1] * 6 + [1] + [1] + [-1] * 6


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 3), st.floats(0, 3))
def test_chi_monotonicity(seed, c1, c2):
    lo, hi = sorted((c1, c2))
    vol = np.random.default_rng(seed).integers(0, 4, size=(2, 2, 30)) * 100
    g = grid_of(vol)
    s_lo = build_spin_matrix(g, MappingParams(5, lo)).spins
    s_hi = build_spin_matrix(g, MappingParams(5, hi)).spins
    assert (s_lo >= s_hi).all()


def test_small_chi_equals_trade_indicator():
    g = synth_market_volumes(5, 2, 500, [5], 0.5, seed=3)
    dt = 7
    sm = build_spin_matrix(g, MappingParams(dt, 1e-12))
    for i in range(5):
        for d in range(2):
            traded = naive_window_sums(g.volumes[i, d], dt, 1) > 0
            block = sm.spins[d * sm.samples_per_day:(d + 1) * sm.samples_per_day, i]
            np.testing.assert_array_equal(block == 1, traded)


def spin_matrix(cols):
    cols = np.asarray(cols, dtype=np.int8).T
    return SpinMatrix(cols, [f"S{i}" for i in range(cols.shape[1])], cols.shape[0])


def test_filter_drops_constant_column():
    sm, dropped = filter_degenerate(spin_matrix([[-1, -1, -1], [1, -1, 1]]))
    assert dropped == ["S0"]
    assert sm.stocks == ("S1",)
    assert sm.dropped == ("S0",)


def test_filter_identity():
    original = spin_matrix([[1, -1, 1], [-1, 1, 1]])
    sm, dropped = filter_degenerate(original)
    assert dropped == []
    assert sm is original


def test_filter_everything_is_error():
    with pytest.raises(EmptyDatasetError):
        filter_degenerate(spin_matrix([[1, 1], [-1, -1]]))


def test_mapping_params_validation():
    with pytest.raises(ValidationError):
        MappingParams(0, 1.0)
    with pytest.raises(ValidationError):
        MappingParams(5, -1.0)
    with pytest.raises(ValidationError):
        MappingParams(5, 1.0, ds=0)


def test_spin_dump_round_trip(rng):
    g = grid_of(rng.integers(0, 300, size=(3, 2, 40)))
    sm = build_spin_matrix(g, MappingParams(5, 0.7, 2))
    sm, _ = filter_degenerate(sm)
    buf = io.StringIO()
    write_spins(sm, buf)
    text = buf.getvalue()
    assert text.startswith("# dt=5 chi=0.7 ds=2")
    again = read_spins(text)
    np.testing.assert_array_equal(again.spins, sm.spins)
    assert again.params == sm.params
    assert again.stocks == sm.stocks
    assert again.samples_per_day == sm.samples_per_day
