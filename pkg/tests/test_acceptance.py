"""Acceptance criteria, one test each, printing a PASS/FAIL line.

Every test reports the measured quantity next to its threshold, then asserts.
Seeds are fixed in advance; none were chosen by looking at the outcome.
"""

import json
import time

import numpy as np
import pytest

from oracles import batch_se, boltzmann, pearson_offdiag, state_index
from volising import _bitpack
from volising.analyze import is_local_max, periodogram, random_similarity_baseline, similarity_q
from volising.binarize import MappingParams, build_spin_matrix, window_sums
from volising.infer import infer_asynchronous, infer_equilibrium, infer_synchronous
from volising.pipeline import RunConfig, run_sweep
from volising.stats import MomentSet, compute_moments, four_point_slope
from volising.synth import (
    random_model,
    sample_equilibrium_glauber,
    simulate_asynchronous,
    simulate_synchronous,
    synth_market_volumes,
)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nAC{n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_ac01_random_similarity_baseline(report):
    t0 = time.perf_counter()
    qs = []
    for sigma in range(1, 11):
        qs += random_similarity_baseline(100, float(sigma), [1000 * sigma + k for k in range(20)])
    qs = np.array(qs)
    elapsed = time.perf_counter() - t0
    ok = np.abs(qs).max() < 0.02 and (qs < 0).any() and elapsed < 10
    report(1, ok, f"max|Q|={np.abs(qs).max():.4f} (<0.02) over {len(qs)} pairs, "
                  f"{(qs < 0).sum()} negative, {elapsed:.2f}s (<10s)")


def test_ac02_similarity_endpoints(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        j = rng.normal(size=(20, 20))
        worst = max(worst, abs(similarity_q(j, j) - 1), abs(similarity_q(j, -j) + 1))
    lo, hi = np.inf, -np.inf
    for _ in range(10_000):
        a, b = rng.normal(size=(2, 6, 6)) * rng.exponential(size=2)[:, None, None]
        q = similarity_q(a, b)
        lo, hi = min(lo, q), max(hi, q)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and -1 <= lo and hi <= 1 and elapsed < 5
    report(2, ok, f"endpoint error {worst:.1e} (<=1e-12), Q range [{lo:.3f}, {hi:.3f}], "
                  f"{elapsed:.2f}s (<5s)")


def test_ac03_equilibrium_two_by_two(report):
    mom = MomentSet(m=np.zeros(2), c0=np.array([[1.0, 0.5], [0.5, 1.0]]), n_samples=1,
                    stocks=("A", "B"))
    j12 = float(infer_equilibrium(mom).j[0, 1])
    err = abs(j12 - 2 / 3)
    report(3, err <= 1e-12, f"J12={j12!r}, |J12-2/3|={err:.1e} (<=1e-12)")


def _sync_r(seed, steps):
    model = random_model(10, 0.3 / np.sqrt(10), seed=seed)
    sm = simulate_synchronous(model, steps, burn_in=100)
    j = infer_synchronous(compute_moments(sm, taus=[1]), 1).j
    return pearson_offdiag(j, model.j_true)


def test_ac04_synchronous_recovery(report):
    t0 = time.perf_counter()
    seeds = range(5)
    short = np.median([_sync_r(s, 200_000) for s in seeds])
    long = np.median([_sync_r(s, 800_000) for s in seeds])
    elapsed = time.perf_counter() - t0
    ok = short > 0.9 and long >= short and elapsed < 60
    report(4, ok, f"median r={short:.4f} at 2e5 (>0.9), {long:.4f} at 8e5 (>= 2e5 value), "
                  f"{elapsed:.1f}s (<60s)")


def test_ac05_asynchronous_recovery(report):
    t0 = time.perf_counter()
    rs = []
    for seed in range(5):
        model = random_model(10, 0.3 / np.sqrt(10), seed=seed)
        sm = simulate_asynchronous(model, 1e5, 0.1, burn_in=10)
        j = infer_asynchronous(compute_moments(sm, dt=0.5)).j
        rs.append(pearson_offdiag(j, model.j_true))
    r = float(np.median(rs))
    elapsed = time.perf_counter() - t0
    ok = r > 0.85 and elapsed < 120
    report(5, ok, f"median r={r:.4f} (>0.85), per seed {np.round(rs, 4).tolist()}, "
                  f"{elapsed:.1f}s (<120s)")


def test_ac06_equilibrium_sampler(report):
    t0 = time.perf_counter()
    model = random_model(3, 0.5, seed=0, symmetric=True, h_std=0.3)
    sm = sample_equilibrium_glauber(model, 1_000_000, burn_in=0)
    p = boltzmann(model.j_true, model.h_true)
    idx = state_index(sm.spins)
    z = []
    for a in range(8):
        x = (idx == a).astype(float)
        z.append((x.mean() - p[a]) / batch_se(x))
    z = np.abs(z)
    elapsed = time.perf_counter() - t0
    ok = z.max() < 3 and elapsed < 60
    report(6, ok, f"max |freq-p|/SE={z.max():.2f} over 8 states (<3), {elapsed:.1f}s (<60s)")


def test_ac07_small_chi_is_trade_indicator(report):
    t0 = time.perf_counter()
    g = synth_market_volumes(10, 3, 5000, [5, 5], 1.0, seed=7)
    dt = 10
    sm = build_spin_matrix(g, MappingParams(dt, 1e-12))
    w = sm.samples_per_day
    mismatches = 0
    for i in range(g.n_stocks):
        for d in range(g.days):
            traded = window_sums(g, i, d, dt) > 0
            mismatches += int(np.sum((sm.spins[d * w:(d + 1) * w, i] == 1) != traded))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 5
    report(7, ok, f"{mismatches} mismatches over {sm.spins.size} spins (==0), {elapsed:.2f}s (<5s)")


def test_ac08_market_mode(report, tmp_path):
    t0 = time.perf_counter()
    synth = {"n_stocks": 30, "days": 10, "day_length": 10_000, "sector_blocks": [6] * 5,
             "common_factor_strength": 1.0, "sector_strength": 0.1}
    cfg = RunConfig(out=str(tmp_path), dts=[50], chis=[0.5], methods=["eq"], synth=synth,
                    top_k=20)
    res = run_sweep(cfg)
    summary = json.loads((tmp_path / "dt50_chi0.5" / "equilibrium" / "summary.json").read_text())
    ev = summary["top_eigenvalues"]
    n_samples = json.loads((tmp_path / "dt50_chi0.5" / "moments.json").read_text())["n_samples"]
    elapsed = time.perf_counter() - t0
    ok = (res[0].ok and ev[0] > 3 * ev[1] and summary["sign_uniformity"] > 0.9
          and summary["mean"] > 0 and summary["skewness"] > 0 and elapsed < 120)
    report(8, ok, f"lambda1/lambda2={ev[0] / ev[1]:.2f} (>3), uniformity="
                  f"{summary['sign_uniformity']:.2f} (>0.9), mean={summary['mean']:.4f} (>0), "
                  f"skew={summary['skewness']:.3f} (>0), T={n_samples}, {elapsed:.1f}s (<120s)")


def test_ac09_daily_peak(report):
    t0 = time.perf_counter()
    day = 10_000
    g = synth_market_volumes(5, 10, day, None, 1.0, seed=9)
    freq, power = periodogram(g)
    k = int(np.argmin(np.abs(freq - 1 / day)))
    elapsed = time.perf_counter() - t0
    ok = is_local_max(power, k) and elapsed < 10
    report(9, ok, f"bin f={freq[k]:.2e} power {power[k]:.3g} vs neighbours "
                  f"{power[k - 1]:.3g}/{power[k + 1]:.3g}, {elapsed:.2f}s (<10s)")


def test_ac10_kernel_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    bad = 0
    for _ in range(100):
        n, t = int(rng.integers(1, 9)), int(rng.integers(1, 513))
        s = np.where(rng.random((t, n)) < rng.uniform(0.1, 0.9), 1, -1).astype(np.int8)
        lag = int(rng.integers(0, t))
        a, b = s[lag:], s[:t - lag]
        got = _bitpack.product_sums(_bitpack.pack_columns(a), _bitpack.pack_columns(b), len(a))
        want = np.einsum("ti,tj->ij", a.astype(np.int64), b.astype(np.int64))
        bad += int(not np.array_equal(got, want))
    x = np.array([0.0, 10.0, 20.0, 30.0])
    y = rng.normal(size=(4, 8, 8))
    dx = (x - x.mean())[:, None, None]
    closed = np.sum(dx * (y - y.mean(axis=0)), axis=0) / np.sum(dx**2)
    slope_err = np.abs(four_point_slope(x, y) - closed).max()
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and slope_err <= 1e-12 and elapsed < 10
    report(10, ok, f"{bad}/100 count mismatches (==0), slope error {slope_err:.1e} (<=1e-12), "
                   f"{elapsed:.2f}s (<10s)")


@pytest.mark.slow
def test_ac11_performance_envelope(report, tmp_path):
    g = synth_market_volumes(100, 100, 10_000, [10] * 10, 1.0, seed=11)
    cfg = RunConfig(out=str(tmp_path), dts=[50], chis=[0.5], taus=[50],
                    methods=["eq", "syn", "asyn"], synth={}, top_k=20)
    t0 = time.perf_counter()
    res = run_sweep(cfg, grid=g, input_hash="ac11")
    elapsed = time.perf_counter() - t0
    ok = all(r.ok for r in res) and elapsed < 300
    report(11, ok, f"binarize+moments+3 inferences+analysis on N=100, D=100, T_day=1e4: "
                   f"{elapsed:.1f}s (<300s), statuses {[r.status for r in res]}")
