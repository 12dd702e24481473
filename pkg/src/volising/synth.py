"""Ground-truth generators.

Ising samplers (equilibrium heat bath, synchronous and asynchronous kinetic
Glauber dynamics) produce spin data with known couplings for validating the
estimators; :func:`synth_market_volumes` produces per-second volumes with a
daily cycle, a market-wide factor and sector factors for pipeline demos.

All generators are deterministic given their seed. Random numbers are drawn
from a numpy ``Generator`` in chunks and consumed by compiled kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np
from scipy.signal import lfilter

from .binarize import SpinMatrix
from .errors import ValidationError
from .ingest import VolumeGrid

_CHUNK = 1 << 18


@dataclass
class IsingModel:
    j_true: np.ndarray
    h_true: np.ndarray
    seed: int | None = None
    n: int = field(init=False)

    def __post_init__(self):
        self.j_true = np.ascontiguousarray(self.j_true, dtype=float)
        self.h_true = np.ascontiguousarray(self.h_true, dtype=float)
        self.n = len(self.h_true)
        if self.j_true.shape != (self.n, self.n):
            raise ValidationError(f"J shape {self.j_true.shape} does not match {self.n} fields")
        if not (np.all(np.isfinite(self.j_true)) and np.all(np.isfinite(self.h_true))):
            raise ValidationError("couplings and fields must be finite")

    @property
    def stocks(self):
        return tuple(f"s{i}" for i in range(self.n))


def random_model(n: int, std: float, seed: int | None = None, symmetric: bool = False,
                 h_std: float = 0.0) -> IsingModel:
    """Couplings i.i.d. normal(0, std) off the diagonal, zero diagonal.

    With ``symmetric`` the upper triangle is mirrored. ``seed`` is stored on
    the model and reused by the samplers.
    """
    rng = np.random.default_rng(seed)
    j = rng.normal(0.0, std, size=(n, n))
    if symmetric:
        j = np.triu(j, 1)
        j = j + j.T
    np.fill_diagonal(j, 0.0)
    h = rng.normal(0.0, h_std, size=n) if h_std > 0 else np.zeros(n)
    return IsingModel(j, h, seed)


def _rng(model, seed):
    s = model.seed if seed is None else seed
    # offset the stream from the one random_model used for the parameters
    return np.random.default_rng(np.random.SeedSequence(s).spawn(2)[1] if s is not None else None)


@numba.njit(cache=True)
def _heat_bath_sweeps(state, j, h, u, out, record):
    n = state.shape[0]
    for t in range(u.shape[0]):
        for i in range(n):
            field_i = h[i]
            for k in range(n):
                if k != i:
                    field_i += j[i, k] * state[k]
            if u[t, i] < 0.5 * (1.0 + np.tanh(field_i)):
                state[i] = 1
            else:
                state[i] = -1
        if record:
            for i in range(n):
                out[t, i] = state[i]


def sample_equilibrium_glauber(model: IsingModel, sweeps: int, burn_in: int = 0,
                               seed: int | None = None) -> SpinMatrix:
    """Heat-bath Monte Carlo for ``P(s) ~ exp(h.s + sum_{i<j} J_ij s_i s_j)``.

    One sample is recorded after each full sequential sweep, for the
    ``sweeps - burn_in`` sweeps after burn-in.
    """
    if not np.allclose(model.j_true, model.j_true.T, rtol=0, atol=0):
        raise ValidationError("equilibrium sampling needs symmetric couplings")
    if sweeps <= burn_in:
        raise ValidationError("sweeps must exceed burn_in")
    rng = _rng(model, seed)
    n = model.n
    state = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    out = np.empty((sweeps - burn_in, n), dtype=np.int8)
    dummy = np.empty((0, n), dtype=np.int8)
    left = burn_in
    while left > 0:
        m = min(left, _CHUNK)
        _heat_bath_sweeps(state, model.j_true, model.h_true, rng.random((m, n)), dummy, False)
        left -= m
    for start in range(0, len(out), _CHUNK):
        stop = min(start + _CHUNK, len(out))
        _heat_bath_sweeps(state, model.j_true, model.h_true, rng.random((stop - start, n)),
                          out[start:stop], True)
    return SpinMatrix(out, model.stocks, len(out))


@numba.njit(cache=True)
def _parallel_steps(state, j, h, u, out, record):
    n = state.shape[0]
    new = np.empty(n, dtype=np.int8)
    for t in range(u.shape[0]):
        for i in range(n):
            field_i = h[i]
            for k in range(n):
                field_i += j[i, k] * state[k]
            new[i] = 1 if u[t, i] < 0.5 * (1.0 + np.tanh(field_i)) else -1
        for i in range(n):
            state[i] = new[i]
            if record:
                out[t, i] = new[i]


def simulate_synchronous(model: IsingModel, steps: int, burn_in: int = 0,
                         seed: int | None = None) -> SpinMatrix:
    """Parallel-update kinetic Ising trajectory of ``steps`` configurations.

    Every spin is redrawn at each step from the previous configuration:
    ``P(s_i(t+1) = +1) = (1 + tanh(h_i + sum_j J_ij s_j(t))) / 2``.
    """
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    rng = _rng(model, seed)
    n = model.n
    state = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    dummy = np.empty((0, n), dtype=np.int8)
    left = burn_in
    while left > 0:
        m = min(left, _CHUNK)
        _parallel_steps(state, model.j_true, model.h_true, rng.random((m, n)), dummy, False)
        left -= m
    out = np.empty((steps, n), dtype=np.int8)
    for start in range(0, steps, _CHUNK):
        stop = min(start + _CHUNK, steps)
        _parallel_steps(state, model.j_true, model.h_true, rng.random((stop - start, n)),
                        out[start:stop], True)
    return SpinMatrix(out, model.stocks, steps)


@numba.njit(cache=True)
def _async_events(state, j, h, waits, idx, u, t, k, t0, interval, out):
    n = state.shape[0]
    n_out = out.shape[0]
    for e in range(waits.shape[0]):
        t_new = t + waits[e]
        while k < n_out and t0 + k * interval < t_new:
            for i in range(n):
                out[k, i] = state[i]
            k += 1
        if k >= n_out:
            return t_new, k
        i = idx[e]
        field_i = h[i]
        for q in range(n):
            field_i += j[i, q] * state[q]
        state[i] = 1 if u[e] < 0.5 * (1.0 + np.tanh(field_i)) else -1
        t = t_new
    return t, k


def simulate_asynchronous(model: IsingModel, total_time: float, sample_interval: float,
                          burn_in: float = 0.0, seed: int | None = None) -> SpinMatrix:
    """Continuous-time Glauber dynamics with exact event times.

    Each spin updates at the ticks of its own unit-rate Poisson clock, to +1
    with probability ``(1 + tanh(h_i + sum_j J_ij s_j)) / 2``. The state is
    recorded at ``burn_in + k * sample_interval`` for
    ``k < total_time / sample_interval``; ``SpinMatrix.spacing`` is
    ``sample_interval``.
    """
    if total_time <= 0 or sample_interval <= 0:
        raise ValidationError("total_time and sample_interval must be > 0")
    rng = _rng(model, seed)
    n = model.n
    n_out = int(total_time / sample_interval)
    if n_out < 1:
        raise ValidationError("total_time shorter than one sample interval")
    state = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    out = np.empty((n_out, n), dtype=np.int8)
    t, k = 0.0, 0
    while k < n_out:
        waits = rng.exponential(1.0 / n, size=_CHUNK)
        idx = rng.integers(0, n, size=_CHUNK)
        u = rng.random(_CHUNK)
        t, k = _async_events(state, model.j_true, model.h_true, waits, idx, u,
                             t, k, float(burn_in), float(sample_interval), out)
    return SpinMatrix(out, model.stocks, n_out, spacing=float(sample_interval))


def _ar1(rng, length, timescale):
    """Unit-variance AR(1) series with correlation time ``timescale`` samples."""
    rho = float(np.exp(-1.0 / timescale)) if timescale > 0 else 0.0
    eps = rng.standard_normal(length)
    eps[1:] *= np.sqrt(1.0 - rho * rho)
    return lfilter([1.0], [1.0, -rho], eps)


def synth_market_volumes(
    n_stocks: int,
    days: int,
    day_length: int = 10_000,
    sector_blocks: Sequence[int] | None = None,
    common_factor_strength: float = 1.0,
    seed: int | None = None,
    *,
    sector_strength: float = 0.5,
    base_rate: float = 0.3,
    factor_timescale: float = 60.0,
    lot_sigma: float = 1.0,
) -> VolumeGrid:
    """Per-second traded volumes with market-wide and sector co-movement.

    The log trade intensity of stock i at second t is

        log(base_i) + c * (cos(2 pi t / day_length) + F(t)) + s * G_k(i)(t)

    where ``c = common_factor_strength``, ``s = sector_strength``, F and G_k
    are unit-variance AR(1) factors (market and sector), and ``base_i``
    scatters log-normally around ``base_rate`` trades per second. The number
    of trades per second is Poisson; each second's volume is the trade count
    times a log-normal lot size, in round lots of 100 shares, so the volume
    distribution is broad and every non-zero volume is at least 100.

    With ``common_factor_strength=0`` and one block per stock, stocks are
    independent. The cosine term gives every day the same activity profile.
    """
    if sector_blocks is None:
        sector_blocks = [n_stocks]
    sector_blocks = [int(b) for b in sector_blocks]
    if sum(sector_blocks) != n_stocks or any(b < 1 for b in sector_blocks):
        raise ValidationError(f"sector blocks {sector_blocks} do not sum to {n_stocks}")
    rng = np.random.default_rng(seed)
    length = days * day_length
    tickers = tuple(f"S{i:03d}" for i in range(n_stocks))
    base = base_rate * np.exp(rng.normal(0.0, 0.5, size=n_stocks))
    sector_of = np.repeat(np.arange(len(sector_blocks)), sector_blocks)

    t = np.arange(length) % day_length
    common = common_factor_strength * (
        np.cos(2 * np.pi * t / day_length) + _ar1(rng, length, factor_timescale)
    )
    sectors = [sector_strength * _ar1(rng, length, factor_timescale)
               for _ in sector_blocks]
    # keep the mean intensity near base_i despite the log-normal modulation
    shift = -0.5 * (common_factor_strength**2 * 1.5 + sector_strength**2)

    vol = np.empty((n_stocks, days, day_length), dtype=np.int64)
    for i in range(n_stocks):
        lam = base[i] * np.exp(common + sectors[sector_of[i]] + shift)
        trades = rng.poisson(lam)
        lots = np.exp(rng.normal(0.0, lot_sigma, size=length))
        v = np.where(trades > 0, 100 * np.ceil(trades * lots), 0)
        vol[i] = v.reshape(days, day_length).astype(np.int64)
    return VolumeGrid(tickers, days, day_length, vol)
