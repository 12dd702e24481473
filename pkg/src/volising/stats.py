"""Magnetizations, connected correlations and their lag derivative.

Lagged products ``s_i(t + tau) s_j(t)`` are only formed inside a day; the
per-day products are pooled by pair count and the whole-data magnetizations
are subtracted. Raw product sums are exact integers computed on bit-packed
spins.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _bitpack
from .binarize import MappingParams, SpinMatrix
from .errors import ValidationError


@dataclass
class MomentSet:
    """First and second moments of a spin matrix.

    ``lags`` maps a lag in sample units to the matrix ``C(tau)`` with
    ``C[i, j] = <s_i(t + tau) s_j(t)> - m_i m_j``. ``dc`` is the slope
    ``dC/dtau`` at zero lag, per unit of time (seconds for market data).
    """

    m: np.ndarray
    c0: np.ndarray
    n_samples: int
    stocks: tuple = ()
    lags: dict = field(default_factory=dict)
    dc: np.ndarray | None = None
    params: MappingParams | None = None
    spacing: float = 1.0
    dropped: tuple = ()

    @property
    def n(self) -> int:
        return len(self.m)

    @property
    def floor(self) -> float:
        return floor_from_count(self.n_samples)

    def to_json(self) -> str:
        p = self.params
        doc = {
            "stocks": list(self.stocks),
            "dropped": list(self.dropped),
            "params": None if p is None else {"dt": p.dt, "chi": p.chi, "ds": p.ds},
            "spacing": self.spacing,
            "n_samples": self.n_samples,
            "significance_floor": self.floor,
            "m": self.m.tolist(),
            "c0": self.c0.tolist(),
            "lags": [
                {"tau_samples": int(k), "tau_time": k * self.spacing, "c": v.tolist()}
                for k, v in sorted(self.lags.items())
            ],
            "dc": None if self.dc is None else self.dc.tolist(),
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MomentSet":
        doc = json.loads(text)
        p = doc["params"]
        return cls(
            m=np.array(doc["m"], dtype=float),
            c0=np.array(doc["c0"], dtype=float),
            n_samples=doc["n_samples"],
            stocks=tuple(doc["stocks"]),
            lags={e["tau_samples"]: np.array(e["c"], dtype=float) for e in doc["lags"]},
            dc=None if doc["dc"] is None else np.array(doc["dc"], dtype=float),
            params=None if p is None else MappingParams(p["dt"], p["chi"], p["ds"]),
            spacing=doc["spacing"],
            dropped=tuple(doc["dropped"]),
        )


def magnetizations(sm: SpinMatrix) -> np.ndarray:
    """Column averages of the spin matrix."""
    if sm.n_samples == 0:
        raise ValidationError("empty spin matrix")
    plus = _bitpack.plus_counts(_bitpack.pack_columns(sm.spins))
    return (2 * plus - sm.n_samples) / sm.n_samples


def _lag_rows(sm: SpinMatrix, tau: int) -> tuple[np.ndarray, np.ndarray]:
    w = sm.samples_per_day
    if not 0 <= tau < w:
        raise ValidationError(f"lag {tau} must lie in [0, samples_per_day={w})")
    starts = np.arange(sm.days)[:, None] * w
    later = (starts + np.arange(tau, w)).ravel()
    earlier = later - tau
    return later, earlier


def lagged_product_sums(sm: SpinMatrix, tau: int) -> tuple[np.ndarray, int]:
    """Exact ``sum_t s_i(t + tau) s_j(t)`` over within-day pairs, and the pair count."""
    if tau == 0:
        packed = _bitpack.pack_columns(sm.spins)
        return _bitpack.product_sums(packed, packed, sm.n_samples), sm.n_samples
    later, earlier = _lag_rows(sm, tau)
    a = _bitpack.pack_columns(sm.spins[later])
    b = _bitpack.pack_columns(sm.spins[earlier])
    return _bitpack.product_sums(a, b, len(later)), len(later)


def connected_corr(sm: SpinMatrix, tau: int = 0, m: np.ndarray | None = None) -> np.ndarray:
    """Connected correlation ``C(tau)`` with ``tau`` in sample units."""
    if tau >= sm.samples_per_day or tau < 0:
        raise ValidationError(
            f"lag {tau} must lie in [0, samples_per_day={sm.samples_per_day})"
        )
    if m is None:
        m = magnetizations(sm)
    sums, pairs = lagged_product_sums(sm, tau)
    return sums / pairs - np.outer(m, m)


def derivative_lags(dt: float, spacing: float = 1.0) -> np.ndarray:
    """Sample lags ``round(k * dt / 5)`` for k = 0..3, converted to sample units."""
    if dt < 5 * spacing:
        raise ValidationError(f"dt={dt} too short for four distinct lags (need >= {5 * spacing})")
    lags = np.floor(np.arange(4) * dt / 5 / spacing + 0.5).astype(int)
    if len(set(lags.tolist())) != 4:
        raise ValidationError(f"lags {lags.tolist()} are not distinct")
    return lags


def four_point_slope(times: np.ndarray, corrs: np.ndarray) -> np.ndarray:
    """Least-squares slope of ``corrs[k]`` against ``times[k]``, elementwise.

    ``corrs`` has shape (4, ...) (any number of points, in fact).
    """
    times = np.asarray(times, dtype=float)
    corrs = np.asarray(corrs, dtype=float)
    design = np.column_stack([np.ones_like(times), times])
    flat = corrs.reshape(len(times), -1)
    coef, *_ = np.linalg.lstsq(design, flat, rcond=None)
    return coef[1].reshape(corrs.shape[1:])


def corr_derivative(sm: SpinMatrix, dt: float, m: np.ndarray | None = None,
                    cache: dict | None = None) -> np.ndarray:
    """``dC/dtau`` at zero lag from a linear fit over lags 0, dt/5, 2dt/5, 3dt/5.

    ``dt`` is in time units (seconds); the slope is per time unit. ``cache``
    may hold already computed ``C(tau)`` matrices keyed by sample lag.
    """
    if m is None:
        m = magnetizations(sm)
    lags = derivative_lags(dt, sm.spacing)
    cache = {} if cache is None else cache
    stack = []
    for lag in lags:
        lag = int(lag)
        if lag not in cache:
            cache[lag] = connected_corr(sm, lag, m)
        stack.append(cache[lag])
    return four_point_slope(lags * sm.spacing, np.stack(stack))


def floor_from_count(n_samples: int) -> float:
    return 1.0 / math.sqrt(n_samples) if n_samples > 0 else math.inf


def significance_floor(sm: SpinMatrix) -> float:
    """``n_samples ** -0.5``: typical |C| between independent spins."""
    return floor_from_count(sm.n_samples)


def compute_moments(sm: SpinMatrix, taus=(), dt: float | None = None) -> MomentSet:
    """All moments needed by the inference methods in one pass.

    Parameters
    ----------
    taus : iterable of int
        Extra lags (sample units) for which ``C(tau)`` is stored.
    dt : float, optional
        Window length used for the four-point derivative; no derivative when
        None.
    """
    m = magnetizations(sm)
    cache = {0: connected_corr(sm, 0, m)}
    for tau in taus:
        tau = int(tau)
        if tau not in cache:
            cache[tau] = connected_corr(sm, tau, m)
    dc = None
    if dt is not None:
        dc = corr_derivative(sm, dt, m, cache)
    wanted = {int(t) for t in taus}
    return MomentSet(
        m=m,
        c0=cache[0],
        n_samples=sm.n_samples,
        stocks=sm.stocks,
        lags={k: v for k, v in cache.items() if k in wanted},
        dc=dc,
        params=sm.params,
        spacing=sm.spacing,
        dropped=sm.dropped,
    )
