"""Sliding-window volume thresholding into +/-1 activity spins.

A stock is "active" (+1) in the window starting at second t when the volume
traded in ``[t, t + dt)`` reaches ``chi * V_av * dt``, where ``V_av`` is the
stock's average volume per second; otherwise it is -1. Windows are shifted by
``ds`` seconds and never cross a day boundary.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import EmptyDatasetError, ValidationError
from .ingest import VolumeGrid


@dataclass(frozen=True)
class MappingParams:
    dt: int
    chi: float
    ds: int = 1

    def __post_init__(self):
        if int(self.dt) != self.dt or self.dt < 1:
            raise ValidationError(f"window length dt must be an integer >= 1, got {self.dt}")
        if int(self.ds) != self.ds or self.ds < 1:
            raise ValidationError(f"window shift ds must be an integer >= 1, got {self.ds}")
        if not self.chi >= 0:
            raise ValidationError(f"threshold multiplier chi must be >= 0, got {self.chi}")
        object.__setattr__(self, "dt", int(self.dt))
        object.__setattr__(self, "ds", int(self.ds))
        object.__setattr__(self, "chi", float(self.chi))


def samples_per_day(day_length: int, dt: int, ds: int = 1) -> int:
    if dt > day_length:
        raise ValidationError(f"window dt={dt} exceeds day length {day_length}")
    return (day_length - dt) // ds + 1


@dataclass(frozen=True, eq=False)
class SpinMatrix:
    """Binarized activity, samples x stocks.

    Attributes
    ----------
    spins : ndarray of int8, shape (n_samples, N)
        Entries are exactly -1 or +1. Read-only.
    stocks : tuple of str
    samples_per_day : int
        Rows per day block; the matrix is ``days`` such blocks stacked.
    params : MappingParams or None
        Mapping that produced the spins; None for simulated data.
    spacing : float
        Time between consecutive samples (seconds for market data, model time
        units for simulations).
    dropped : tuple of str
        Tickers removed by :func:`filter_degenerate`.
    """

    spins: np.ndarray
    stocks: tuple
    samples_per_day: int
    params: MappingParams | None = None
    spacing: float = 1.0
    dropped: tuple = field(default=())

    def __post_init__(self):
        s = np.asarray(self.spins, dtype=np.int8)
        if s.ndim != 2 or s.shape[1] != len(self.stocks):
            raise ValidationError(
                f"spins shape {s.shape} does not match {len(self.stocks)} stocks"
            )
        if self.samples_per_day < 1 or s.shape[0] % self.samples_per_day:
            raise ValidationError(
                f"{s.shape[0]} samples are not a whole number of days of "
                f"{self.samples_per_day} samples"
            )
        s.flags.writeable = False
        object.__setattr__(self, "spins", s)
        object.__setattr__(self, "stocks", tuple(self.stocks))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        if self.params is not None and self.spacing == 1.0:
            object.__setattr__(self, "spacing", float(self.params.ds))

    @property
    def n_samples(self) -> int:
        return self.spins.shape[0]

    @property
    def n_stocks(self) -> int:
        return self.spins.shape[1]

    @property
    def days(self) -> int:
        return self.n_samples // self.samples_per_day

    @property
    def day_boundaries(self) -> list[tuple[int, int]]:
        w = self.samples_per_day
        return [(d * w, (d + 1) * w) for d in range(self.days)]


def window_sums(grid: VolumeGrid, stock: int, day: int, dt: int, ds: int = 1) -> np.ndarray:
    """Volume in each window ``[k*ds, k*ds + dt)`` of one stock-day (running sum)."""
    return _window_sums(grid.volumes[stock, day][None, :], dt, ds)[0]


def _window_sums(vol: np.ndarray, dt: int, ds: int) -> np.ndarray:
    # vol: (days, day_length); returns (days, W)
    w = samples_per_day(vol.shape[1], dt, ds)
    cs = np.zeros((vol.shape[0], vol.shape[1] + 1), dtype=np.int64)
    np.cumsum(vol, axis=1, out=cs[:, 1:])
    stops = np.arange(w) * ds + dt
    return cs[:, stops] - cs[:, stops - dt]


def threshold_spins(sums: np.ndarray, v_th: float) -> np.ndarray:
    """+1 where the windowed volume reaches ``v_th``, -1 otherwise."""
    if v_th < 0:
        raise ValidationError(f"threshold must be >= 0, got {v_th}")
    return np.where(np.asarray(sums) >= v_th, 1, -1).astype(np.int8)


def build_spin_matrix(grid: VolumeGrid, params: MappingParams) -> SpinMatrix:
    """Binarize every stock and day of ``grid``; day blocks are stacked in order."""
    w = samples_per_day(grid.day_length, params.dt, params.ds)
    spins = np.empty((grid.days * w, grid.n_stocks), dtype=np.int8)
    for i in range(grid.n_stocks):
        v_th = params.chi * grid.avg_rate[i] * params.dt
        sums = _window_sums(grid.volumes[i], params.dt, params.ds)
        spins[:, i] = threshold_spins(sums, v_th).ravel()
    return SpinMatrix(spins, grid.stocks, w, params=params)


def filter_degenerate(sm: SpinMatrix) -> tuple[SpinMatrix, list[str]]:
    """Remove stocks whose spin column is constant (magnetization +/-1).

    Raises
    ------
    EmptyDatasetError
        If no stock is left.
    """
    s = sm.spins
    constant = (s == s[:1]).all(axis=0) if sm.n_samples else np.ones(sm.n_stocks, bool)
    dropped = [t for t, c in zip(sm.stocks, constant) if c]
    if constant.all():
        raise EmptyDatasetError(
            f"all {sm.n_stocks} stocks have constant spins; nothing left to infer"
        )
    if not dropped:
        return sm, []
    keep = ~constant
    reduced = SpinMatrix(
        s[:, keep],
        tuple(t for t, k in zip(sm.stocks, keep) if k),
        sm.samples_per_day,
        params=sm.params,
        spacing=sm.spacing,
        dropped=sm.dropped + tuple(dropped),
    )
    return reduced, dropped


def write_spins(sm: SpinMatrix, stream: TextIO) -> None:
    """CSV dump: one metadata comment line, a ticker row, then +1/-1 rows."""
    p = sm.params
    meta = [
        f"dt={p.dt}" if p else "dt=",
        f"chi={p.chi!r}" if p else "chi=",
        f"ds={p.ds}" if p else "ds=",
        f"samples_per_day={sm.samples_per_day}",
        f"spacing={sm.spacing!r}",
        "dropped=" + ";".join(sm.dropped),
    ]
    stream.write("# " + " ".join(meta) + "\n")
    stream.write(",".join(sm.stocks) + "\n")
    lut = {1: "+1", -1: "-1"}
    for row in sm.spins:
        stream.write(",".join(lut[int(v)] for v in row) + "\n")


def read_spins(stream: TextIO | str) -> SpinMatrix:
    """Inverse of :func:`write_spins`."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    meta_line = stream.readline()
    if not meta_line.startswith("#"):
        raise ValidationError("spin dump lacks its metadata line")
    meta = dict(kv.split("=", 1) for kv in meta_line[1:].split())
    stocks = stream.readline().strip().split(",")
    spins = np.loadtxt(stream, delimiter=",", dtype=np.int8, ndmin=2)
    if spins.size == 0:
        spins = spins.reshape(0, len(stocks))
    params = None
    if meta.get("dt"):
        params = MappingParams(int(meta["dt"]), float(meta["chi"]), int(meta["ds"]))
    dropped = tuple(t for t in meta.get("dropped", "").split(";") if t)
    return SpinMatrix(spins, stocks, int(meta["samples_per_day"]), params=params,
                      spacing=float(meta["spacing"]), dropped=dropped)
