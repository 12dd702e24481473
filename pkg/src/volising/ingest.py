"""Tick data ingestion: CSV parsing, day clipping and per-second volume grids.

Each trading day is reduced to its central ``clip_length`` seconds so that
opening and closing auctions do not dominate the activity statistics.
"""

from __future__ import annotations

import csv
import io
import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np

from .errors import ParseError, ValidationError

log = logging.getLogger(__name__)

DEFAULT_COLUMNS = ("ticker", "day", "second", "volume")
DEFAULT_CLIP_LENGTH = 10_000
# regular NYSE session, 09:30-16:00
DEFAULT_RAW_DAY_LENGTH = 23_400


class TradeTick(NamedTuple):
    stock_id: str
    day: int
    second: int
    volume: int


@dataclass(frozen=True, eq=False)
class VolumeGrid:
    """Dense per-second traded volumes.

    Attributes
    ----------
    stocks : tuple of str
        Tickers; their order defines stock indices.
    days : int
        Number of trading days D.
    day_length : int
        Seconds kept per day after clipping.
    volumes : ndarray of int64, shape (N, D, day_length)
        Summed traded volume per stock, day and second. Read-only.
    avg_rate : ndarray of float, shape (N,)
        Average traded volume per second over the whole grid.
    n_skipped : int
        Ticks ignored because their ticker was not in ``stocks``.
    """

    stocks: tuple
    days: int
    day_length: int
    volumes: np.ndarray
    avg_rate: np.ndarray = field(default=None)
    n_skipped: int = 0

    def __post_init__(self):
        vol = np.asarray(self.volumes)
        n = len(self.stocks)
        if vol.shape != (n, self.days, self.day_length):
            raise ValidationError(
                f"volumes shape {vol.shape} does not match "
                f"({n}, {self.days}, {self.day_length})"
            )
        if vol.size and vol.min() < 0:
            raise ValidationError("volumes must be non-negative")
        vol.flags.writeable = False
        object.__setattr__(self, "volumes", vol)
        object.__setattr__(self, "stocks", tuple(self.stocks))
        if self.avg_rate is None:
            total = vol.reshape(n, -1).sum(axis=1, dtype=np.int64)
            denom = self.days * self.day_length
            rate = total / denom if denom else np.zeros(n)
            object.__setattr__(self, "avg_rate", rate)

    @property
    def n_stocks(self):
        return len(self.stocks)

    def __eq__(self, other):
        if not isinstance(other, VolumeGrid):
            return NotImplemented
        return (
            self.stocks == other.stocks
            and self.days == other.days
            and self.day_length == other.day_length
            and np.array_equal(self.volumes, other.volumes)
        )


def _resolve_columns(columns, header):
    names = [c.strip().lower() for c in header] if header is not None else None
    if names is not None and all(c in names for c in DEFAULT_COLUMNS):
        return {c: names.index(c) for c in DEFAULT_COLUMNS}
    if isinstance(columns, dict):
        return {c: int(columns[c]) for c in DEFAULT_COLUMNS}
    columns = [c.lower() for c in columns]
    missing = set(DEFAULT_COLUMNS) - set(columns)
    if missing:
        raise ValidationError(f"column map lacks {sorted(missing)}")
    return {c: columns.index(c) for c in DEFAULT_COLUMNS}


def parse_ticks(
    raw: TextIO | str | Iterable[str],
    columns: Sequence[str] | dict = DEFAULT_COLUMNS,
    has_header: bool = False,
) -> list[TradeTick]:
    """Parse ``ticker,day,second,volume`` lines into trade ticks.

    Parameters
    ----------
    raw : text stream, str or iterable of lines
    columns : sequence of column names or dict name -> position
        Column order when the input has no header. Extra columns (a price,
        say) are ignored.
    has_header : bool
        Skip the first line. If it names all four fields, it also defines the
        column order.

    Raises
    ------
    ParseError
        Malformed line; the message carries the 1-based line number.
    ValidationError
        Negative volume, day or second.
    """
    if isinstance(raw, str):
        raw = io.StringIO(raw)
    reader = csv.reader(raw)
    colmap = None
    ticks = []
    for lineno, row in enumerate(reader, start=1):
        if lineno == 1 and has_header:
            colmap = _resolve_columns(columns, row)
            continue
        if not row or all(not c.strip() for c in row):
            continue
        if colmap is None:
            colmap = _resolve_columns(columns, None)
        try:
            ticker = row[colmap["ticker"]].strip()
            day = int(row[colmap["day"]])
            second = int(row[colmap["second"]])
            volume = int(row[colmap["volume"]])
        except (IndexError, ValueError) as exc:
            raise ParseError(lineno, f"malformed tick {','.join(row)!r} ({exc})") from None
        if not ticker:
            raise ParseError(lineno, "empty ticker")
        if volume < 0:
            raise ValidationError(f"line {lineno}: negative volume {volume}")
        if day < 0 or second < 0:
            raise ValidationError(f"line {lineno}: negative day or second")
        ticks.append(TradeTick(ticker, day, second, volume))
    return ticks


def window_start(raw_day_length: int, clip_length: int) -> int:
    """First raw second of the centred clip window."""
    return (raw_day_length - clip_length) // 2


def clip_and_grid(
    ticks: Sequence[TradeTick],
    stocks: Sequence[str],
    days: int,
    raw_day_length: int = DEFAULT_RAW_DAY_LENGTH,
    clip_length: int = DEFAULT_CLIP_LENGTH,
) -> VolumeGrid:
    """Keep the central ``clip_length`` seconds of each day and sum volumes per second.

    Ticks of tickers absent from ``stocks`` are skipped and counted.
    """
    if clip_length > raw_day_length:
        raise ValidationError(
            f"clip_length {clip_length} exceeds raw_day_length {raw_day_length}"
        )
    if clip_length < 1 or days < 0:
        raise ValidationError("clip_length must be >= 1 and days >= 0")
    index = {s: i for i, s in enumerate(stocks)}
    if len(index) != len(stocks):
        raise ValidationError("duplicate tickers in stock list")
    start = window_start(raw_day_length, clip_length)

    n_skipped = 0
    rows = []
    for t in ticks:
        i = index.get(t.stock_id)
        if i is None:
            n_skipped += 1
            continue
        if t.day >= days:
            raise ValidationError(f"tick day {t.day} >= number of days {days}")
        if not 0 <= t.second < raw_day_length:
            raise ValidationError(
                f"tick second {t.second} outside day of length {raw_day_length}"
            )
        if t.volume < 0:
            raise ValidationError(f"negative volume {t.volume}")
        rows.append((i, t.day, t.second - start, t.volume))
    if n_skipped:
        warnings.warn(f"skipped {n_skipped} ticks with unknown tickers", stacklevel=2)
        log.warning("skipped %d ticks with unknown tickers", n_skipped)

    vol = np.zeros((len(stocks), days, clip_length), dtype=np.int64)
    if rows:
        arr = np.asarray(rows, dtype=np.int64)
        keep = (arr[:, 2] >= 0) & (arr[:, 2] < clip_length)
        arr = arr[keep]
        np.add.at(vol, (arr[:, 0], arr[:, 1], arr[:, 2]), arr[:, 3])
    return VolumeGrid(tuple(stocks), days, clip_length, vol, n_skipped=n_skipped)


def clip_grid(grid: VolumeGrid, clip_length: int) -> VolumeGrid:
    """Central window of an existing grid; identity when ``clip_length == day_length``."""
    if clip_length > grid.day_length:
        raise ValidationError("clip_length exceeds the grid's day length")
    if clip_length == grid.day_length:
        return grid
    s = window_start(grid.day_length, clip_length)
    return VolumeGrid(grid.stocks, grid.days, clip_length,
                      grid.volumes[:, :, s:s + clip_length].copy())


def average_volume_rate(grid: VolumeGrid, stock_index: int) -> float:
    """Mean traded volume per second of one stock (shares/second)."""
    return float(grid.avg_rate[stock_index])


def read_tickers(stream: TextIO | str) -> list[str]:
    """One ticker per line; blank lines and ``#`` comments are ignored."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    out = []
    for line in stream:
        t = line.split("#", 1)[0].strip()
        if t:
            out.append(t)
    return out


def write_ticks(grid: VolumeGrid, stream: TextIO, raw_day_length: int | None = None,
                header: bool = False) -> int:
    """Write every non-zero grid cell as one tick line.

    With ``raw_day_length`` the seconds are shifted back to raw-day positions
    so that :func:`clip_and_grid` with the same lengths rebuilds the grid.
    Returns the number of lines written.
    """
    offset = 0 if raw_day_length is None else window_start(raw_day_length, grid.day_length)
    if header:
        stream.write(",".join(DEFAULT_COLUMNS) + "\n")
    n = 0
    for i, ticker in enumerate(grid.stocks):
        d_idx, s_idx = np.nonzero(grid.volumes[i])
        vals = grid.volumes[i][d_idx, s_idx]
        stream.writelines(
            f"{ticker},{d},{s + offset},{v}\n" for d, s, v in zip(d_idx, s_idx, vals)
        )
        n += len(vals)
    return n


def load_grid(ticks_path, tickers_path, days=None, raw_day_length=DEFAULT_RAW_DAY_LENGTH,
              clip_length=DEFAULT_CLIP_LENGTH, has_header=False) -> VolumeGrid:
    """Read a tick CSV and ticker list from disk and build the clipped grid."""
    with open(tickers_path, encoding="utf-8") as fh:
        stocks = read_tickers(fh)
    with open(ticks_path, encoding="utf-8", newline="") as fh:
        ticks = parse_ticks(fh, has_header=has_header)
    if days is None:
        days = max((t.day for t in ticks), default=-1) + 1
    return clip_and_grid(ticks, stocks, days, raw_day_length, clip_length)
