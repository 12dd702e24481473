"""End-to-end runs over a grid of mapping and inference parameters.

Binarization and moments depend only on the input and ``(dt, chi)``; they
are computed once per mapping point and shared by every method and lag.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analyze, netexport
from .binarize import MappingParams, build_spin_matrix, filter_degenerate, write_spins
from .errors import ValidationError, VolisingError
from .infer import SHORT_NAMES, infer
from .ingest import (DEFAULT_CLIP_LENGTH, DEFAULT_RAW_DAY_LENGTH, VolumeGrid, load_grid,
                     write_ticks)
from .stats import compute_moments
from .synth import synth_market_volumes

log = logging.getLogger(__name__)

METHOD_ORDER = ("equilibrium", "synchronous", "asynchronous")
ABBREV = {v: k for k, v in SHORT_NAMES.items()}
SHARED_STAGES = ("binarize", "filter", "moments", "export_moments")
POINT_STAGES = ("infer", "analyze", "export")
Q_PAIRS = [("equilibrium", "synchronous"), ("equilibrium", "asynchronous"),
           ("synchronous", "asynchronous")]
SWEEP_COLUMNS = (
    ["dt", "chi", "tau", "method", "status", "stage", "error", "n_stocks", "n_dropped",
     "significance_floor", "mean_abs", "leading_eigenvalue"]
    + [f"q_{ABBREV[a]}_{ABBREV[b]}" for a, b in Q_PAIRS]
)


@dataclass
class RunConfig:
    """Everything a run needs; list-valued fields span the parameter grid.

    ``taus`` are lags in seconds. ``synth`` is a dict of keyword arguments for
    :func:`synth_market_volumes` used instead of tick files.
    """

    out: str
    dts: list = field(default_factory=list)
    chis: list = field(default_factory=list)
    methods: list = field(default_factory=list)
    taus: list = field(default_factory=list)
    ticks: str | None = None
    tickers: str | None = None
    synth: dict | None = None
    has_header: bool = False
    days: int | None = None
    raw_day_length: int = DEFAULT_RAW_DAY_LENGTH
    clip_length: int = DEFAULT_CLIP_LENGTH
    ds: int = 1
    lam: float = 0.0
    top_k: int | None = None
    rank_mode: str = "signed"
    bins: int = 50
    seed: int = 0
    jobs: int = 1
    dump_spins: bool = False
    dump_ticks: bool = False

    def __post_init__(self):
        self.methods = [SHORT_NAMES.get(m, m) for m in self.methods]
        self.methods = [m for m in METHOD_ORDER if m in self.methods]

    def validate(self):
        if not self.methods:
            raise ValidationError("at least one inference method is required")
        if not self.dts:
            raise ValidationError("at least one window length dt is required")
        if not self.chis:
            raise ValidationError("at least one threshold multiplier chi is required")
        dynamic = any(m != "equilibrium" for m in self.methods)
        if dynamic and not self.taus:
            raise ValidationError("tau is required for synchronous/asynchronous inference")
        if self.taus and not dynamic:
            raise ValidationError("tau given but only equilibrium inference requested")
        for tau in self.taus:
            if tau < 0 or tau % self.ds:
                raise ValidationError(f"tau={tau} must be a non-negative multiple of ds={self.ds}")
        if self.synth is None and not (self.ticks and self.tickers):
            raise ValidationError("need --input and --tickers, or --synth")
        if self.top_k is None:
            raise ValidationError("the network size --top-k is required")
        if self.top_k < 1:
            raise ValidationError("top-k must be >= 1")
        for dt, chi in itertools.product(self.dts, self.chis):
            MappingParams(dt, chi, self.ds)

    def grid_points(self):
        taus = self.taus or [None]
        return [(dt, chi, tau, m) for dt, chi, tau in itertools.product(self.dts, self.chis, taus)
                for m in self.methods]


@dataclass
class PointResult:
    dt: int
    chi: float
    tau: int | None
    method: str
    status: str = "ok"
    stage: str = ""
    error: str = ""
    n_stocks: int = 0
    dropped: tuple = ()
    floor: float = float("nan")
    mean_abs: float = float("nan")
    leading_eigenvalue: float = float("nan")
    files: list = field(default_factory=list)
    j: np.ndarray | None = None
    timings: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == "ok"


class StageError(VolisingError):
    def __init__(self, stage, exc):
        self.stage = stage
        self.exc = exc
        super().__init__(f"stage {stage}: {type(exc).__name__}: {exc}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if np.isfinite(x) else ""
    return str(x)


def mapping_dir(dt, chi) -> str:
    return f"dt{dt}_chi{chi!r}"


def method_dir(method, tau) -> str:
    return method if method != "synchronous" else f"{method}_tau{tau}"


def load_input(cfg: RunConfig) -> tuple[VolumeGrid, str]:
    """Build the volume grid and a hash identifying the input."""
    if cfg.synth is not None:
        kw = dict(cfg.synth)
        grid = synth_market_volumes(seed=cfg.seed, **kw)
        tag = json.dumps({"synth": kw, "seed": cfg.seed}, sort_keys=True).encode()
        return grid, hashlib.sha256(tag).hexdigest()
    h = hashlib.sha256()
    for path in (cfg.ticks, cfg.tickers):
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    h.update(repr((cfg.raw_day_length, cfg.clip_length, cfg.days, cfg.has_header)).encode())
    grid = load_grid(cfg.ticks, cfg.tickers, cfg.days, cfg.raw_day_length,
                     cfg.clip_length, cfg.has_header)
    return grid, h.hexdigest()


class _Timer:
    def __init__(self, timings, stage):
        self.timings, self.stage = timings, stage

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.stage] = self.timings.get(self.stage, 0.0) + time.perf_counter() - self.t0
        if exc is not None and isinstance(exc, Exception) and not isinstance(exc, StageError):
            raise StageError(self.stage, exc) from exc
        return False


def _shared_stages(grid, input_hash, cfg, dt, chi, cache):
    """Binarize, filter and compute moments once per (input, dt, chi)."""
    key = (input_hash, dt, chi)
    if key in cache:
        return cache[key]
    timings = {}
    out = Path(cfg.out) / mapping_dir(dt, chi)
    try:
        with _Timer(timings, "binarize"):
            params = MappingParams(dt, chi, cfg.ds)
            sm = build_spin_matrix(grid, params)
        with _Timer(timings, "filter"):
            sm, dropped = filter_degenerate(sm)
        with _Timer(timings, "moments"):
            taus = [t // cfg.ds for t in cfg.taus if "synchronous" in cfg.methods]
            need_dc = "asynchronous" in cfg.methods
            mom = compute_moments(sm, taus=taus, dt=dt if need_dc else None)
        with _Timer(timings, "export_moments"):
            out.mkdir(parents=True, exist_ok=True)
            files = [out / "moments.json"]
            files[0].write_text(mom.to_json())
            if cfg.dump_spins:
                with open(out / "spins.csv", "w") as fh:
                    write_spins(sm, fh)
                files.append(out / "spins.csv")
        entry = ("ok", mom, dropped, timings, files)
    except StageError as err:
        entry = ("failed", err, (), timings, [])
    cache[key] = entry
    return entry


def run_pipeline(cfg: RunConfig, point, grid: VolumeGrid, input_hash: str,
                 cache: dict | None = None) -> PointResult:
    """Run one parameter point ``(dt, chi, tau, method)`` and write its artifacts.

    Errors never propagate: the result is flagged failed with the stage name.
    """
    dt, chi, tau, method = point
    method = SHORT_NAMES.get(method, method)
    cache = {} if cache is None else cache
    res = PointResult(dt, chi, tau, method)
    status, payload, dropped, shared_t, shared_files = _shared_stages(
        grid, input_hash, cfg, dt, chi, cache)
    res.timings.update(shared_t)
    res.files.extend(shared_files)
    if status != "ok":
        res.status, res.stage, res.error = "failed", payload.stage, str(payload.exc)
        return res
    mom = payload
    res.dropped = tuple(dropped)
    res.floor = mom.floor
    res.n_stocks = mom.n

    mkey = (input_hash, dt, chi, method, tau if method == "synchronous" else None)
    if mkey in cache:
        done = cache[mkey]
        for name in ("status", "stage", "error", "mean_abs", "leading_eigenvalue", "j"):
            setattr(res, name, getattr(done, name))
        res.files = list(done.files)
        res.timings = dict(done.timings)
        return res
    timings = {}
    try:
        with _Timer(timings, "infer"):
            tau_s = None if tau is None else tau // cfg.ds
            model = infer(mom, method, tau=tau_s, lam=cfg.lam)
        with _Timer(timings, "analyze"):
            summary = analyze.summarize(model.j, bins=cfg.bins)
            edges = netexport.top_edges(model, cfg.top_k, cfg.rank_mode)
        with _Timer(timings, "export"):
            d = Path(cfg.out) / mapping_dir(dt, chi) / method_dir(method, tau)
            d.mkdir(parents=True, exist_ok=True)
            written = {
                f"couplings_{method}.csv": model.couplings_csv(),
                f"couplings_{method}.json": model.sidecar_json(),
                f"fields_{method}.csv": model.fields_csv(),
                "summary.json": analyze.summary_json(summary),
                "network.json": netexport.to_edge_list_json(edges),
                "network.dot": netexport.to_dot(edges),
            }
            for name, text in written.items():
                (d / name).write_text(text)
                res.files.append(d / name)
        res.j = model.j
        res.mean_abs = summary["mean_abs"]
        res.leading_eigenvalue = summary["top_eigenvalues"][0]
    except StageError as err:
        res.status, res.stage, res.error = "failed", err.stage, f"{type(err.exc).__name__}: {err.exc}"
    for k, v in timings.items():
        res.timings[k] = res.timings.get(k, 0.0) + v
    cache[mkey] = res
    return res


def _add_reference_std(results):
    """Record each model's std-rescaling factor relative to equilibrium in summary.json."""
    by_map = {}
    for r in results:
        if r.ok and r.method == "equilibrium":
            by_map[(r.dt, r.chi)] = float(analyze.off_diagonal(r.j).std())
    seen = set()
    for r in results:
        ref = by_map.get((r.dt, r.chi))
        if not r.ok or ref is None:
            continue
        path = next((f for f in r.files if f.name == "summary.json"), None)
        if path is None or path in seen:
            continue
        seen.add(path)
        doc = json.loads(path.read_text())
        if doc["std"] > 0:
            doc["rescale_factor"] = ref / doc["std"]
            path.write_text(analyze.summary_json(doc))


def _q_columns(results):
    """Pairwise Q between methods at the same (dt, chi, tau) after mean rescaling."""
    at = {}
    for r in results:
        at[(r.dt, r.chi, r.tau, r.method)] = r
    cols = {}
    for r in results:
        row = {}
        for a, b in Q_PAIRS:
            name = f"q_{ABBREV[a]}_{ABBREV[b]}"
            ra, rb = at.get((r.dt, r.chi, r.tau, a)), at.get((r.dt, r.chi, r.tau, b))
            if ra is None or rb is None:
                continue
            if not (ra.ok and rb.ok):
                row[name] = ""
                continue
            try:
                ja = analyze.rescale_to_mean(ra.j, 1.0)
                jb = analyze.rescale_to_mean(rb.j, 1.0)
                row[name] = analyze.similarity_q(ja, jb)
            except VolisingError:
                row[name] = ""
        cols[id(r)] = row
    return cols


def sweep_csv(results) -> str:
    qcols = _q_columns(results)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in results:
        row = {
            "dt": r.dt, "chi": repr(float(r.chi)), "tau": _fmt(r.tau), "method": r.method,
            "status": r.status, "stage": r.stage, "error": r.error,
            "n_stocks": r.n_stocks, "n_dropped": len(r.dropped),
            "significance_floor": _fmt(r.floor), "mean_abs": _fmt(r.mean_abs),
            "leading_eigenvalue": _fmt(r.leading_eigenvalue),
        }
        row.update({k: _fmt(v) for k, v in qcols[id(r)].items()})
        w.writerow(row)
    return buf.getvalue()


_WORKER_GRID = None


def _worker_init(grid):
    global _WORKER_GRID
    _WORKER_GRID = grid


def _run_group(cfg, input_hash, dt, chi, points, grid=None):
    grid = _WORKER_GRID if grid is None else grid
    cache = {}
    out = []
    for p in points:
        r = run_pipeline(cfg, p, grid, input_hash, cache)
        out.append(r)
    return out


def run_sweep(cfg: RunConfig, grid: VolumeGrid | None = None,
              input_hash: str | None = None) -> list[PointResult]:
    """Run every grid point; writes ``sweep.csv`` and ``report.txt`` under ``cfg.out``."""
    cfg.validate()
    t0 = time.perf_counter()
    if grid is None:
        grid, input_hash = load_input(cfg)
    elif input_hash is None:
        input_hash = hashlib.sha256(grid.volumes.tobytes()).hexdigest()
    load_time = time.perf_counter() - t0
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.dump_ticks:
        with open(out / "ticks.csv", "w") as fh:
            write_ticks(grid, fh)
        (out / "tickers.txt").write_text("".join(t + "\n" for t in grid.stocks))

    groups = {}
    for p in cfg.grid_points():
        groups.setdefault((p[0], p[1]), []).append(p)
    if cfg.jobs > 1 and len(groups) > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(cfg.jobs, mp_context=ctx, initializer=_worker_init,
                                 initargs=(grid,)) as pool:
            futs = [pool.submit(_run_group, cfg, input_hash, dt, chi, pts)
                    for (dt, chi), pts in groups.items()]
            parts = [f.result() for f in futs]
    else:
        parts = [_run_group(cfg, input_hash, dt, chi, pts, grid)
                 for (dt, chi), pts in groups.items()]
    results = [r for part in parts for r in part]
    _add_reference_std(results)
    (out / "sweep.csv").write_text(sweep_csv(results))
    write_report(results, cfg, out / "report.txt", input_hash=input_hash,
                 load_time=load_time, total_time=time.perf_counter() - t0)
    return results


def write_report(results, cfg: RunConfig, path, input_hash: str = "",
                 load_time: float = 0.0, total_time: float = 0.0) -> str:
    """Human-readable run summary; returns the text written to ``path``."""
    n_fail = sum(not r.ok for r in results)
    lines = [
        "volising run report",
        "===================",
        f"input: {'synthetic ' + json.dumps(cfg.synth, sort_keys=True) if cfg.synth else cfg.ticks}",
        f"input hash: {input_hash}",
        f"dt: {cfg.dts}  chi: {cfg.chis}  tau: {cfg.taus}  ds: {cfg.ds}",
        f"methods: {', '.join(cfg.methods)}  lambda: {cfg.lam}  top-k: {cfg.top_k}  seed: {cfg.seed}",
        f"points: {len(results)}  succeeded: {len(results) - n_fail}  failures: {n_fail}",
        "",
        "mapping points",
        "--------------",
    ]
    seen = set()
    for r in results:
        if (r.dt, r.chi) in seen:
            continue
        seen.add((r.dt, r.chi))
        if r.n_stocks or r.dropped:
            lines.append(f"dt={r.dt} chi={r.chi!r}: {r.n_stocks} stocks, "
                         f"significance floor {r.floor:.3g}, dropped "
                         f"{len(r.dropped)}: {' '.join(r.dropped) or '-'}")
        else:
            lines.append(f"dt={r.dt} chi={r.chi!r}: failed in {r.stage}: {r.error}")
        shared = " ".join(f"{s}={r.timings.get(s, 0.0):.3f}s" for s in SHARED_STAGES)
        lines.append(f"    wall-clock {shared}")
    lines += ["", "points", "------"]
    for r in results:
        tau = "" if r.tau is None else f" tau={r.tau}"
        status = "ok" if r.ok else f"FAILED at {r.stage}: {r.error}"
        times = " ".join(f"{s}={r.timings.get(s, 0.0):.3f}s" for s in POINT_STAGES)
        lines.append(f"dt={r.dt} chi={r.chi!r}{tau} {r.method}: {status}")
        lines.append(f"    wall-clock {times}")
    lines += ["", f"load input: {load_time:.3f}s", f"total: {total_time:.3f}s",
              "", "files", "-----"]
    base = Path(cfg.out)
    files = sorted({str(Path(f).relative_to(base)) for r in results for f in r.files})
    files += ["sweep.csv", "report.txt"]
    lines += files
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text)
    return text
