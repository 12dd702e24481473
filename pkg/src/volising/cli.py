"""Command-line driver: ``volising --synth n_stocks=20,days=4 --dt 50 --chi 0.5 --method eq --top-k 20 --out run``.

Settings come from built-in defaults, then an optional flat ``key = value``
config file (``--config``), then command-line flags; flags win. Exit status
is 0 when every point succeeded, 2 when some failed, 1 on a fatal
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import VolisingError
from .pipeline import RunConfig, run_sweep

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2
_METHODS = ("eq", "syn", "asyn")

_SYNTH_ALIASES = {
    "n": "n_stocks", "stocks": "n_stocks", "blocks": "sector_blocks",
    "common": "common_factor_strength", "sector": "sector_strength",
}
_SYNTH_TYPES = {
    "n_stocks": int, "days": int, "day_length": int, "common_factor_strength": float,
    "sector_strength": float, "base_rate": float, "factor_timescale": float,
    "lot_sigma": float,
}


def parse_synth(text: str) -> dict:
    """``n_stocks=20,days=5,blocks=4x5,common=1.0`` -> synth_market_volumes kwargs.

    Blocks are written ``COUNTxSIZE`` or as sizes joined by ``+``.
    """
    kw = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise VolisingError(f"synth item {item!r} is not key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        key = _SYNTH_ALIASES.get(key, key)
        if key == "sector_blocks":
            if "x" in val:
                count, size = val.split("x")
                kw[key] = [int(size)] * int(count)
            else:
                kw[key] = [int(v) for v in val.split("+")]
        elif key in _SYNTH_TYPES:
            kw[key] = _SYNTH_TYPES[key](val)
        else:
            raise VolisingError(f"unknown synth parameter {key!r}")
    for req in ("n_stocks", "days"):
        if req not in kw:
            raise VolisingError(f"--synth needs {req}")
    return kw


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use - or _."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise VolisingError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _split(val, typ):
    if isinstance(val, list):
        items = [v for x in val for v in str(x).split(",")]
    else:
        items = str(val).split(",")
    return [typ(v.strip()) for v in items if v.strip()]


def _method(v):
    if v not in _METHODS:
        raise VolisingError(f"unknown method {v!r}; choose from {', '.join(_METHODS)}")
    return v


def _bool(v):
    return str(v).strip().lower() in ("1", "true", "yes", "on")


_FIELDS = {
    # config key: (RunConfig field, converter)
    "input": ("ticks", str),
    "tickers": ("tickers", str),
    "has_header": ("has_header", _bool),
    "synth": ("synth", parse_synth),
    "dt": ("dts", lambda v: _split(v, int)),
    "chi": ("chis", lambda v: _split(v, float)),
    "tau": ("taus", lambda v: _split(v, int)),
    "method": ("methods", lambda v: _split(v, _method)),
    "lambda": ("lam", float),
    "top_k": ("top_k", int),
    "rank_mode": ("rank_mode", str),
    "bins": ("bins", int),
    "out": ("out", str),
    "seed": ("seed", int),
    "jobs": ("jobs", int),
    "ds": ("ds", int),
    "days": ("days", int),
    "raw_day_length": ("raw_day_length", int),
    "clip_length": ("clip_length", int),
    "dump_spins": ("dump_spins", _bool),
    "dump_ticks": ("dump_ticks", _bool),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="volising",
        description="Infer Ising interaction networks from binarized traded volumes.",
    )
    p.add_argument("--config", help="flat key = value config file (flags override it)")
    p.add_argument("--input", help="tick CSV: ticker,day,second,volume")
    p.add_argument("--tickers", help="ticker list, one per line; order defines indices")
    p.add_argument("--has-header", action="store_const", const="true", default=None)
    p.add_argument("--synth", help="synthetic market instead of tick files, "
                                   "e.g. n_stocks=20,days=5,blocks=4x5,common=1.0")
    p.add_argument("--dt", action="append", help="window length(s) in seconds; repeatable or comma list")
    p.add_argument("--chi", action="append", help="threshold multiplier(s)")
    p.add_argument("--tau", action="append", help="lag(s) in seconds for synchronous inference")
    p.add_argument("--method", action="append",
                   help="inference method eq, syn or asyn; repeatable or comma list")
    p.add_argument("--lambda", dest="lambda_", help="ridge term added to C(0) (default 0)")
    p.add_argument("--top-k", help="edges kept in exported networks (required)")
    p.add_argument("--rank-mode", choices=["signed", "absolute"])
    p.add_argument("--bins", help="histogram bins in summary.json (default 50)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", help="seed for synthetic input (default 0)")
    p.add_argument("--jobs", help="worker processes over mapping points (default 1)")
    p.add_argument("--ds", help="window shift in seconds (default 1)")
    p.add_argument("--days", help="number of days in the tick file (default: inferred)")
    p.add_argument("--raw-day-length", help="raw session length in seconds (default 23400)")
    p.add_argument("--clip-length", help="central seconds kept per day (default 10000)")
    p.add_argument("--dump-spins", action="store_const", const="true", default=None)
    p.add_argument("--dump-ticks", action="store_const", const="true", default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    raw = read_config_file(args.config) if args.config else {}
    flags = vars(args)
    flags["lambda"] = flags.pop("lambda_")
    for key in _FIELDS:
        if flags.get(key) is not None:
            raw[key] = flags[key]
    kwargs = {}
    for key, val in raw.items():
        if key not in _FIELDS:
            raise VolisingError(f"unknown config key {key!r}")
        name, conv = _FIELDS[key]
        kwargs[name] = conv(val)
    if "out" not in kwargs:
        raise VolisingError("an output directory (--out) is required")
    if args.verbose:
        logging.basicConfig(level=logging.INFO)
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as a partial run
        return EXIT_OK if not exc.code else EXIT_FATAL
    except (VolisingError, OSError, ValueError) as exc:
        print(f"volising: error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    try:
        results = run_sweep(cfg)
    except (VolisingError, OSError, ValueError) as exc:
        print(f"volising: error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    failed = [r for r in results if not r.ok]
    for r in failed:
        tau = "" if r.tau is None else f" tau={r.tau}"
        print(f"volising: point dt={r.dt} chi={r.chi}{tau} {r.method} failed "
              f"in stage {r.stage}: {r.error}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} points ok; results in {cfg.out}")
    return EXIT_PARTIAL if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
