"""Command-line interface: ``fe <command> [options]``.

Options may also come from a configuration file (``--config``), either a
flat ``key = value`` file (an optional ``[experiment]`` section header is
allowed) or a JSON object. Command-line flags override file values.

Exit codes: 0 on success, 1 on usage errors, 2 on precision or budget
failures.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

from .errors import BudgetError, DomainError, FEError, PrecisionError
from .experiments import COMMANDS, TARGETS, ExperimentSpec, reproduce, run, write_rows

_KEYS = {
    "fn": "function", "function": "function", "T": "T", "t": "T", "adaptive": "adaptive",
    "grid": "grid", "gamma": "gamma", "N": "Nrange", "n": "Nrange", "eps": "epsilons",
    "noise": "noise", "seed": "seed", "digits": "digits", "solver": "solver", "points": "points",
    "Tlist": "Tlist", "tlist": "Tlist", "gammas": "gammas", "out": "out", "format": "format",
    "jobs": "jobs", "timing": "timing",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fe", description="Fourier extension experiments")
    p.add_argument("command", choices=COMMANDS + ("reproduce",))
    p.add_argument("target", nargs="?", help="reproduce target (table1, fig1, ...)")
    p.add_argument("--config", help="INI-like or JSON file with default options")
    p.add_argument("--fn", dest="function")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--T", dest="T", type=float)
    group.add_argument("--adaptive", type=float, metavar="EPS")
    p.add_argument("--Tlist", help="comma-separated T values (sweep)")
    p.add_argument("--grid", choices=("continuous", "discrete", "mapped-chebyshev", "equispaced"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--gammas", help="comma-separated gamma values (sweep)")
    p.add_argument("--N", dest="Nrange", help="A, A..B or A..B..step")
    p.add_argument("--eps", dest="epsilons", help="comma-separated truncation levels")
    p.add_argument("--noise", type=float, metavar="DELTA")
    p.add_argument("--seed", type=int)
    p.add_argument("--digits", type=int, help="extended precision digits (default: double)")
    p.add_argument("--solver", choices=("tsvd", "lsq"))
    p.add_argument("--points", type=int, help="sup-norm grid size")
    p.add_argument("--out", help="output file (or directory for reproduce); '-' for stdout")
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--jobs", type=int, help="worker threads for independent sweep points")
    p.add_argument("--timing", action="store_true", default=None, help="record wall-clock timings")
    p.add_argument("--quick", action="store_true", help="reduced grids for reproduce targets")
    return p


def load_config(path) -> dict:
    """Read a flat key-value or JSON configuration file into option names."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not text.lstrip().startswith("["):
            text = "[experiment]\n" + text
        cp.read_string(text)
        raw = {}
        for section in cp.sections():
            raw.update(dict(cp[section]))
    out = {}
    for k, v in raw.items():
        if k not in _KEYS:
            raise UsageError(f"unknown configuration key {k!r}")
        out[_KEYS[k]] = v
    return out


def _coerce(opts: dict) -> dict:
    conv = {"T": float, "adaptive": float, "gamma": float, "noise": float, "seed": int,
            "digits": int, "points": int, "jobs": int}
    out = dict(opts)
    for k, fn in conv.items():
        if out.get(k) is not None:
            out[k] = fn(out[k])
    if isinstance(out.get("timing"), str):
        out["timing"] = out["timing"].strip().lower() in ("1", "true", "yes", "on")
    return out


def spec_from_args(args) -> tuple:
    opts = load_config(args.config) if args.config else {}
    for name in ("function", "T", "adaptive", "Tlist", "grid", "gamma", "gammas", "Nrange", "epsilons",
                 "noise", "seed", "digits", "solver", "points", "out", "format", "jobs", "timing"):
        v = getattr(args, name, None)
        if v is not None:
            opts[name] = v
    if args.T is not None:
        opts.pop("adaptive", None)
    if args.adaptive is not None:
        opts.pop("T", None)
    opts = _coerce(opts)
    out = opts.pop("out", None)
    fmt = opts.pop("format", "csv")
    jobs = opts.pop("jobs", 1) or 1
    spec = ExperimentSpec(args.command, **opts)
    return spec, out, fmt, jobs


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "reproduce":
            if args.target not in TARGETS:
                raise UsageError(f"reproduce needs a target from {sorted(TARGETS)}")
            manifest = reproduce(args.target, args.out or ".", quick=args.quick, fmt=args.format or "csv")
            print(json.dumps({"target": manifest["target"], "status": manifest["status"]}))
            return 0 if manifest["status"] == "ok" else 2
        if args.target is not None:
            raise UsageError(f"unexpected argument {args.target!r}")
        spec, out, fmt, jobs = spec_from_args(args)
        rows = run(spec, jobs=jobs)
        write_rows(rows, out, fmt)
        return 0
    except (PrecisionError, BudgetError) as exc:
        print(f"fe: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DomainError, TypeError, ValueError) as exc:
        print(f"fe: usage error: {exc}", file=sys.stderr)
        return 1
    except FEError as exc:
        print(f"fe: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
