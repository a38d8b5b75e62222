"""Experiment runner: parameter sweeps, noise studies and figure/table data.

Experiments are described by an :class:`ExperimentSpec` and produce a list
of :class:`ResultRow` objects that serialize to CSV or JSON lines. Rows are
sorted by their parameter tuple before emission so that output does not
depend on scheduling, and timings are only recorded on request, which keeps
the default output byte-for-byte reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import _mp
from .analysis import (breakpoints, condition_bound, runge_region, spectrum_report,
                       stability_constants)
from .core import ExtensionConfig, adaptive_T, basis_matrix
from .errors import BudgetError, DomainError, FEError, PrecisionError
from .functions import get_function
from .precision import DOUBLE, PrecisionContext
from .solver import (count_zeros, evaluate, frame_function, l2_error, lsq_solve, sup_error, svd,
                     truncated_solve)
from .systems import attach_rhs, build_system, continuous_rhs

__all__ = [
    "COMMANDS",
    "TARGETS",
    "ExperimentSpec",
    "ResultRow",
    "parse_range",
    "noise_inject",
    "run",
    "write_rows",
    "format_rows",
    "reproduce",
]

COMMANDS = ("approx", "sweep", "spectrum", "breakpoints", "condition", "constants", "noise",
            "runge-region")

PARAM_COLUMNS = ["command", "function", "grid", "T", "N", "M", "gamma", "eps", "delta", "seed",
                 "precision", "solver"]
METRIC_COLUMNS = ["supError", "l2Error", "coeffNorm", "keptRank", "residual", "K", "C1", "C2",
                  "D", "B", "timing"]
EXTRA_COLUMNS = {
    "spectrum": ["nearOne", "nearZero", "transitionWidth", "predictedTransitionIndex",
                 "symmetryResidual", "sigmaMax", "sigmaMin"],
    "breakpoints": ["N0", "N1", "N2", "N2predicted", "dHat"],
    "runge-region": ["re", "im", "indicator"],
}


def parse_range(text) -> List[int]:
    """Parse ``"A"``, ``"A..B"`` or ``"A..B..step"`` (inclusive) into a list."""
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, int):
        return [text]
    parts = str(text).split("..")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise DomainError(f"invalid range {text!r}") from None
    if len(nums) == 1:
        out = nums
    elif len(nums) in (2, 3):
        step = nums[2] if len(nums) == 3 else 1
        if step <= 0 or nums[1] < nums[0]:
            raise DomainError(f"invalid range {text!r}")
        out = list(range(nums[0], nums[1] + 1, step))
    else:
        raise DomainError(f"invalid range {text!r}")
    if any(n < 0 for n in out):
        raise DomainError("N must be nonnegative")
    return out


def _parse_floats(text) -> List[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise DomainError(f"invalid number list {text!r}") from None


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines one experiment's output.

    ``T`` is a fixed extension parameter unless ``adaptive`` is set, in
    which case ``T = adaptive_T(N, adaptive)`` is recomputed for every ``N``.
    ``digits = None`` selects double precision. ``eps = 0`` with extended
    precision gives the exact (untruncated) extension.
    """

    command: str
    function: str = "runge25"
    T: float = 2.0
    adaptive: Optional[float] = None
    grid: str = "discrete"
    gamma: float = 2.0
    Nrange: tuple = (10,)
    epsilons: tuple = (1e-14,)
    noise: float = 0.0
    seed: int = 0
    digits: Optional[int] = None
    solver: str = "tsvd"
    points: int = 10001
    timing: bool = False
    Tlist: tuple = ()
    gammas: tuple = ()

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        get_function(self.function)
        ExtensionConfig(T=self.T if self.adaptive is None else 2.0, N=1, grid=self.grid,
                        M=1 if self.grid == "equispaced" else None)
        object.__setattr__(self, "Nrange", tuple(parse_range(self.Nrange)))
        object.__setattr__(self, "epsilons", tuple(_parse_floats(self.epsilons)))
        object.__setattr__(self, "Tlist", tuple(_parse_floats(self.Tlist)) if self.Tlist else ())
        object.__setattr__(self, "gammas", tuple(_parse_floats(self.gammas)) if self.gammas else ())
        if not self.Nrange:
            raise DomainError("empty N range")
        if any(e < 0 for e in self.epsilons):
            raise DomainError("epsilons must be nonnegative")
        if self.noise < 0:
            raise DomainError("noise amplitude must be nonnegative")
        if self.gamma < 1:
            raise DomainError("gamma must be at least 1")
        if self.adaptive is not None and not 0 < self.adaptive < 1:
            raise DomainError("adaptive tolerance must lie in (0, 1)")
        if self.solver not in ("tsvd", "lsq"):
            raise DomainError("solver must be 'tsvd' or 'lsq'")
        if self.points < 2:
            raise DomainError("points must be at least 2")

    @property
    def precision(self) -> PrecisionContext:
        return DOUBLE if self.digits is None else PrecisionContext.extended(self.digits)

    def T_for(self, N: int) -> float:
        return self.T if self.adaptive is None else adaptive_T(max(N, 1), self.adaptive)

    def config_for(self, N: int, T: Optional[float] = None, gamma: Optional[float] = None) -> ExtensionConfig:
        T = self.T_for(N) if T is None else T
        if self.grid == "equispaced":
            return ExtensionConfig.equispaced(N, T, self.gamma if gamma is None else gamma)
        return ExtensionConfig(T=T, N=N, grid=self.grid)


@dataclass
class ResultRow:
    """One emitted record: a parameter tuple and its metrics."""

    params: dict
    metrics: dict = field(default_factory=dict)

    def sort_key(self):
        def k(v):
            if v is None:
                return (0, 0.0, "")
            if isinstance(v, (int, float)):
                return (1, float(v), "")
            return (2, 0.0, str(v))

        order = ["T", "gamma", "N", "M", "eps", "delta", "re", "im"]
        p = {**self.params, **{key: self.metrics.get(key) for key in ("re", "im")}}
        return tuple(k(p.get(name)) for name in order)

    def as_dict(self, columns: Sequence[str]) -> dict:
        merged = {**self.params, **self.metrics}
        return {c: merged.get(c) for c in columns}


def noise_inject(values, delta: float, seed) -> np.ndarray:
    """Add independent noise, uniform in the complex disc of radius ``delta``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    ``delta = 0`` returns the input unchanged.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    values = np.asarray(values)
    if delta == 0:
        return values.copy()
    rng = np.random.default_rng(seed)
    r = delta * np.sqrt(rng.random(values.shape))
    theta = 2 * np.pi * rng.random(values.shape)
    pert = r * np.exp(1j * theta)
    if values.dtype == object:
        return values + pert.astype(object)
    return values + pert


# --------------------------------------------------------------------------- runners


def _timed(fn, spec, row: ResultRow):
    t0 = time.perf_counter()
    fn()
    row.metrics["timing"] = round(time.perf_counter() - t0, 6) if spec.timing else None
    return row


def _params(spec: ExperimentSpec, config: Optional[ExtensionConfig] = None, eps=None, **extra) -> dict:
    p = {
        "command": spec.command,
        "function": spec.function,
        "grid": spec.grid,
        "T": config.T if config is not None else spec.T,
        "N": config.N if config is not None else None,
        "M": config.M if config is not None else None,
        "gamma": config.gamma if config is not None and config.M is not None else None,
        "eps": eps,
        "delta": spec.noise if spec.command == "noise" else None,
        "seed": spec.seed if spec.command == "noise" else None,
        "precision": str(spec.precision),
        "solver": spec.solver if spec.command in ("approx", "noise", "sweep") else None,
    }
    p.update(extra)
    return p


def _noisy_system(spec: ExperimentSpec, config: ExtensionConfig, f):
    system = build_system(config, spec.precision)
    delta = spec.noise if spec.command == "noise" else 0.0
    seed = np.random.SeedSequence([spec.seed, config.N])
    if system.kind == "continuous":
        b = continuous_rhs(f, config, precision=spec.precision, ctx=system.ctx)
        return system.with_rhs(noise_inject(b, delta, seed))
    values = np.asarray(f(system.nodes, system.ns))
    return attach_rhs(system, f, noise_inject(values, delta, seed))


def _approx_rows(spec: ExperimentSpec, N: int, T: Optional[float] = None,
                 gamma: Optional[float] = None, with_K: bool = False) -> List[ResultRow]:
    f = get_function(spec.function)
    config = spec.config_for(N, T, gamma)
    t0 = time.perf_counter()
    system = _noisy_system(spec, config, f)
    fact = svd(system)
    setup = time.perf_counter() - t0
    rows = []
    for eps in spec.epsilons:
        t1 = time.perf_counter()
        sol = lsq_solve(system, fact) if spec.solver == "lsq" else truncated_solve(system, eps, fact)
        m = {
            "supError": sup_error(f, sol, spec.points),
            "l2Error": l2_error(f, sol),
            "coeffNorm": sol.coefficient_norm,
            "keptRank": sol.keptRank,
            "residual": sol.residualNorm,
        }
        if with_K:
            m["K"] = condition_bound(config.grid, N, config.T, config.gamma, eps if eps > 0 else 1e-14)
        m["timing"] = round(setup + time.perf_counter() - t1, 6) if spec.timing else None
        rows.append(ResultRow(_params(spec, config, None if spec.solver == "lsq" else eps), m))
    return rows


def _spectrum_row(spec: ExperimentSpec, N: int) -> ResultRow:
    config = spec.config_for(N)
    t0 = time.perf_counter()
    rep = spectrum_report(build_system(config, spec.precision))
    vals = _mp.to_float(rep.values)
    m = {
        "nearOne": rep.nearOne, "nearZero": rep.nearZero, "transitionWidth": rep.transitionWidth,
        "predictedTransitionIndex": rep.predictedTransitionIndex,
        "symmetryResidual": rep.symmetryResidual,
        "sigmaMax": float(vals[0]), "sigmaMin": float(vals[-1]),
        "timing": round(time.perf_counter() - t0, 6) if spec.timing else None,
    }
    return ResultRow(_params(spec, config), m)


def _condition_rows(spec: ExperimentSpec, N: int) -> List[ResultRow]:
    config = spec.config_for(N)
    rows = []
    for eps in spec.epsilons:
        t0 = time.perf_counter()
        K = condition_bound(config.grid, N, config.T, config.gamma, eps)
        rows.append(ResultRow(_params(spec, config, eps),
                              {"K": K, "timing": round(time.perf_counter() - t0, 6) if spec.timing else None}))
    return rows


def _constants_rows(spec: ExperimentSpec, N: int) -> List[ResultRow]:
    config = ExtensionConfig.equispaced(N, spec.T_for(N), spec.gamma)
    digits = spec.digits if spec.digits is not None else 100
    rows = []
    for eps in spec.epsilons:
        t0 = time.perf_counter()
        rep = stability_constants(N, config.M, config.T, eps, digits)
        p = _params(spec, config, eps)
        p["grid"] = "equispaced"
        p["precision"] = str(PrecisionContext.extended(digits))
        rows.append(ResultRow(p, {"C1": rep.C1, "C2": rep.C2, "D": rep.D, "B": rep.B,
                                  "keptRank": rep.keptRank,
                                  "timing": round(time.perf_counter() - t0, 6) if spec.timing else None}))
    return rows


def _breakpoint_rows(spec: ExperimentSpec) -> List[ResultRow]:
    rows = []
    for eps in spec.epsilons:
        t0 = time.perf_counter()
        rep = breakpoints(spec.T, eps, spec.gamma, max(spec.Nrange), spec.digits or 100)
        p = _params(spec, None, eps, gamma=spec.gamma)
        rows.append(ResultRow(p, {"N0": rep.N0, "N1": rep.N1, "N2": rep.N2,
                                  "N2predicted": rep.N2predicted, "dHat": rep.dHat,
                                  "timing": round(time.perf_counter() - t0, 6) if spec.timing else None}))
    return rows


def _runge_rows(spec: ExperimentSpec) -> List[ResultRow]:
    reg = runge_region(spec.T)
    rows = []
    for j, y in enumerate(reg.im):
        for i, x in enumerate(reg.re):
            rows.append(ResultRow(_params(spec), {"re": float(x), "im": float(y),
                                                  "indicator": float(reg.indicator[j, i])}))
    return rows


def run(spec: ExperimentSpec, jobs: int = 1) -> List[ResultRow]:
    """Execute ``spec`` and return its rows sorted by parameter tuple.

    Independent ``N`` values (and ``T``/``gamma`` values in a sweep) are
    dispatched to a thread pool when ``jobs > 1``.
    """
    if spec.command == "breakpoints":
        return sorted(_breakpoint_rows(spec), key=ResultRow.sort_key)
    if spec.command == "runge-region":
        return sorted(_runge_rows(spec), key=ResultRow.sort_key)
    tasks = []
    if spec.command in ("approx", "noise"):
        tasks = [(lambda N=N: _approx_rows(spec, N)) for N in spec.Nrange]
    elif spec.command == "sweep":
        Ts = spec.Tlist or (spec.T,)
        gammas = spec.gammas or (spec.gamma,)
        if spec.grid != "equispaced":
            gammas = (None,)
        tasks = [(lambda N=N, T=T, g=g: _approx_rows(spec, N, T, g, with_K=True))
                 for T in Ts for g in gammas for N in spec.Nrange]
    elif spec.command == "spectrum":
        tasks = [(lambda N=N: [_spectrum_row(spec, N)]) for N in spec.Nrange]
    elif spec.command == "condition":
        tasks = [(lambda N=N: _condition_rows(spec, N)) for N in spec.Nrange]
    elif spec.command == "constants":
        tasks = [(lambda N=N: _constants_rows(spec, N)) for N in spec.Nrange]
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    else:
        chunks = [t() for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=ResultRow.sort_key)


# --------------------------------------------------------------------------- output


def _columns_for(rows: Sequence[ResultRow], command: Optional[str] = None) -> List[str]:
    if command is None and rows:
        command = rows[0].params.get("command")
    if command in EXTRA_COLUMNS:
        extra = EXTRA_COLUMNS[command]
        metrics = [c for c in METRIC_COLUMNS if c != "timing"] if command != "spectrum" else []
        return PARAM_COLUMNS + extra + metrics + ["timing"]
    return PARAM_COLUMNS + METRIC_COLUMNS


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def format_rows(rows: Sequence, fmt: str = "csv", columns: Optional[Sequence[str]] = None) -> str:
    """Serialize rows (``ResultRow`` or plain dicts) to CSV or JSON lines."""
    dict_rows = [r.as_dict(columns or _columns_for(rows)) if isinstance(r, ResultRow) else dict(r)
                 for r in rows]
    if columns is None:
        columns = _columns_for(rows) if rows and isinstance(rows[0], ResultRow) else \
            (list(dict_rows[0].keys()) if dict_rows else [])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in dict_rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps({c: _json_value(r.get(c)) for c in columns}) + "\n" for r in dict_rows)
    raise DomainError(f"unknown format {fmt!r}")


def write_rows(rows: Sequence, path, fmt: str = "csv", columns: Optional[Sequence[str]] = None) -> None:
    text = format_rows(rows, fmt, columns)
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --------------------------------------------------------------------------- reproduction targets


@dataclass
class _Leg:
    name: str
    precision: str
    expected: str
    build: object
    status: str = "pending"
    error: Optional[str] = None
    files: list = field(default_factory=list)


def _steps(lo: int, hi: int, step: int) -> List[int]:
    return list(range(lo, hi + 1, step))


def _error_curve(fnames, grid, Ns, T=2.0, adaptive=None, eps_list=(1e-14,), digits=None, gamma=None,
                 exact=False, points=10001, solver="tsvd"):
    """Sup error and coefficient norm of many functions, sharing one factorization per N."""
    rows = []
    prec = DOUBLE if digits is None else PrecisionContext.extended(digits)
    for N in Ns:
        TN = T if adaptive is None else adaptive_T(N, adaptive)
        if grid == "equispaced":
            config = ExtensionConfig.equispaced(N, TN, gamma)
        else:
            config = ExtensionConfig(T=TN, N=N, grid=grid)
        base = build_system(config, prec)
        fact = svd(base)
        for name in fnames:
            f = get_function(name)
            system = attach_rhs(base, f)
            legs = [("exact", 0.0)] if exact else []
            legs += [("tsvd" if solver == "tsvd" else "lsq", e) for e in eps_list]
            for kind, e in legs:
                sol = lsq_solve(system, fact) if kind == "lsq" else truncated_solve(system, e, fact)
                rows.append({"function": name, "grid": grid, "T": TN, "N": N, "M": config.M,
                             "gamma": config.gamma if config.M else None,
                             "mode": kind, "eps": e if kind != "lsq" else None,
                             "supError": sup_error(f, sol, points), "coeffNorm": sol.coefficient_norm,
                             "keptRank": sol.keptRank})
    return rows


def _table1(quick):
    Ns = [40, 80] if quick else [40, 80, 120, 160, 200]
    return {"table1.csv": [{"N": N, "K_continuous": condition_bound("continuous", N, 2.0, epsilon=2.5e-13),
                            "K_discrete": condition_bound("discrete", N, 2.0, epsilon=1e-14)} for N in Ns]}


def _table2(quick):
    Ns = [40, 80] if quick else [40, 80, 120, 160, 200]
    return {"table2.csv": [{"gamma": g, "N": N, "K": condition_bound("equispaced", N, 2.0, g, 1e-14)}
                           for g in (1.0, 2.0, 4.0) for N in Ns]}


def _fig1_double(quick):
    N = 40 if quick else 200
    out = {}
    for grid in ("continuous", "discrete"):
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=N, grid=grid)))
        out[f"fig1_{grid}.csv"] = [{"N": N, "T": 2.0, "k": k, "value": float(v)}
                                   for k, v in enumerate(_mp.to_float(rep.values))]
    return out


def _fig1_symmetry(quick):
    N = 10 if quick else 20
    rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=N), PrecisionContext.extended(60)))
    vals = rep.values
    dim = len(vals)
    return {"fig1_symmetry.csv": [{"N": N, "k": k, "lambda": float(vals[k]),
                                   "one_minus_lambda": float(1 - vals[k]),
                                   "symmetry_residual": float(abs(vals[k] + vals[dim - 1 - k] - 1))}
                                  for k in range(dim)]}


def _fig2(quick):
    fn = ["runge25", "absx7", "oscil"]
    Ns = _steps(4, 60, 8) if quick else _steps(2, 200, 2)
    rows = []
    for grid in ("continuous", "discrete"):
        rows += _error_curve(fn, grid, Ns, solver="lsq")
        rows += _error_curve(fn, grid, Ns, adaptive=1e-14, solver="lsq")
    return {"fig2.csv": rows}


def _fig3_numerical(quick):
    fn = ["runge16", "pole87", "cosh40", "pole101"]
    Ns = _steps(4, 40, 12) if quick else _steps(2, 100, 2)
    rows = []
    for grid in ("continuous", "discrete"):
        rows += _error_curve(fn, grid, Ns, solver="lsq")
    return {"fig3_numerical.csv": rows}


def _fig3_exact(quick):
    fn = ["runge16", "pole87", "cosh40", "pole101"]
    Ns = _steps(4, 12, 8) if quick else _steps(2, 40, 2)
    rows = []
    for grid in ("continuous", "discrete"):
        rows += _error_curve(fn, grid, Ns, eps_list=(), digits=100, exact=True, points=1001)
    return {"fig3_exact.csv": rows}


def _fig4(quick):
    fn = ["runge16", "pole87", "linear"]
    Ns = _steps(4, 12, 8) if quick else _steps(2, 40, 2)
    rows = []
    for grid in ("continuous", "discrete"):
        rows += _error_curve(fn, grid, Ns, eps_list=(1e-6, 1e-12, 1e-18, 1e-24), digits=100,
                             exact=True, points=1001)
    return {"fig4.csv": rows}


def _fig5(quick):
    N = 20
    ns = (0, 20, 40)
    system = build_system(ExtensionConfig(T=2.0, N=N), PrecisionContext.extended(60))
    fact = svd(system)
    x = np.linspace(-2.0, 2.0, 401)
    samples, zeros = [], []
    for n in ns:
        ff = frame_function(fact, n, system.config)
        vals = evaluate(ff, x)
        samples += [{"n": n, "x": float(xv), "absPhi": float(abs(v))} for xv, v in zip(x, vals)]
        zeros.append({"n": n, "N": N, "T": 2.0, "sigma": ff.sigma,
                      "zeros": count_zeros(ff, 2001 if quick else 20001)})
    return {"fig5_samples.csv": samples, "fig5_zeros.csv": zeros}


def _fig6(quick):
    f = get_function("expx")
    x = np.linspace(-1.0, 1.0, 201 if quick else 1001)
    rows = []
    cases = [("continuous", None, (1e-4, 1e-8, 1e-12, 0.0)), ("discrete", None, (1e-4, 1e-8, 1e-12, 0.0)),
             ("equispaced", 1.0, (1e-4, 1e-6, 1e-8, 1e-10, 0.0)),
             ("equispaced", 2.0, (1e-4, 1e-6, 1e-8, 1e-10, 0.0))]
    for grid, gamma, deltas in cases:
        for delta in deltas:
            spec = ExperimentSpec("noise", "expx", grid=grid, gamma=gamma or 2.0, Nrange=(30,),
                                  noise=delta, seed=1)
            config = spec.config_for(30)
            sol = truncated_solve(_noisy_system(spec, config, f), 1e-14)
            err = np.abs(f(x) - evaluate(sol, x))
            rows += [{"grid": grid, "gamma": gamma, "delta": delta, "x": float(xv), "error": float(e)}
                     for xv, e in zip(x, err)]
    return {"fig6.csv": rows}


def _fig7_exact(quick):
    Ns = _steps(4, 12, 4) if quick else _steps(4, 40, 4)
    rows = []
    for g in (1.0, 2.0, 4.0):
        rows += _error_curve(["runge100"], "equispaced", Ns, gamma=g, eps_list=(), digits=120, exact=True,
                             points=1001)
    return {"fig7_exact.csv": rows}


def _fig7_numerical(quick):
    Ns = _steps(4, 40, 12) if quick else _steps(4, 200, 4)
    rows = []
    for g in (1.0, 2.0, 4.0):
        rows += _error_curve(["runge100"], "equispaced", Ns, gamma=g)
    rows += _error_curve(["oscil", "absx7", "runge25", "pole87"], "equispaced", Ns, gamma=2.0)
    return {"fig7_numerical.csv": rows}


_C_EPS = (1e-6, 1e-12, 1e-18, 1e-24, 1e-30)


@lru_cache(maxsize=4)
def _constants_sweep(quick: bool):
    Ns = _steps(2, 10, 4) if quick else _steps(2, 48, 2)
    rows = []
    for g in (1.0, 2.0):
        for N in Ns:
            M = max(N, int(round(g * N)))
            for e in _C_EPS:
                rep = stability_constants(N, M, 2.0, e, 130)
                rows.append({"gamma": g, "N": N, "M": M, "eps": e, "C1": rep.C1, "C2": rep.C2,
                             "D": rep.D, "B": rep.B, "keptRank": rep.keptRank})
    return tuple(rows)


def _fig8(quick):
    return {"fig8.csv": [{k: r[k] for k in ("gamma", "N", "M", "eps", "C1", "D", "keptRank")}
                         for r in _constants_sweep(quick)]}


def _fig9(quick):
    return {"fig9.csv": [{k: r[k] for k in ("gamma", "N", "M", "eps", "C2", "B", "keptRank")}
                         for r in _constants_sweep(quick)]}


def _fig10(quick):
    Ns = _steps(4, 12, 8) if quick else _steps(2, 40, 2)
    rows = []
    for g in (1.0, 2.0):
        rows += _error_curve(["runge16"], "equispaced", Ns, gamma=g, eps_list=(1e-6, 1e-12, 1e-18),
                             digits=120, exact=True, points=1001)
    return {"fig10.csv": rows}


def _fig_contour(quick):
    N = 40 if quick else 200
    gammas = np.linspace(1.0, 4.0, 4 if quick else 13)
    Ts = np.linspace(1.25, 4.0, 4 if quick else 12)
    return {"fig_contour.csv": [{"gamma": float(g), "T": float(T), "N": N,
                                 "K": condition_bound("equispaced", N, float(T), float(g), 1e-14)}
                                for g in gammas for T in Ts]}


TARGETS = {
    "table1": [("table1", "double", "about 10 s", _table1)],
    "table2": [("table2", "double", "about 30 s", _table2)],
    "fig1": [("spectra", "double", "about 5 s", _fig1_double),
             ("symmetry", "extended(60)", "about 2 s", _fig1_symmetry)],
    "fig2": [("errors", "double", "about 3 min", _fig2)],
    "fig3": [("numerical", "double", "about 1 min", _fig3_numerical),
             ("exact", "extended(100)", "about 5 min", _fig3_exact)],
    "fig4": [("tsvd-and-exact", "extended(100)", "about 6 min", _fig4)],
    "fig5": [("frame-functions", "extended(60)", "about 30 s", _fig5)],
    "fig6": [("noise", "double", "about 10 s", _fig6)],
    "fig7": [("exact", "extended(120)", "about 4 min", _fig7_exact),
             ("numerical", "double", "about 2 min", _fig7_numerical)],
    "fig8": [("C1", "extended(130)", "about 10 min", _fig8)],
    "fig9": [("C2", "extended(130)", "about 10 min (shared with fig8)", _fig9)],
    "fig10": [("tsvd-and-exact", "extended(120)", "about 4 min", _fig10)],
    "fig-contour": [("contour", "double", "about 2 min", _fig_contour)],
}


def reproduce(target: str, outdir, quick: bool = False, fmt: str = "csv") -> dict:
    """Write the data behind one figure or table into ``outdir``.

    Every panel goes into its own file and a ``<target>_manifest.json``
    lists the files, the precision of each leg and its expected runtime.
    A leg that exceeds its precision or size budget is marked ``failed``
    in the manifest instead of aborting the remaining legs.

    Returns the manifest as a dictionary.
    """
    if target not in TARGETS:
        raise DomainError(f"unknown target {target!r}; choose from {sorted(TARGETS)}")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"target": target, "quick": quick, "format": fmt, "legs": []}
    for name, prec, expected, builder in TARGETS[target]:
        leg = {"name": name, "precision": prec, "extendedPrecision": prec != "double",
               "expectedRuntime": expected, "files": [], "status": "ok", "error": None}
        try:
            tables = builder(quick)
        except (PrecisionError, BudgetError) as exc:
            leg["status"] = "failed"
            leg["error"] = f"{type(exc).__name__}: {exc}"
            tables = {}
        for fname, rows in tables.items():
            if fmt == "jsonl":
                fname = fname.rsplit(".", 1)[0] + ".jsonl"
            write_rows(rows, out / fname, fmt)
            leg["files"].append({"name": fname, "rows": len(rows),
                                 "columns": list(rows[0].keys()) if rows else []})
        manifest["legs"].append(leg)
    manifest["status"] = "ok" if all(l["status"] == "ok" for l in manifest["legs"]) else "partial-failure"
    (out / f"{target}_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
