"""Benchmark harness: random trials, all methods under one time budget, E(t) curves.

Outputs written to ``output_dir``:

``curves.csv``
    ``method,lambda,n,t,E_mean,E_stderr,trials``, one row per grid point.
``trace_<method>_lam<lambda>_n<n>_trial<i>.csv``
    ``method,lambda,n,trial,k,time_s,F,R,H,gamma_bar,beta_bar,inner_iters,step_norm,residual``.
``failures.csv``
    Only when some run raised: ``method,lambda,n,trial,error``.
``evolution_n<n>_lam<lambda>.svg``
    One plot per ``lambda`` (optional).
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import DECOMPOSITION_OF, METHOD_LABELS, make_method
from .instances import ValidityWarning, decomposition, generate_instance
from .metrics import (
    DegenerateTrial,
    EvolutionCurve,
    average_curves,
    evolution_curve,
    f_min_of_trial,
    relative_error_series,
    time_grid,
)
from .problem import OracleError
from .solver import TRACE_FIELDS, InvariantViolation, LineSearchError

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "parse_config_text",
    "load_config",
    "run_experiment",
    "read_trace_csv",
    "CURVE_HEADER",
    "TRACE_HEADER",
]

logger = logging.getLogger(__name__)

CURVE_HEADER = ("method", "lambda", "n", "t", "E_mean", "E_stderr", "trials")
TRACE_HEADER = ("method", "lambda", "n", "trial") + TRACE_FIELDS

SOLVER_ERRORS = (LineSearchError, InvariantViolation, OracleError, RuntimeError, FloatingPointError)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """One experiment: ``trials`` random instances per ``lambda``, every method on each.

    ``m`` and ``s`` default to ``n / 10`` and ``m / 5``. ``max_iters`` is an
    extra stop used for reproducible runs; the time budget ``T_max`` always
    applies and sets the E(t) grid.
    """

    n: int = 1000
    m: int | None = None
    s: int | None = None
    lambdas: list[float] = field(default_factory=lambda: [0.1])
    trials: int = 10
    T_max: float = 2.0
    methods: list[str] = field(default_factory=lambda: list(METHOD_LABELS))
    seed: int = 0
    time_grid_points: int = 200
    output_dir: str | None = "results"
    noise_scale: float = 0.01
    max_iters: int | None = None
    plots: bool = True

    def __post_init__(self):
        if self.m is None:
            self.m = max(1, int(round(0.1 * self.n)))
        if self.s is None:
            self.s = max(1, int(round(0.2 * self.m)))
        self.validate()

    def validate(self):
        if not (1 <= self.s <= self.m <= self.n):
            raise ConfigError(f"need 1 <= s <= m <= n, got n={self.n}, m={self.m}, s={self.s}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.T_max > 0:
            raise ConfigError("T_max must be positive")
        if self.time_grid_points < 2:
            raise ConfigError("time_grid_points must be >= 2")
        if not self.lambdas or any(not lam > 0 for lam in self.lambdas):
            raise ConfigError("lambdas must be a non-empty list of positive numbers")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        for label in self.methods:
            if label not in METHOD_LABELS:
                raise ConfigError(f"unknown method {label!r}; choose from {', '.join(METHOD_LABELS)}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in ("lambdas",):
            return [float(v) for v in raw.replace(",", " ").split()]
        if key == "methods":
            return [v.strip() for v in raw.split(",") if v.strip()]
        if key in ("n", "m", "s", "trials", "seed", "time_grid_points", "max_iters"):
            return None if raw.lower() == "none" else int(raw)
        if key in ("T_max", "noise_scale"):
            return float(raw)
        if key == "plots":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if key == "output_dir":
            return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    raise ConfigError(f"unknown key {key!r}")


_ALIASES = {"lambda": "lambdas", "t_max": "T_max", "out": "output_dir"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments) into config keyword arguments."""
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _parse_value(key, raw)
    return out


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    kwargs = parse_config_text(text)
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    grid: np.ndarray
    curves: dict[tuple[float, str], EvolutionCurve] = field(default_factory=dict)
    trial_curves: dict[tuple[float, str], list[np.ndarray]] = field(default_factory=dict)
    final_objectives: dict[tuple[float, int, str], float] = field(default_factory=dict)
    failures: list[tuple[str, float, int, str]] = field(default_factory=list)
    degenerate: list[tuple[float, int]] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    @property
    def all_trials_failed(self) -> bool:
        cfg = self.config
        failed = {(lam, trial) for _, lam, trial, _ in self.failures}
        return len(failed) == len(cfg.lambdas) * cfg.trials

    def E_final(self, lam: float, method: str) -> float:
        return float(self.curves[(lam, method)].values[-1])


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _trace_path(out: Path, method: str, lam: float, n: int, trial: int) -> Path:
    return out / f"trace_{method}_lam{lam:g}_n{n}_trial{trial}.csv"


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (lambda, trial, method) and aggregate the E(t) curves.

    A solver error aborts only that method's run; it is recorded in
    ``result.failures`` and the experiment continues.
    """
    config.validate()
    grid = time_grid(config.T_max, config.time_grid_points)
    result = ExperimentResult(config, grid)
    out = Path(config.output_dir) if config.output_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    methods = {label: make_method(label).with_budget(config.T_max, config.max_iters)
               for label in config.methods}

    for lam in config.lambdas:
        for trial in range(config.trials):
            inst = generate_instance(config.n, config.m, config.s, config.noise_scale,
                                     config.seed, trial)
            problems = {}
            traces = {}
            x0 = np.zeros(config.n)
            for label, method in methods.items():
                dec = DECOMPOSITION_OF[label]
                if dec not in problems:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", ValidityWarning)
                        problems[dec] = decomposition(inst, lam, dec)
                try:
                    res = method.run(problems[dec], x0, A=inst.A)
                except SOLVER_ERRORS as exc:
                    logger.error("%s failed on lambda=%g trial=%d: %s", label, lam, trial, exc)
                    result.failures.append((label, lam, trial, f"{type(exc).__name__}: {exc}"))
                    continue
                traces[label] = res.traces
                result.final_objectives[(lam, trial, label)] = res.traces[-1].F_val
                if out is not None:
                    path = _trace_path(out, label, lam, config.n, trial)
                    _write_trace(path, label, lam, config.n, trial, res.traces)
                    result.files.append(path)
            if not traces:
                continue
            F_min = f_min_of_trial(tr[-1].F_val for tr in traces.values())
            F0 = next(iter(traces.values()))[0].F_val
            for label, tr in traces.items():
                try:
                    errs = relative_error_series(tr, F_min, F0)
                except DegenerateTrial:
                    logger.warning("degenerate trial lambda=%g trial=%d excluded", lam, trial)
                    result.degenerate.append((lam, trial))
                    break
                series = [(rec.wall_time, e) for rec, (_, e) in zip(tr, errs)]
                result.trial_curves.setdefault((lam, label), []).append(evolution_curve(series, grid))

    for (lam, label), curves in result.trial_curves.items():
        result.curves[(lam, label)] = average_curves(label, grid, curves)

    if out is not None:
        result.files.append(_write_curves(out / "curves.csv", config, result))
        if result.failures:
            result.files.append(_write_failures(out / "failures.csv", config, result))
        if config.plots and result.curves:
            result.files.extend(_plot(out, config, result))
    return result


def _write_trace(path: Path, method: str, lam: float, n: int, trial: int, traces) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in traces:
            w.writerow([method, _fmt(lam), n, trial] + [_fmt(v) for v in rec.as_row()])


def read_trace_csv(path) -> list[dict]:
    """Rows of a trace CSV with numeric columns converted."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            conv = {"method": row["method"]}
            for key in TRACE_HEADER[1:]:
                conv[key] = int(row[key]) if key in ("n", "trial", "k", "inner_iters") else float(row[key])
            rows.append(conv)
    return rows


def _write_curves(path: Path, config: ExperimentConfig, result: ExperimentResult) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for (lam, label), curve in result.curves.items():
            for t, e, se in zip(curve.grid, curve.values, curve.stderr):
                w.writerow([label, _fmt(lam), config.n, _fmt(t), _fmt(e), _fmt(se), curve.trials])
    return path


def _write_failures(path: Path, config: ExperimentConfig, result: ExperimentResult) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("method", "lambda", "n", "trial", "error"))
        for label, lam, trial, err in result.failures:
            w.writerow([label, _fmt(lam), config.n, trial, err])
    return path


def _plot(out: Path, config: ExperimentConfig, result: ExperimentResult) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    for lam in config.lambdas:
        fig, ax = plt.subplots(figsize=(5, 4))
        for label in config.methods:
            curve = result.curves.get((lam, label))
            if curve is None:
                continue
            ax.plot(curve.grid, curve.values, label=label)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("average E(t)")
        ax.set_title(f"n = {config.n}, lambda = {lam:g}")
        ax.set_ylim(bottom=0.0)
        if not math.isclose(config.T_max, 0):
            ax.set_xlim(0, config.T_max)
        ax.legend()
        fig.tight_layout()
        path = out / f"evolution_n{config.n}_lam{lam:g}.svg"
        fig.savefig(path)
        plt.close(fig)
        paths.append(path)
    return paths

