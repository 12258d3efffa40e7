"""Normalized objective decrease ``e(k)`` and its time evolution ``E(t)``.

``e(k) = (F(x^k) - F_min) / (F(x^0) - F_min)`` with ``F_min`` the best final
objective of any method on the same trial, and
``E(t) = min{ e(k) : T(k) <= t }`` where ``T(k)`` is the wall time at which
``x^k`` became available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DegenerateTrial",
    "EvolutionCurve",
    "relative_error_series",
    "evolution_curve",
    "f_min_of_trial",
    "time_grid",
    "average_curves",
]


class DegenerateTrial(ValueError):
    """``F(x^0) <= F_min``: the normalization is undefined."""


@dataclass(frozen=True)
class EvolutionCurve:
    method: str
    grid: np.ndarray
    values: np.ndarray
    trials: int = 1
    stderr: np.ndarray | None = None


def relative_error_series(traces, F_min: float, F0: float | None = None) -> list[tuple[int, float]]:
    """``(k, e(k))`` for every trace record, clipped to ``[0, 1]``.

    ``F0`` defaults to the objective of the first record.
    """
    traces = list(traces)
    if F0 is None:
        F0 = traces[0].F_val
    denom = F0 - F_min
    if not denom > 0:
        raise DegenerateTrial(f"F0 = {F0!r} <= F_min = {F_min!r}")
    return [(tr.k, min(max((tr.F_val - F_min) / denom, 0.0), 1.0)) for tr in traces]


def evolution_curve(series: Sequence[tuple[float, float]], grid) -> np.ndarray:
    """Running minimum of ``e`` over records with time ``<= t``, for each ``t`` in ``grid``.

    ``series`` holds ``(time, e)`` pairs sorted by time, starting at time 0.
    Grid points before the first record get ``nan``.
    """
    if len(series) == 0:
        raise ValueError("empty series")
    times = np.array([t for t, _ in series], dtype=float)
    errs = np.array([e for _, e in series], dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError("series must be sorted by time")
    running = np.minimum.accumulate(errs)
    idx = np.searchsorted(times, np.asarray(grid, dtype=float), side="right") - 1
    out = np.full(idx.shape, np.nan)
    ok = idx >= 0
    out[ok] = running[idx[ok]]
    return out


def f_min_of_trial(finals: Iterable[float]) -> float:
    finals = list(finals)
    if not finals:
        raise ValueError("no completed methods")
    return float(min(finals))


def time_grid(T_max: float, points: int = 200) -> np.ndarray:
    if points < 2 or not T_max > 0:
        raise ValueError("need T_max > 0 and at least 2 grid points")
    return np.linspace(0.0, T_max, points)


def average_curves(method: str, grid, curves: Sequence[np.ndarray]) -> EvolutionCurve:
    """Pointwise mean and standard error over per-trial curves."""
    stack = np.vstack(curves)
    k = stack.shape[0]
    mean = stack.mean(axis=0)
    stderr = stack.std(axis=0, ddof=1) / np.sqrt(k) if k > 1 else np.zeros_like(mean)
    return EvolutionCurve(method, np.asarray(grid, dtype=float), mean, k, stderr)
