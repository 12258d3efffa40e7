"""Comparison methods and the named method roster.

=========  =============  ==========================================
label      decomposition  method
=========  =============  ==========================================
nexPGA     I              ZH reference, delta = 0.1, FISTA betas
NPG        I              ZH reference, delta = 0 (no extrapolation)
PGels      I              GLL reference (window 4), delta = 0.1
nexPGA-DC  II             ZH reference, delta = 0.1, FISTA betas
pDCAe      II             fixed step 1/L, FISTA betas, restart 200
=========  =============  ==========================================
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .problem import CompositeProblem, OracleError, as_vector
from .solver import (
    GLLReference,
    IterTrace,
    SolveResult,
    SolverParams,
    ZHReference,
    fista_beta_next,
    prox_gradient_step,
    solve,
    stationarity_residual,
)

__all__ = [
    "METHOD_LABELS",
    "DECOMPOSITION_OF",
    "PDCAeParams",
    "MethodConfig",
    "make_nexpga",
    "make_npg",
    "make_nexpga_dc",
    "make_pgels",
    "make_pdcae",
    "make_method",
    "pdcae_step",
    "lipschitz_bound",
    "solve_pdcae",
]

logger = logging.getLogger(__name__)

METHOD_LABELS = ("nexPGA", "nexPGA-DC", "NPG", "PGels", "pDCAe")
DECOMPOSITION_OF = {"nexPGA": "I", "NPG": "I", "PGels": "I", "nexPGA-DC": "II", "pDCAe": "II"}


@dataclass(frozen=True)
class PDCAeParams:
    """Fixed-step settings. ``L`` of ``None`` means estimate it from the design matrix."""

    L: float | None = None
    restart_period: int = 200
    max_iters: int | None = 1000
    max_time: float | None = None

    def __post_init__(self):
        if self.L is not None and not self.L > 0:
            raise ValueError("L must be positive")
        if self.restart_period < 1:
            raise ValueError("restart_period must be positive")
        if self.max_iters is None and self.max_time is None:
            raise ValueError("set max_iters or max_time")


@dataclass(frozen=True)
class MethodConfig:
    label: str
    decomposition: str
    params: SolverParams | None = None
    reference: str = "ZH"
    gll_window: int = 4
    pdcae: PDCAeParams | None = None

    def __post_init__(self):
        if self.decomposition not in ("I", "II"):
            raise ValueError(f"decomposition must be 'I' or 'II', got {self.decomposition!r}")
        expected = DECOMPOSITION_OF.get(self.label)
        if expected is not None and expected != self.decomposition:
            raise ValueError(f"{self.label} runs on decomposition {expected}")
        if (self.params is None) == (self.pdcae is None):
            raise ValueError("give exactly one of params / pdcae")

    def with_budget(self, max_time: float | None = None, max_iters: int | None = None) -> "MethodConfig":
        """Copy with new stopping controls."""
        if self.pdcae is not None:
            return replace(self, pdcae=replace(self.pdcae, max_time=max_time, max_iters=max_iters))
        return replace(self, params=replace(self.params, max_time=max_time, max_iters=max_iters))

    def run(self, problem: CompositeProblem, x0, A=None, trace_sink=None,
            keep_iterates: bool = False) -> SolveResult:
        """Run on ``problem`` from ``x0``. ``A`` is needed only by pDCAe without a fixed ``L``."""
        if self.pdcae is not None:
            return solve_pdcae(problem, x0, self.pdcae, A=A, trace_sink=trace_sink,
                               keep_iterates=keep_iterates)
        ref = GLLReference(self.gll_window) if self.reference == "GLL" else ZHReference()
        return solve(problem, x0, self.params, reference=ref, trace_sink=trace_sink,
                     keep_iterates=keep_iterates)


def make_nexpga(delta: float = 0.1, decomposition: str = "I", **overrides) -> MethodConfig:
    """ZH-type method with the default parameter block.

    ``delta = 0`` is NPG (the FISTA trial betas are clamped to zero);
    other values outside the roster get a ``nexPGA(delta=...)`` label.
    """
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    beta_init = "fista" if delta > 0 else "zero"
    params = SolverParams(delta=delta, beta_init=beta_init, **overrides)
    if delta == 0:
        label = "NPG" if decomposition == "I" else "NPG-DC"
    elif delta == 0.1:
        label = "nexPGA" if decomposition == "I" else "nexPGA-DC"
    else:
        label = f"nexPGA(delta={delta:g})"
    return MethodConfig(label, decomposition, params=params)


def make_npg(**overrides) -> MethodConfig:
    return make_nexpga(0.0, **overrides)


def make_nexpga_dc(**overrides) -> MethodConfig:
    return make_nexpga(0.1, decomposition="II", **overrides)


def make_pgels(window: int = 4, **overrides) -> MethodConfig:
    params = SolverParams(delta=0.1, beta_init="fista", **overrides)
    return MethodConfig("PGels", "I", params=params, reference="GLL", gll_window=window)


def make_pdcae(L: float | None = None, restart_period: int = 200, **budget) -> MethodConfig:
    return MethodConfig("pDCAe", "II", pdcae=PDCAeParams(L=L, restart_period=restart_period, **budget))


_FACTORIES: dict[str, Callable[[], MethodConfig]] = {
    "nexPGA": make_nexpga,
    "NPG": make_npg,
    "PGels": make_pgels,
    "nexPGA-DC": make_nexpga_dc,
    "pDCAe": make_pdcae,
}


def make_method(label: str) -> MethodConfig:
    try:
        return _FACTORIES[label]()
    except KeyError:
        raise ValueError(f"unknown method {label!r}; choose from {', '.join(METHOD_LABELS)}") from None


def pdcae_step(problem: CompositeProblem, y, xi, L: float, grad_y=None) -> np.ndarray:
    """``prox_{P1/L}(y - (grad f(y) - xi) / L)``, i.e. a prox-gradient step with fixed ``gamma = L``."""
    return prox_gradient_step(problem, y, xi, L, grad_y=grad_y)


def lipschitz_bound(A, rtol: float = 1e-10, max_iter: int = 5000, inflate: float = 1.01,
                    seed: int = 0) -> float:
    """Upper estimate of ``lambda_max(A^T A)`` by power iteration, inflated by ``inflate``.

    Iterates on the smaller of ``A^T A`` / ``A A^T``. Raises ``RuntimeError``
    if the Rayleigh quotient has not settled to ``rtol`` within ``max_iter``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("A must be a non-empty matrix")
    m, n = A.shape
    if m <= n:
        op = lambda v: A @ (A.T @ v)  # noqa: E731
        dim = m
    else:
        op = lambda v: A.T @ (A @ v)  # noqa: E731
        dim = n
    v = np.random.default_rng(seed).standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = op(v)
        lam_new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        if abs(lam_new - lam) <= rtol * abs(lam_new):
            return inflate * lam_new
        lam = lam_new
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


def solve_pdcae(problem: CompositeProblem, x0, params: PDCAeParams, A=None,
                trace_sink=None, keep_iterates: bool = False) -> SolveResult:
    """Proximal DC algorithm with extrapolation and a fixed step ``1/L``.

    The FISTA sequence is reset every ``restart_period`` iterations. Trace
    records carry ``R = H = F`` and ``gamma_bar = L``. Estimating ``L``
    counts toward the run's wall time.
    """
    t_start = time.perf_counter()
    L = params.L
    if L is None:
        if A is None:
            raise ValueError("pDCAe needs L or the design matrix A")
        L = lipschitz_bound(A)

    x = as_vector(x0, problem.dimension, "x0").copy()
    x_prev = x
    f0, g_x = problem.value_grad(x)
    F = problem.objective(x)
    if not math.isfinite(F):
        raise OracleError("x0 must have finite objective")
    result = SolveResult(x=x, F=F, iterates=[x.copy()] if keep_iterates else None)

    def emit(rec):
        result.traces.append(rec)
        if trace_sink is not None:
            trace_sink(rec)

    emit(IterTrace(0, 0.0, F, F, F, L, 0.0, 0, 0.0, math.nan))
    if params.max_iters == 0:
        result.status = "max_iters"
        return result

    t_prev = t_cur = 1.0
    k = 0
    while True:
        if k % params.restart_period == 0:
            t_prev = t_cur = 1.0
        t_next, beta = fista_beta_next(t_prev, t_cur, 1.0, 1.0)
        xi = problem.subgrad(x)
        if beta == 0.0:
            y, g_y = x, g_x
        else:
            y = x + beta * (x - x_prev)
            _, g_y = problem.value_grad(y)
        x_new = pdcae_step(problem, y, xi, L, grad_y=g_y)
        f_new, g_new = problem.value_grad(x_new)
        F = f_new + problem.p1_value(x_new) - problem.p2_value(x_new)
        if not math.isfinite(F):
            raise OracleError("non-finite objective along pDCAe iterates")
        residual = stationarity_residual(g_new, g_y, x_new, y, L)
        step_norm = float(np.linalg.norm(x_new - x))
        x_prev, x, g_x = x, x_new, g_new
        t_prev, t_cur = t_cur, t_next
        k += 1
        if keep_iterates:
            result.iterates.append(x.copy())
        elapsed = time.perf_counter() - t_start
        emit(IterTrace(k, elapsed, F, F, F, L, beta, 0, step_norm, residual, L, beta))
        if params.max_iters is not None and k >= params.max_iters:
            result.status = "max_iters"
        elif params.max_time is not None and elapsed >= params.max_time:
            result.status = "max_time"
        if result.status:
            break
    result.x, result.F = x, F
    return result
