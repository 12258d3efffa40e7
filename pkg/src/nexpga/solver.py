"""Nonmonotone extrapolated proximal gradient-subgradient method.

Each outer iteration ``k``:

1. pick ``xi`` in the subdifferential of ``P2`` at ``x^k`` and trial values
   ``beta_{k,0}`` in ``[0, delta * beta_max]``, ``gamma_{k,0}`` in
   ``[gamma_min, gamma_max]``;
2. backtrack over ``i = 0, 1, ...``: extrapolate
   ``y = x^k + beta_{k,i} (x^k - x^{k-1})``, take the prox-gradient step

       ``x^{k,i} = prox_{P1/gamma}(y - (grad f(y) - xi) / gamma)``

   and accept it once the potential
   ``H(u, v, gamma) = F(u) + delta * gamma / 8 * ||u - v||^2`` satisfies

       ``H(x^{k,i}, x^k, gamma_{k,i}) - R_k <= -(1 - delta) gamma_{k,i} / 8 * ||x^{k,i} - x^k||^2``;

   on rejection ``beta <- eta * beta`` and ``gamma <- tau * gamma``;
3. update the reference value. The Zhang-Hager rule averages,
   ``R_{k+1} = (1 - p) R_k + p H_{k+1}``; the Grippo-Lampariello-Lucidi rule
   takes the max of the last ``N + 1`` potential values.

No global Lipschitz constant of ``grad f`` is required.
"""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .problem import CompositeProblem, OracleError, as_vector

__all__ = [
    "LineSearchError",
    "InvariantViolation",
    "SolverParams",
    "SolverState",
    "IterTrace",
    "SolveResult",
    "InnerResult",
    "ZHReference",
    "GLLReference",
    "potential",
    "extrapolate",
    "prox_gradient_step",
    "accept_test",
    "inner_loop",
    "reference_update",
    "spectral_gamma_init",
    "fista_beta_next",
    "stationarity_residual",
    "solve",
    "TRACE_FIELDS",
]

logger = logging.getLogger(__name__)

# relative slack in the acceptance test; keeps equal-to-rounding comparisons from rejecting forever
ACCEPT_SLACK = 1e-14
# tolerance of the runtime reference-value checks
INVARIANT_RTOL = 1e-10


class LineSearchError(RuntimeError):
    """Backtracking did not terminate; with correct oracles this cannot happen."""


class InvariantViolation(RuntimeError):
    """A runtime-checked property of the reference values failed."""


@dataclass(frozen=True)
class SolverParams:
    """Parameter block of the method plus the trial-value rules and stopping controls.

    Defaults are the l1-2 least-squares settings: ``tau = 1.56``,
    ``eta = 0.8``, ``beta_max = 10``, ``gamma_min = 1e-6``,
    ``gamma_max = 1e6``, ``p_k = 0.01``, ``delta = 0.1``.

    ``p_schedule`` is either a constant in ``[p_min, 1]`` or a callable
    ``k -> p_{k}``. ``gamma_init`` is ``"spectral"`` (Barzilai-Borwein quotient
    safeguarded by ``0.9 * gamma_bar_{k-1}``) or ``"constant"``; both start
    from ``gamma0``. ``beta_init`` is ``"fista"`` or ``"zero"``.

    At least one of ``max_iters`` / ``max_time`` must be set.
    ``step_tol`` stops once ``||x^{k+1} - x^k|| <= step_tol``.
    """

    gamma_min: float = 1e-6
    gamma_max: float = 1e6
    beta_max: float = 10.0
    p_min: float = 0.01
    delta: float = 0.1
    tau: float = 1.56
    eta: float = 0.8
    p_schedule: float | Callable[[int], float] = 0.01
    gamma_init: str = "spectral"
    gamma0: float = 1.0
    beta_init: str = "fista"
    inner_cap: int = 1000
    # overflow guard only: max-type references can backtrack 150+ times, pushing gamma past 1e30
    gamma_cap: float = 1e300
    max_iters: int | None = 1000
    max_time: float | None = None
    step_tol: float | None = None
    check_invariants: bool = True

    def __post_init__(self):
        if not (0 < self.gamma_min <= self.gamma_max < math.inf):
            raise ValueError("need 0 < gamma_min <= gamma_max < inf")
        if not self.beta_max >= 0:
            raise ValueError("need beta_max >= 0")
        if not (0 < self.p_min <= 1):
            raise ValueError("need 0 < p_min <= 1")
        if not (0 <= self.delta < 1):
            raise ValueError("need 0 <= delta < 1")
        if not self.tau > 1:
            raise ValueError("need tau > 1")
        if not (0 < self.eta and self.tau * self.eta**2 < 1):
            raise ValueError(
                f"need 0 < eta < 1/sqrt(tau); got tau * eta^2 = {self.tau * self.eta**2}"
            )
        if not callable(self.p_schedule) and not (self.p_min <= self.p_schedule <= 1):
            raise ValueError("constant p_schedule must lie in [p_min, 1]")
        if self.gamma_init not in ("spectral", "constant"):
            raise ValueError(f"unknown gamma_init {self.gamma_init!r}")
        if self.beta_init not in ("fista", "zero"):
            raise ValueError(f"unknown beta_init {self.beta_init!r}")
        if not (self.gamma_min <= self.gamma0 <= self.gamma_max):
            raise ValueError("gamma0 must lie in [gamma_min, gamma_max]")
        if self.inner_cap < 1:
            raise ValueError("inner_cap must be positive")
        if self.max_iters is None and self.max_time is None:
            raise ValueError("set max_iters or max_time")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.max_time is not None and not self.max_time > 0:
            raise ValueError("max_time must be positive")

    @property
    def tau_eta_sq(self) -> float:
        return self.tau * self.eta**2

    def p_at(self, k: int) -> float:
        """Weight ``p_k`` used to form ``R_k``."""
        p = self.p_schedule(k) if callable(self.p_schedule) else self.p_schedule
        p = float(p)
        if not (self.p_min <= p <= 1):
            raise ValueError(f"p_{k} = {p} outside [p_min, 1]")
        return p


@dataclass
class SolverState:
    """Mutable per-run state. ``x_prev`` is ``x^{k-1}``; at start it equals ``x^0``."""

    k: int
    x_cur: np.ndarray
    x_prev: np.ndarray
    R: float
    gamma_bar_prev: float
    t_prev: float = 1.0
    t_cur: float = 1.0
    F_cur: float = math.nan
    grad_cur: np.ndarray | None = None
    xi_cur: np.ndarray | None = None
    y_bar_prev: np.ndarray | None = None
    grad_y_bar_prev: np.ndarray | None = None


@dataclass(frozen=True)
class IterTrace:
    """One outer iteration. Record ``k`` describes ``x^k``; record 0 is the start point."""

    k: int
    wall_time: float
    F_val: float
    R_val: float
    H_val: float
    gamma_bar: float
    beta_bar: float
    inner_iters: int
    step_norm: float
    residual: float
    gamma_init: float = math.nan
    beta_init: float = math.nan

    def as_row(self) -> tuple:
        return (self.k, self.wall_time, self.F_val, self.R_val, self.H_val, self.gamma_bar,
                self.beta_bar, self.inner_iters, self.step_norm, self.residual)


@dataclass
class SolveResult:
    x: np.ndarray
    F: float
    traces: list[IterTrace] = field(default_factory=list)
    status: str = ""
    iterates: list[np.ndarray] | None = None

    @property
    def n_iters(self) -> int:
        return self.traces[-1].k if self.traces else 0


class InnerResult(NamedTuple):
    x_next: np.ndarray
    gamma_bar: float
    beta_bar: float
    inner_iters: int
    F_next: float
    H_next: float
    f_next: float
    grad_next: np.ndarray
    y_bar: np.ndarray
    grad_y_bar: np.ndarray


def potential(problem: CompositeProblem, u, v, gamma: float, delta: float, F_u: float | None = None) -> float:
    """``F(u) + delta * gamma / 8 * ||u - v||^2``; ``+inf`` propagates from ``F``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if F_u is None:
        F_u = problem.objective(u)
    if F_u == math.inf:
        return math.inf
    if not math.isfinite(F_u):
        raise OracleError(f"objective is {F_u}")
    d = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    return F_u + delta * gamma / 8.0 * float(d @ d)


def extrapolate(x_cur, x_prev, beta: float) -> np.ndarray:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return x_cur + beta * (x_cur - x_prev)


def prox_gradient_step(problem: CompositeProblem, y, xi, gamma: float, grad_y=None) -> np.ndarray:
    """Minimize ``<grad f(y) - xi, x - y> + gamma/2 ||x - y||^2 + P1(x)`` over ``x``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if grad_y is None:
        _, grad_y = problem.value_grad(y)
    z = y - (grad_y - xi) / gamma
    if not np.all(np.isfinite(z)):
        raise OracleError("non-finite prox-gradient point")
    return problem.prox(z, 1.0 / gamma)


def accept_test(H_cand: float, R: float, gamma: float, delta: float, step_sq: float) -> bool:
    """Sufficient decrease of the potential against the reference value."""
    slack = ACCEPT_SLACK * (1.0 + abs(R))
    return H_cand - R <= -(1.0 - delta) * gamma / 8.0 * step_sq + slack


def reference_update(R: float, p: float, H: float) -> float:
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return (1.0 - p) * R + p * H


def spectral_gamma_init(dy, dg, gamma_bar_prev: float, params: SolverParams) -> float:
    """Barzilai-Borwein trial value, kept above ``0.9 * gamma_bar_prev`` and clipped to the box."""
    dy = np.asarray(dy, dtype=float)
    ss = float(dy @ dy)
    g = 0.9 * gamma_bar_prev
    if ss > 0:
        g = max(float(dy @ np.asarray(dg, dtype=float)) / ss, g)
    return min(max(g, params.gamma_min), params.gamma_max)


def fista_beta_next(t_prev: float, t_cur: float, delta: float, beta_max: float) -> tuple[float, float]:
    """Advance the FISTA sequence; return ``(t_next, beta_0)`` with ``beta_0`` clamped to the box."""
    t_next = (1.0 + math.sqrt(1.0 + 4.0 * t_cur * t_cur)) / 2.0
    beta = (t_prev - 1.0) / t_cur
    return t_next, min(max(beta, 0.0), delta * beta_max)


def stationarity_residual(grad_xnext, grad_y, x_next, y, gamma_bar: float) -> float:
    """``||grad f(x+) - grad f(y) + gamma (y - x+)||``.

    The vector lies in ``grad f(x+) - xi + dP1(x+)``, so this bounds the
    distance of zero to that set.
    """
    return float(np.linalg.norm(grad_xnext - grad_y + gamma_bar * (y - x_next)))


class ZHReference:
    """Average-type reference: ``R_{k+1} = (1 - p_{k+1}) R_k + p_{k+1} H_{k+1}``."""

    name = "ZH"
    monotone = True

    def start(self, H0: float) -> float:
        self.R = H0
        return H0

    def update(self, H: float, p: float) -> float:
        self.R = reference_update(self.R, p, H)
        return self.R


class GLLReference:
    """Max-type reference over the last ``window + 1`` potential values."""

    name = "GLL"
    monotone = False

    def __init__(self, window: int = 4):
        if window < 0:
            raise ValueError("window must be non-negative")
        self.window = window

    def start(self, H0: float) -> float:
        self.history = deque([H0], maxlen=self.window + 1)
        return H0

    def update(self, H: float, p: float) -> float:
        self.history.append(H)
        return max(self.history)


def _eval_candidate(problem: CompositeProblem, x):
    f, g = problem.value_grad(x)
    p1 = problem.p1_value(x)
    if p1 == math.inf:
        return f, g, math.inf
    return f, g, f + p1 - problem.p2_value(x)


def inner_loop(problem: CompositeProblem, state: SolverState, beta0: float, gamma0: float,
               params: SolverParams, grad_y0=None, accept=accept_test) -> InnerResult:
    """Backtrack from ``(beta0, gamma0)`` until the acceptance test holds.

    Uses ``state.xi_cur`` for every trial. Trial ``i`` uses
    ``beta0 * eta**i`` and ``gamma0 * tau**i`` (closed form, no accumulated
    rounding).
    """
    x, xi, R = state.x_cur, state.xi_cur, state.R
    if xi is None:
        raise ValueError("state.xi_cur must be set before the inner loop")
    d = x - state.x_prev
    moving = bool(np.any(d != 0))
    delta = params.delta
    y_cache = None
    for i in range(params.inner_cap + 1):
        beta = beta0 * params.eta**i
        gamma = gamma0 * params.tau**i
        if gamma > params.gamma_cap:
            raise LineSearchError(f"gamma exceeded {params.gamma_cap:g} after {i} trials")
        if beta == 0 or not moving:
            y, g_y = x, state.grad_cur
        else:
            y = x + beta * d
            g_y = grad_y0 if (i == 0 and grad_y0 is not None) else None
        if g_y is None:
            if y_cache is not None and np.array_equal(y_cache[0], y):
                g_y = y_cache[1]
            else:
                _, g_y = problem.value_grad(y)
        y_cache = (y, g_y)
        x_c = prox_gradient_step(problem, y, xi, gamma, grad_y=g_y)
        f_c, g_c, F_c = _eval_candidate(problem, x_c)
        s = x_c - x
        step_sq = float(s @ s)
        H_c = math.inf if F_c == math.inf else F_c + delta * gamma / 8.0 * step_sq
        if accept(H_c, R, gamma, delta, step_sq):
            return InnerResult(x_c, gamma, beta, i, F_c, H_c, f_c, g_c, y, g_y)
    raise LineSearchError(f"line search failed: no acceptance within {params.inner_cap} trials")


def _as_reference(policy) -> ZHReference | GLLReference:
    if policy is None or policy == "ZH":
        return ZHReference()
    if policy == "GLL":
        return GLLReference()
    if isinstance(policy, (ZHReference, GLLReference)):
        return policy
    raise ValueError(f"unknown reference policy {policy!r}")


def solve(problem: CompositeProblem, x0, params: SolverParams | None = None,
          reference="ZH", trace_sink: Callable[[IterTrace], None] | None = None,
          keep_iterates: bool = False) -> SolveResult:
    """Run the method from ``x0``.

    Parameters
    ----------
    problem : CompositeProblem
    x0 : array_like
        Starting point; must have finite objective.
    params : SolverParams, optional
    reference : {"ZH", "GLL"} or a reference object
        ``GLLReference(window)`` gives the max-type rule.
    trace_sink : callable, optional
        Called with every :class:`IterTrace` in iteration order.
    keep_iterates : bool
        Store copies of all iterates in ``result.iterates``.

    Returns
    -------
    SolveResult
        ``status`` is one of ``"max_iters"``, ``"max_time"``, ``"step_tol"``.
    """
    params = params or SolverParams()
    ref = _as_reference(reference)
    check = params.check_invariants and ref.monotone
    delta = params.delta
    t_start = time.perf_counter()

    x0 = as_vector(x0, problem.dimension, "x0").copy()
    f0, g0 = problem.value_grad(x0)
    p1 = problem.p1_value(x0)
    if not math.isfinite(p1):
        raise OracleError("x0 must lie in dom P1")
    F0 = f0 + p1 - problem.p2_value(x0)
    R0 = ref.start(F0)
    state = SolverState(k=0, x_cur=x0, x_prev=x0, R=R0, gamma_bar_prev=params.gamma_min,
                        F_cur=F0, grad_cur=g0)

    result = SolveResult(x=x0, F=F0, iterates=[x0.copy()] if keep_iterates else None)

    def emit(rec: IterTrace):
        result.traces.append(rec)
        if trace_sink is not None:
            trace_sink(rec)

    emit(IterTrace(0, 0.0, F0, R0, F0, params.gamma_min, 0.0, 0, 0.0, math.nan))
    if params.max_iters == 0:
        result.status = "max_iters"
        return result

    while True:
        k = state.k
        state.xi_cur = problem.subgrad(state.x_cur)

        if params.beta_init == "fista":
            t_next, beta0 = fista_beta_next(state.t_prev, state.t_cur, delta, params.beta_max)
        else:
            t_next, beta0 = state.t_cur, 0.0

        d = state.x_cur - state.x_prev
        grad_y0 = None
        if beta0 == 0 or not np.any(d != 0):
            y0, grad_y0 = state.x_cur, state.grad_cur
        else:
            y0 = state.x_cur + beta0 * d
            _, grad_y0 = problem.value_grad(y0)

        if k == 0 or params.gamma_init == "constant":
            gamma0 = params.gamma0
        else:
            gamma0 = spectral_gamma_init(y0 - state.y_bar_prev, grad_y0 - state.grad_y_bar_prev,
                                         state.gamma_bar_prev, params)

        res = inner_loop(problem, state, beta0, gamma0, params, grad_y0=grad_y0)

        step = res.x_next - state.x_cur
        step_sq = float(step @ step)
        p = params.p_at(k + 1)
        R_next = ref.update(res.H_next, p)
        if not (math.isfinite(R_next) and math.isfinite(res.F_next)):
            raise OracleError("non-finite solver state")

        if check:
            tol = INVARIANT_RTOL * (1.0 + abs(state.R))
            bound = state.R - (1.0 - delta) * p * res.gamma_bar / 8.0 * step_sq
            if R_next > bound + tol:
                raise InvariantViolation(f"k={k}: R_next={R_next!r} exceeds descent bound {bound!r}")
            if R_next < res.H_next - tol:
                raise InvariantViolation(f"k={k}: R_next={R_next!r} below potential {res.H_next!r}")

        residual = stationarity_residual(res.grad_next, res.grad_y_bar, res.x_next, res.y_bar,
                                         res.gamma_bar)
        state.x_prev, state.x_cur = state.x_cur, res.x_next
        state.R = R_next
        state.gamma_bar_prev = res.gamma_bar
        state.t_prev, state.t_cur = state.t_cur, t_next
        state.F_cur, state.grad_cur = res.F_next, res.grad_next
        state.y_bar_prev, state.grad_y_bar_prev = res.y_bar, res.grad_y_bar
        state.k = k + 1
        if keep_iterates:
            result.iterates.append(res.x_next.copy())

        step_norm = math.sqrt(step_sq)
        elapsed = time.perf_counter() - t_start
        emit(IterTrace(state.k, elapsed, res.F_next, R_next, res.H_next, res.gamma_bar,
                       res.beta_bar, res.inner_iters, step_norm, residual, gamma0, beta0))

        if params.step_tol is not None and step_norm <= params.step_tol:
            result.status = "step_tol"
        elif params.max_iters is not None and state.k >= params.max_iters:
            result.status = "max_iters"
        elif params.max_time is not None and elapsed >= params.max_time:
            result.status = "max_time"
        if result.status:
            break

    result.x, result.F = state.x_cur, state.F_cur
    logger.debug("solve finished: status=%s k=%d F=%.12g", result.status, state.k, result.F)
    return result


TRACE_FIELDS = ("k", "time_s", "F", "R", "H", "gamma_bar", "beta_bar", "inner_iters",
                "step_norm", "residual")
