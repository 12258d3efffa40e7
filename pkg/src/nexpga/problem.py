"""Composite objective ``F = f + P1 - P2`` and the oracle protocols it is built from.

A problem bundles three oracles:

* a smooth term ``f`` exposing its value and gradient,
* a prox-friendly term ``P1`` exposing its value and proximal mapping,
* a convex term ``P2`` exposing its value and one subgradient.

Solvers only ever talk to a :class:`CompositeProblem`; the concrete
least-squares / l1 / l1-l2 oracles live in :mod:`nexpga.prox`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np

__all__ = [
    "OracleError",
    "SmoothOracle",
    "ProxOracle",
    "SubgradOracle",
    "FunctionSmooth",
    "ZeroFunction",
    "CompositeProblem",
    "as_vector",
    "eval_objective",
    "smooth_value_grad",
]


class OracleError(ValueError):
    """Raised when an oracle is called with bad input or returns garbage."""


def as_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise OracleError(f"{name} must be a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise OracleError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise OracleError(f"{name} contains non-finite entries")
    return v


@runtime_checkable
class SmoothOracle(Protocol):
    def value(self, x: np.ndarray) -> float: ...

    def value_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]: ...


@runtime_checkable
class ProxOracle(Protocol):
    def value(self, x: np.ndarray) -> float: ...

    def prox(self, z: np.ndarray, t: float) -> np.ndarray: ...


@runtime_checkable
class SubgradOracle(Protocol):
    def value(self, x: np.ndarray) -> float: ...

    def subgrad(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class FunctionSmooth:
    """Smooth oracle wrapping a plain ``(value, gradient)`` callable pair.

    Handy for tests and toy problems, e.g.
    ``FunctionSmooth(lambda x: 0.5 * x @ x, lambda x: x)``.
    """

    fun: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]

    def value(self, x):
        return float(self.fun(x))

    def value_grad(self, x):
        return float(self.fun(x)), np.asarray(self.grad(x), dtype=float)


class ZeroFunction:
    """The zero function; usable as a smooth term, a prox term or a subgradient term."""

    def value(self, x):
        return 0.0

    def value_grad(self, x):
        return 0.0, np.zeros_like(x, dtype=float)

    def prox(self, z, t):
        if not t > 0:
            raise OracleError(f"prox weight must be positive, got {t}")
        return np.array(z, dtype=float, copy=True)

    def subgrad(self, x):
        return np.zeros_like(x, dtype=float)

    def __repr__(self):
        return "ZeroFunction()"


@dataclass(frozen=True)
class CompositeProblem:
    """``min_x f(x) + P1(x) - P2(x)`` over vectors of length ``dimension``.

    Parameters
    ----------
    smooth : SmoothOracle
        Continuously differentiable term with a locally Lipschitz gradient.
    p1 : ProxOracle
        Proper lsc term with an easy proximal mapping. May return ``+inf``.
    p2 : SubgradOracle
        Continuous convex term; only one subgradient per point is used.
    dimension : int
        Length of the decision vector.
    """

    smooth: SmoothOracle
    p1: ProxOracle
    p2: SubgradOracle
    dimension: int

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise OracleError(f"dimension must be a positive integer, got {self.dimension}")

    def objective(self, x: np.ndarray) -> float:
        return eval_objective(self, x)

    def value_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        return smooth_value_grad(self.smooth, x, self.dimension)

    def p1_value(self, x: np.ndarray) -> float:
        v = float(self.p1.value(x))
        if np.isnan(v) or v == -np.inf:
            raise OracleError(f"P1 returned {v}")
        return v

    def p2_value(self, x: np.ndarray) -> float:
        v = float(self.p2.value(x))
        if not np.isfinite(v):
            raise OracleError(f"P2 returned {v}")
        return v

    def subgrad(self, x: np.ndarray) -> np.ndarray:
        xi = np.asarray(self.p2.subgrad(x), dtype=float)
        if xi.shape != (self.dimension,) or not np.all(np.isfinite(xi)):
            raise OracleError("P2 subgradient has wrong shape or non-finite entries")
        return xi

    def prox(self, z: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(self.p1.prox(z, t), dtype=float)
        if x.shape != (self.dimension,) or not np.all(np.isfinite(x)):
            raise OracleError("P1 prox returned wrong shape or non-finite entries")
        return x


def smooth_value_grad(oracle: SmoothOracle, x, n: int | None = None) -> tuple[float, np.ndarray]:
    """Evaluate a smooth oracle and validate its output."""
    x = as_vector(x, n)
    val, grad = oracle.value_grad(x)
    val = float(val)
    grad = np.asarray(grad, dtype=float)
    if not np.isfinite(val):
        raise OracleError(f"smooth term returned non-finite value {val}")
    if grad.shape != x.shape or not np.all(np.isfinite(grad)):
        raise OracleError("smooth gradient has wrong shape or non-finite entries")
    return val, grad


def eval_objective(problem: CompositeProblem, x) -> float:
    """Return ``f(x) + P1(x) - P2(x)``; ``+inf`` when ``x`` is outside ``dom P1``."""
    x = as_vector(x, problem.dimension)
    fval = float(problem.smooth.value(x))
    if not np.isfinite(fval):
        raise OracleError(f"smooth term returned non-finite value {fval}")
    p1 = problem.p1_value(x)
    if p1 == np.inf:
        return np.inf
    return fval + p1 - problem.p2_value(x)
