"""Concrete oracles for l1-2 regularized least squares.

``F(x) = 0.5 * ||A x - b||^2 + lam * (||x||_1 - ||x||_2)`` can be split two ways:

* ``LeastSquares`` + ``L1MinusL2(lam)`` + ``ZeroFunction()``
* ``LeastSquares`` + ``L1Norm(lam)`` + ``EuclideanNorm(lam)``

Both splits are built by :mod:`nexpga.instances`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import OracleError, as_vector

__all__ = [
    "LeastSquaresData",
    "LeastSquares",
    "least_squares_oracle",
    "soft_threshold",
    "prox_l1_minus_l2",
    "norm_subgradient",
    "L1Norm",
    "L1MinusL2",
    "EuclideanNorm",
]


def _check_weight(t) -> float:
    t = float(t)
    if not (t > 0 and np.isfinite(t)):
        raise OracleError(f"prox weight must be positive and finite, got {t}")
    return t


@dataclass(frozen=True)
class LeastSquaresData:
    """Design matrix ``A`` (m x n) and observations ``b`` (length m)."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise OracleError(f"A must be a non-empty matrix, got shape {A.shape}")
        if b.shape != (A.shape[0],):
            raise OracleError(f"b must have length {A.shape[0]}, got shape {b.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise OracleError("least-squares data contains non-finite entries")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass(frozen=True)
class LeastSquares:
    """``f(x) = 0.5 * ||A x - b||^2`` with gradient ``A^T (A x - b)``.

    The normal matrix is never formed: for the wide designs used here two
    mat-vecs are cheaper than one n x n product.
    """

    data: LeastSquaresData
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", self.data.A.shape[1])

    def _residual(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise OracleError(f"x has shape {x.shape}, expected ({self.n},)")
        return self.data.A @ x - self.data.b

    def value(self, x):
        r = self._residual(x)
        return 0.5 * float(r @ r)

    def value_grad(self, x):
        r = self._residual(x)
        return 0.5 * float(r @ r), self.data.A.T @ r


def least_squares_oracle(data: LeastSquaresData) -> LeastSquares:
    return LeastSquares(data)


def soft_threshold(z, t) -> np.ndarray:
    """Proximal mapping of ``t * ||.||_1``: ``sign(z) * max(|z| - t, 0)``."""
    t = _check_weight(t)
    z = np.asarray(z, dtype=float)
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def prox_l1_minus_l2(z, t) -> np.ndarray:
    """Global minimizer of ``0.5 * ||x - z||^2 + t * (||x||_1 - ||x||_2)``.

    Closed form (three cases on ``||z||_inf``):

    * ``||z||_inf > t``: shrink ``w = soft_threshold(z, t)`` then rescale,
      ``x = w * (||w|| + t) / ||w||``. The minimizer is unique.
    * ``0 < ||z||_inf <= t``: the minimizers are the 1-sparse vectors keeping
      one largest-magnitude entry of ``z``; the lowest such index is returned.
    * ``z = 0``: ``x = 0``.
    """
    t = _check_weight(t)
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise OracleError(f"z must be a 1-D vector, got shape {z.shape}")
    x = np.zeros_like(z)
    if z.size == 0:
        return x
    absz = np.abs(z)
    i = int(np.argmax(absz))
    zmax = absz[i]
    if zmax > t:
        w = np.sign(z) * np.maximum(absz - t, 0.0)
        wnorm = np.linalg.norm(w)
        return w * ((wnorm + t) / wnorm)
    if zmax > 0:
        x[i] = z[i]
    return x


def norm_subgradient(x, lam) -> np.ndarray:
    """One element of the subdifferential of ``lam * ||x||_2``; zero at the origin."""
    lam = float(lam)
    if not lam > 0:
        raise OracleError(f"lam must be positive, got {lam}")
    x = as_vector(x)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return np.zeros_like(x)
    return (lam / nrm) * x


@dataclass(frozen=True)
class L1Norm:
    """``P1(x) = lam * ||x||_1``."""

    lam: float

    def value(self, x):
        return self.lam * float(np.abs(x).sum())

    def prox(self, z, t):
        return soft_threshold(z, self.lam * _check_weight(t))


@dataclass(frozen=True)
class L1MinusL2:
    """``P1(x) = lam * (||x||_1 - ||x||_2)``, nonconvex but with a closed-form prox."""

    lam: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * (float(np.abs(x).sum()) - float(np.linalg.norm(x)))

    def prox(self, z, t):
        return prox_l1_minus_l2(z, self.lam * _check_weight(t))


@dataclass(frozen=True)
class EuclideanNorm:
    """``P2(x) = lam * ||x||_2`` with the subgradient selector of :func:`norm_subgradient`."""

    lam: float

    def value(self, x):
        return self.lam * float(np.linalg.norm(x))

    def subgrad(self, x):
        return norm_subgradient(x, self.lam)
