"""Random sparse-regression instances and the two splits of the l1-2 objective.

Random numbers come from numpy's PCG64 seeded with ``SeedSequence([seed, trial])``
so every trial owns an independent stream. Only ``Generator.random`` (53-bit
uniform doubles) is used; everything else is derived explicitly:

* Gaussians by Box-Muller on consecutive uniform pairs ``(u1, u2)``:
  ``r = sqrt(-2 log(1 - u1))``, emitting ``r cos(2 pi u2)`` then ``r sin(2 pi u2)``;
* the support by a partial Fisher-Yates shuffle, swap index ``i + floor(u * (n - i))``.

Draw order: ``A`` (row-major), support, nonzeros of ``x_true``, noise.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problem import CompositeProblem, ZeroFunction
from .prox import EuclideanNorm, L1MinusL2, L1Norm, LeastSquares, LeastSquaresData

__all__ = [
    "ValidityWarning",
    "Instance",
    "trial_rng",
    "gaussian",
    "sample_support",
    "generate_instance",
    "standard_dims",
    "decomposition_I",
    "decomposition_II",
    "decomposition",
    "dump_instance",
    "load_instance",
]

logger = logging.getLogger(__name__)


class ValidityWarning(UserWarning):
    """``2 * lam >= ||A^T b||_inf``: the convex-difference split may violate its assumptions."""


@dataclass(frozen=True)
class Instance:
    A: np.ndarray
    b: np.ndarray
    x_true: np.ndarray
    seed: int
    trial: int
    noise_scale: float

    @property
    def dims(self) -> tuple[int, int, int]:
        """``(n, m, s)``."""
        m, n = self.A.shape
        return n, m, int(np.count_nonzero(self.x_true))

    @property
    def data(self) -> LeastSquaresData:
        return LeastSquaresData(self.A, self.b)


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def gaussian(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` standard normals by Box-Muller; consumes ``2 * ceil(size / 2)`` uniforms."""
    pairs = (size + 1) // 2
    u = rng.random(2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    out = np.empty((pairs, 2))
    out[:, 0] = r * np.cos(theta)
    out[:, 1] = r * np.sin(theta)
    return out.reshape(-1)[:size]


def sample_support(rng: np.random.Generator, n: int, s: int) -> np.ndarray:
    """Uniform ``s``-subset of ``range(n)`` in draw order (partial Fisher-Yates)."""
    idx = np.arange(n)
    u = rng.random(s)
    for i in range(s):
        j = i + int(u[i] * (n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:s].copy()


def standard_dims(n: int) -> tuple[int, int, int]:
    """``(n, m, s)`` with ``m = n / 10`` and ``s = m / 5``."""
    m = int(round(0.1 * n))
    return n, m, int(round(0.2 * m))


def generate_instance(n: int, m: int, s: int, noise_scale: float = 0.01, seed: int = 0,
                      trial: int = 0) -> Instance:
    """Gaussian design, ``s``-sparse Gaussian signal, ``b = A x_true + noise_scale * z``."""
    if not (1 <= s <= m <= n):
        raise ValueError(f"need 1 <= s <= m <= n, got n={n}, m={m}, s={s}")
    if noise_scale < 0:
        raise ValueError("noise_scale must be non-negative")
    rng = trial_rng(seed, trial)
    A = gaussian(rng, m * n).reshape(m, n)
    support = sample_support(rng, n, s)
    x_true = np.zeros(n)
    x_true[support] = gaussian(rng, s)
    z = gaussian(rng, m)
    b = A @ x_true
    if noise_scale:
        b = b + noise_scale * z
    return Instance(A, b, x_true, seed, trial, float(noise_scale))


def decomposition_I(inst: Instance, lam: float) -> CompositeProblem:
    """Least squares + ``lam (||x||_1 - ||x||)`` as the prox term, nothing subtracted."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    n = inst.A.shape[1]
    return CompositeProblem(LeastSquares(inst.data), L1MinusL2(lam), ZeroFunction(), n)


def decomposition_II(inst: Instance, lam: float) -> CompositeProblem:
    """Least squares + ``lam ||x||_1`` minus ``lam ||x||``.

    Warns with :class:`ValidityWarning` when ``2 lam >= ||A^T b||_inf``
    (the condition is sufficient, not necessary, so this is not an error).
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    atb = float(np.max(np.abs(inst.A.T @ inst.b)))
    ok = 2 * lam < atb
    logger.info("validity check 2*lam=%g vs ||A^T b||_inf=%g: %s", 2 * lam, atb, "ok" if ok else "violated")
    if not ok:
        warnings.warn(f"2*lam = {2 * lam:g} >= ||A^T b||_inf = {atb:g}", ValidityWarning, stacklevel=2)
    n = inst.A.shape[1]
    return CompositeProblem(LeastSquares(inst.data), L1Norm(lam), EuclideanNorm(lam), n)


def decomposition(inst: Instance, lam: float, which: str) -> CompositeProblem:
    if which == "I":
        return decomposition_I(inst, lam)
    if which == "II":
        return decomposition_II(inst, lam)
    raise ValueError(f"unknown decomposition {which!r}")


def dump_instance(inst: Instance, path) -> None:
    """Text fixture: ``n m s seed noise`` header, row-major A, b, then ``index value`` pairs."""
    n, m, s = inst.dims
    fmt = "%.17g"
    with open(path, "w") as fh:
        fh.write(f"{n} {m} {s} {inst.seed} {fmt % inst.noise_scale}\n")
        for row in inst.A:
            fh.write(" ".join(fmt % v for v in row) + "\n")
        fh.write(" ".join(fmt % v for v in inst.b) + "\n")
        for i in np.flatnonzero(inst.x_true):
            fh.write(f"{i} {fmt % inst.x_true[i]}\n")


def load_instance(path) -> Instance:
    lines = Path(path).read_text().splitlines()
    n, m, s, seed = (int(v) for v in lines[0].split()[:4])
    noise = float(lines[0].split()[4])
    A = np.array([[float(v) for v in line.split()] for line in lines[1:1 + m]])
    b = np.array([float(v) for v in lines[1 + m].split()])
    x_true = np.zeros(n)
    for line in lines[2 + m:2 + m + s]:
        i, v = line.split()
        x_true[int(i)] = float(v)
    if A.shape != (m, n):
        raise ValueError(f"A has shape {A.shape}, header says {(m, n)}")
    return Instance(A, b, x_true, seed, 0, noise)
