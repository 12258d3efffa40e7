"""
Proximal maps of the l1 and l1-l2 penalties
===========================================

The solver only ever touches the nonsmooth part through its proximal map.
Here we look at the two maps used by the sparse-regression experiments.
"""

import numpy as np

from nexpga import prox_l1_minus_l2, soft_threshold

# Soft thresholding shrinks every coordinate towards zero by ``t``.
z = np.array([3.0, -0.5, 1.2, 0.0])
print("soft_threshold :", soft_threshold(z, 1.0))

# The l1-l2 map first soft-thresholds, then pushes the result back out
# along its own direction by ``t``: the -||x|| term rewards large vectors.
print("prox_l1_minus_l2:", prox_l1_minus_l2(z, 1.0))

# When every entry is below the threshold the map is not zero: it keeps
# exactly one coordinate, the largest in magnitude (lowest index on ties).
print("small input     :", prox_l1_minus_l2(np.array([0.3, -0.9, 0.9]), 1.0))

# Only the all-zero input maps to zero.
print("zero input      :", prox_l1_minus_l2(np.zeros(3), 1.0))

# Sanity check: the prox point beats random perturbations on the subproblem.
def subproblem(x, z, t):
    return 0.5 * np.sum((x - z) ** 2) + t * (np.abs(x).sum() - np.linalg.norm(x))

rng = np.random.default_rng(0)
z = rng.normal(size=5)
x = prox_l1_minus_l2(z, 0.7)
worse = min(subproblem(x + 0.1 * rng.normal(size=5), z, 0.7) for _ in range(1000))
print(f"subproblem at prox point {subproblem(x, z, 0.7):.6f} <= best perturbed {worse:.6f}")
