"""Nonmonotone extrapolated proximal gradient-subgradient method for ``f + P1 - P2``."""

from .baselines import (
    METHOD_LABELS,
    MethodConfig,
    lipschitz_bound,
    make_method,
    make_nexpga,
    make_nexpga_dc,
    make_npg,
    make_pdcae,
    make_pgels,
    solve_pdcae,
)
from .instances import decomposition_I, decomposition_II, generate_instance
from .metrics import evolution_curve, relative_error_series
from .problem import CompositeProblem, FunctionSmooth, OracleError, ZeroFunction, eval_objective
from .prox import (
    EuclideanNorm,
    L1MinusL2,
    L1Norm,
    LeastSquares,
    LeastSquaresData,
    norm_subgradient,
    prox_l1_minus_l2,
    soft_threshold,
)
from .solver import GLLReference, SolverParams, ZHReference, potential, solve

__version__ = "0.1.0"
