import threading

import numpy as np
import pytest

from nexpga.instances import decomposition_I, decomposition_II, generate_instance
from nexpga.problem import (
    CompositeProblem,
    FunctionSmooth,
    OracleError,
    ZeroFunction,
    eval_objective,
    smooth_value_grad,
)
from nexpga.prox import LeastSquares, LeastSquaresData

from oracles import central_difference_grad

half_sq = FunctionSmooth(lambda x: 0.5 * float(x @ x), lambda x: x.copy())


def test_objective_pure_quadratic():
    prob = CompositeProblem(half_sq, ZeroFunction(), ZeroFunction(), 2)
    assert eval_objective(prob, [3.0, 4.0]) == 12.5


def test_objective_at_origin_is_half_norm_b_squared():
    inst = generate_instance(30, 10, 2, seed=4)
    prob = decomposition_I(inst, 0.1)
    assert eval_objective(prob, np.zeros(30)) == pytest.approx(0.5 * inst.b @ inst.b, rel=1e-15)


def test_decompositions_agree_pointwise():
    inst = generate_instance(40, 12, 3, seed=11)
    p1, p2 = decomposition_I(inst, 0.1), decomposition_II(inst, 0.1)
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = rng.normal(size=40) * rng.choice([0.01, 1.0, 10.0])
        a, b = eval_objective(p1, x), eval_objective(p2, x)
        assert abs(a - b) <= 1e-12 * (1 + abs(a))


def test_dimension_mismatch_raises():
    prob = CompositeProblem(half_sq, ZeroFunction(), ZeroFunction(), 2)
    with pytest.raises(OracleError):
        eval_objective(prob, [1.0, 2.0, 3.0])
    with pytest.raises(OracleError):
        eval_objective(prob, [1.0, np.nan])


def test_non_finite_p2_raises():
    class BadP2:
        def value(self, x):
            return np.inf

        def subgrad(self, x):
            return np.zeros_like(x)

    prob = CompositeProblem(half_sq, ZeroFunction(), BadP2(), 2)
    with pytest.raises(OracleError):
        eval_objective(prob, [1.0, 1.0])


def test_infinite_p1_propagates():
    class Box:
        def value(self, x):
            return 0.0 if np.all(np.abs(x) <= 1) else np.inf

        def prox(self, z, t):
            return np.clip(z, -1, 1)

    prob = CompositeProblem(half_sq, Box(), ZeroFunction(), 2)
    assert eval_objective(prob, [2.0, 0.0]) == np.inf


def test_smooth_value_grad_quadratic():
    val, g = smooth_value_grad(half_sq, [1.0, -2.0])
    assert val == 2.5
    np.testing.assert_array_equal(g, [1.0, -2.0])


def test_smooth_value_grad_zero():
    val, g = smooth_value_grad(ZeroFunction(), np.ones(3))
    assert val == 0.0
    np.testing.assert_array_equal(g, np.zeros(3))


def test_least_squares_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    data = LeastSquaresData(rng.normal(size=(5, 8)), rng.normal(size=5))
    f = LeastSquares(data)
    x = rng.normal(size=8)
    _, g = smooth_value_grad(f, x)
    fd = central_difference_grad(f.value, x)
    assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-6


def test_smooth_non_finite_output_raises():
    bad = FunctionSmooth(lambda x: np.nan, lambda x: x)
    with pytest.raises(OracleError):
        smooth_value_grad(bad, [1.0])


def test_oracles_are_thread_safe():
    inst = generate_instance(50, 10, 2, seed=1)
    prob = decomposition_II(inst, 0.1)
    rng = np.random.default_rng(3)
    xs = [rng.normal(size=50) for _ in range(64)]
    expected = [eval_objective(prob, x) for x in xs]
    got = [None] * len(xs)

    def work(i):
        got[i] = eval_objective(prob, xs[i])

    threads = [threading.Thread(target=work, args=(i,)) for i in range(len(xs))]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert got == expected
