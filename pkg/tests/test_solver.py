import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nexpga.instances import decomposition_I, decomposition_II, generate_instance
from nexpga.problem import CompositeProblem, FunctionSmooth, ZeroFunction
from nexpga.prox import L1Norm, soft_threshold
from nexpga.solver import (
    LineSearchError,
    SolverParams,
    SolverState,
    accept_test,
    extrapolate,
    fista_beta_next,
    inner_loop,
    potential,
    prox_gradient_step,
    reference_update,
    solve,
    spectral_gamma_init,
    stationarity_residual,
)


def quad(center=0.0):
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return FunctionSmooth(lambda x: 0.5 * float((x - c) @ (x - c)), lambda x: x - c)


def smooth_only(center, n=1):
    return CompositeProblem(quad(center), ZeroFunction(), ZeroFunction(), n)


@pytest.fixture(scope="module")
def small_problem():
    inst = generate_instance(300, 30, 6, seed=2)
    return decomposition_I(inst, 0.1)


class TestParams:
    def test_reference_settings_pass_gate(self):
        for delta in (0.0, 0.1):
            p = SolverParams(tau=1.56, eta=0.8, beta_max=10, gamma_min=1e-6, gamma_max=1e6,
                             p_schedule=0.01, delta=delta)
            assert p.tau_eta_sq == pytest.approx(0.9984, abs=1e-15)
            assert p.tau_eta_sq < 1

    def test_eta_too_large_rejected(self):
        with pytest.raises(ValueError):
            SolverParams(tau=1.56, eta=0.81)

    @pytest.mark.parametrize("kw", [
        dict(gamma_min=0.0), dict(gamma_min=2.0, gamma_max=1.0), dict(gamma_max=math.inf),
        dict(beta_max=-1.0), dict(p_min=0.0), dict(p_min=1.5), dict(delta=1.0), dict(delta=-0.1),
        dict(tau=1.0), dict(eta=0.0), dict(p_schedule=0.001), dict(gamma_init="bb"),
        dict(beta_init="nesterov"), dict(max_iters=None, max_time=None),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverParams(**kw)

    def test_callable_schedule_checked_at_use(self):
        p = SolverParams(p_schedule=lambda k: 2.0)
        with pytest.raises(ValueError):
            p.p_at(1)


class TestPotential:
    prob = smooth_only(0.0, 2)

    def test_equal_points(self):
        u = np.array([1.0, 2.0])
        assert potential(self.prob, u, u, 3.0, 0.5) == 2.5

    def test_delta_zero(self):
        assert potential(self.prob, np.array([1.0, 2.0]), np.array([-4.0, 9.0]), 3.0, 0.0) == 2.5

    def test_arithmetic(self):
        u = np.array([0.0, 0.0])
        v = np.array([2.0, 0.0])
        assert potential(self.prob, u, v, 8.0, 0.1, F_u=7.0) == pytest.approx(7.4, abs=1e-15)

    def test_inf_propagates(self):
        assert potential(self.prob, np.zeros(2), np.ones(2), 1.0, 0.1, F_u=math.inf) == math.inf


class TestExtrapolate:
    def test_beta_zero(self):
        x = np.array([1.0, 2.0])
        np.testing.assert_array_equal(extrapolate(x, np.zeros(2), 0.0), x)

    def test_first_iteration(self):
        x = np.array([1.0, 2.0])
        np.testing.assert_array_equal(extrapolate(x, x, 7.0), x)

    def test_arithmetic(self):
        np.testing.assert_array_equal(extrapolate(np.array([2.0, 0.0]), np.array([1.0, 0.0]), 0.5), [2.5, 0.0])


class TestProxGradientStep:
    def test_stationary_input(self):
        c = np.array([1.0, -3.0])
        prob = smooth_only(c, 2)
        np.testing.assert_allclose(prox_gradient_step(prob, c, np.zeros(2), 2.0), c)

    def test_decomposition_II_composition(self):
        inst = generate_instance(20, 8, 2, seed=3)
        prob = decomposition_II(inst, 0.1)
        y = np.random.default_rng(0).normal(size=20)
        _, g = prob.value_grad(y)
        np.testing.assert_array_equal(prox_gradient_step(prob, y, np.zeros(20), 5.0),
                                      soft_threshold(y - g / 5.0, 0.1 / 5.0))

    @pytest.mark.parametrize("dec", ["I", "II"])
    def test_random_probe_optimality(self, dec):
        rng = np.random.default_rng(1)
        A = rng.normal(size=(2, 3))
        from nexpga.instances import Instance
        inst = Instance(A, rng.normal(size=2), np.zeros(3), 0, 0, 0.0)
        prob = decomposition_I(inst, 0.3) if dec == "I" else decomposition_II(inst, 0.3)
        for _ in range(5):
            y = rng.normal(size=3)
            xi = prob.subgrad(rng.normal(size=3))
            gamma = float(rng.uniform(0.5, 5))
            _, g = prob.value_grad(y)

            def sub(x):
                return (g - xi) @ (x - y) + gamma / 2 * (x - y) @ (x - y) + prob.p1_value(x)

            x = prox_gradient_step(prob, y, xi, gamma)
            probes = y + rng.normal(size=(200, 3)) * rng.choice([0.01, 0.3, 3.0], size=(200, 1))
            assert all(sub(x) <= sub(p) + 1e-12 for p in probes)


class TestAcceptTest:
    def test_degenerate_step(self):
        assert accept_test(1.0, 1.0, 5.0, 0.1, 0.0)
        assert accept_test(0.5, 1.0, 5.0, 0.1, 0.0)

    def test_accept(self):
        assert accept_test(-2.0, 0.0, 8.0, 0.0, 1.0)

    def test_reject(self):
        assert not accept_test(-0.5, 0.0, 8.0, 0.0, 1.0)

    def test_inf_rejected(self):
        assert not accept_test(math.inf, 0.0, 8.0, 0.0, 0.0)


class TestReferenceUpdate:
    def test_monotone_variant(self):
        assert reference_update(10.0, 1.0, 3.0) == 3.0

    def test_arithmetic(self):
        assert reference_update(10.0, 0.01, 0.0) == pytest.approx(9.9, abs=1e-14)

    @given(R=st.floats(-1e6, 1e6), p=st.floats(1e-6, 1.0))
    def test_fixed_point(self, R, p):
        assert reference_update(R, p, R) == pytest.approx(R, rel=1e-15, abs=1e-9)

    @given(R=st.floats(-1e6, 1e6), H=st.floats(-1e6, 1e6), p=st.floats(1e-6, 1.0))
    def test_convex_combination(self, R, H, p):
        r = reference_update(R, p, H)
        slack = 1e-9 * (1 + abs(R) + abs(H))
        assert min(R, H) - slack <= r <= max(R, H) + slack


class TestSpectralInit:
    params = SolverParams()

    def test_quotient_dominates(self):
        d = np.array([1.0, -2.0])
        assert spectral_gamma_init(d, d, 0.5 / 0.9, self.params) == pytest.approx(1.0)

    def test_negative_quotient_discarded(self):
        d = np.array([1.0])
        assert spectral_gamma_init(d, -2 * d, 1.0, self.params) == pytest.approx(0.9)

    def test_upper_clip(self):
        d = np.array([1.0])
        assert spectral_gamma_init(d, 1e9 * d, 1.0, self.params) == 1e6

    def test_lower_clip(self):
        d = np.array([1.0])
        assert spectral_gamma_init(d, 0 * d, 1e-9, self.params) == 1e-6

    def test_zero_step_uses_safeguard(self):
        assert spectral_gamma_init(np.zeros(2), np.ones(2), 2.0, self.params) == pytest.approx(1.8)


class TestFista:
    # frozen from direct evaluation of t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2
    T1 = 1.618033988749895
    T2 = 2.193527085331054

    def test_first(self):
        t_next, beta = fista_beta_next(1.0, 1.0, 0.1, 10.0)
        assert beta == 0.0
        assert t_next == pytest.approx(self.T1, abs=1e-12)

    def test_second(self):
        t_next, beta = fista_beta_next(1.0, self.T1, 0.1, 10.0)
        assert beta == 0.0
        assert t_next == pytest.approx(self.T2, abs=1e-12)

    def test_third_not_clamped(self):
        _, beta = fista_beta_next(self.T1, self.T2, 0.1, 10.0)
        assert beta == pytest.approx(0.28175352512532087, abs=1e-12)

    def test_clamp(self):
        _, beta = fista_beta_next(self.T1, self.T2, 0.01, 10.0)
        assert beta == pytest.approx(0.1)
        _, beta = fista_beta_next(self.T1, self.T2, 0.0, 10.0)
        assert beta == 0.0


class TestStationarityResidual:
    def test_no_step(self):
        y = np.array([1.0, 2.0])
        g = np.array([3.0, -1.0])
        assert stationarity_residual(g, g, y, y, 4.0) == 0.0

    def test_exact_1d_step(self):
        assert stationarity_residual(np.array([0.5]), np.array([1.0]), np.array([0.5]), np.array([1.0]), 1.0) == 0.0

    def test_f_zero(self):
        y, x = np.array([1.0, 1.0]), np.array([0.0, 1.0])
        assert stationarity_residual(np.zeros(2), np.zeros(2), x, y, 3.0) == 3.0


def _state(prob, x, x_prev, params):
    F = prob.objective(x)
    _, g = prob.value_grad(x)
    st_ = SolverState(k=0, x_cur=x, x_prev=x_prev, R=F, gamma_bar_prev=params.gamma_min, F_cur=F, grad_cur=g)
    st_.xi_cur = prob.subgrad(x)
    return st_


class TestInnerLoop:
    def test_hand_evaluated(self):
        prob = smooth_only(0.0)
        params = SolverParams(delta=0.0, beta_init="zero")
        st_ = _state(prob, np.array([1.0]), np.array([1.0]), params)
        assert st_.R == 0.5
        res = inner_loop(prob, st_, 0.0, 1.0, params)
        assert res.inner_iters == 0
        assert res.gamma_bar == 1.0 and res.beta_bar == 0.0
        np.testing.assert_array_equal(res.x_next, [0.0])
        assert res.H_next == 0.0

    def test_single_forced_rejection(self):
        prob = smooth_only(0.0, 2)
        params = SolverParams()
        st_ = _state(prob, np.array([1.0, 1.0]), np.array([2.0, 0.5]), params)
        calls = []

        def accept(*args):
            calls.append(args)
            return len(calls) > 1

        res = inner_loop(prob, st_, 0.5, 2.0, params, accept=accept)
        assert res.inner_iters == 1
        assert res.gamma_bar == 2.0 * params.tau
        assert res.beta_bar == 0.5 * params.eta

    def test_cap_raises(self):
        prob = smooth_only(0.0)
        params = SolverParams(inner_cap=5)
        st_ = _state(prob, np.array([1.0]), np.array([1.0]), params)
        with pytest.raises(LineSearchError):
            inner_loop(prob, st_, 0.0, 1.0, params, accept=lambda *a: False)

    def test_infinite_candidates_rejected(self):
        class SloppyBox:
            """Indicator of [-1, 1]; the prox skips the projection for large weights."""

            def value(self, x):
                return 0.0 if np.all(np.abs(x) <= 1) else math.inf

            def prox(self, z, t):
                return np.array(z, dtype=float) if t > 0.1 else np.clip(z, -1, 1)

        prob = CompositeProblem(quad(5.0), SloppyBox(), ZeroFunction(), 1)
        params = SolverParams(delta=0.0)
        st_ = _state(prob, np.array([0.0]), np.array([0.0]), params)
        res = inner_loop(prob, st_, 0.0, 1.0, params)
        assert res.inner_iters > 0
        assert abs(res.x_next[0]) <= 1


class TestSolve:
    def test_smooth_1d(self):
        res = solve(smooth_only(3.0), np.zeros(1), SolverParams(max_iters=500))
        assert abs(res.x[0] - 3.0) < 1e-6

    def test_l1_shrinkage(self):
        prob = CompositeProblem(quad(0.0), L1Norm(1.0), ZeroFunction(), 1)
        res = solve(prob, np.array([5.0]), SolverParams(max_iters=500))
        assert abs(res.x[0]) < 1e-8

    def test_monotone_specialization(self, small_problem):
        params = SolverParams(delta=0.0, beta_max=0.0, p_min=1.0, p_schedule=1.0, max_iters=200)
        res = solve(small_problem, np.zeros(300), params)
        Fs = [t.F_val for t in res.traces]
        assert all(t.R_val == t.H_val == t.F_val for t in res.traces)
        assert all(b <= a for a, b in zip(Fs, Fs[1:]))

    def test_initial_record(self, small_problem):
        res = solve(small_problem, np.zeros(300), SolverParams(max_iters=3))
        t0 = res.traces[0]
        assert (t0.k, t0.wall_time, t0.inner_iters) == (0, 0.0, 0)
        assert t0.F_val == t0.R_val == t0.H_val == small_problem.objective(np.zeros(300))
        assert len(res.traces) == 4 and res.status == "max_iters"

    def test_trace_sink_order(self, small_problem):
        seen = []
        res = solve(small_problem, np.zeros(300), SolverParams(max_iters=20), trace_sink=seen.append)
        assert seen == res.traces
        assert [t.k for t in seen] == list(range(21))

    def test_time_stop(self, small_problem):
        res = solve(small_problem, np.zeros(300), SolverParams(max_iters=None, max_time=0.05))
        assert res.status == "max_time"
        assert res.traces[-1].wall_time >= 0.05

    def test_step_tol_stop(self):
        res = solve(smooth_only(3.0), np.zeros(1), SolverParams(step_tol=1e-12))
        assert res.status == "step_tol"

    def test_x0_outside_domain(self):
        class Nonneg:
            def value(self, x):
                return 0.0 if np.all(x >= 0) else math.inf

            def prox(self, z, t):
                return np.maximum(z, 0)

        prob = CompositeProblem(quad(1.0), Nonneg(), ZeroFunction(), 1)
        with pytest.raises(ValueError):
            solve(prob, np.array([-1.0]))

    def test_bookkeeping_exact(self, small_problem):
        params = SolverParams(max_iters=300)
        res = solve(small_problem, np.zeros(300), params)
        for t in res.traces[1:]:
            assert t.gamma_bar == t.gamma_init * params.tau ** t.inner_iters
            assert t.beta_bar <= params.delta * params.beta_max * params.eta ** t.inner_iters
            assert t.beta_bar == t.beta_init * params.eta ** t.inner_iters

    def test_deterministic(self, small_problem):
        a = solve(small_problem, np.zeros(300), SolverParams(max_iters=150), keep_iterates=True)
        b = solve(small_problem, np.zeros(300), SolverParams(max_iters=150), keep_iterates=True)
        for xa, xb in zip(a.iterates, b.iterates):
            np.testing.assert_array_equal(xa, xb)
        assert [t.as_row()[2:] for t in a.traces] == [t.as_row()[2:] for t in b.traces]

    def test_decomposition_II_run_invariants(self):
        inst = generate_instance(200, 20, 4, seed=6)
        prob = decomposition_II(inst, 0.1)
        res = solve(prob, np.zeros(200), SolverParams(max_iters=500))
        Rs = [t.R_val for t in res.traces]
        assert all(b <= a + 1e-10 * (1 + abs(a)) for a, b in zip(Rs, Rs[1:]))
        assert max(t.F_val for t in res.traces) <= res.traces[0].F_val
