import numpy as np
import pytest

from conftest import random_problem
from gbsvr.kernel import KernelSpec, gram
from gbsvr.solver import (STEP_RULES, DualProblem, DualSolution, NumericalError, SolverConfig,
                          dual_gradient, dual_objective, objective_forms, oracle_grid_solve,
                          project_feasible, recover_weights, solve_dual)


def two_point():
    G = gram(KernelSpec("linear"), [[-1.0], [1.0]])
    return DualProblem(G, np.zeros(2), np.array([-1.0, 1.0]), 0.1, 1.0)


def feasible_point(rng, n, C):
    a = rng.uniform(0, C, n)
    s = rng.uniform(0, C, n)
    return project_feasible(a, s, C)


class TestObjective:
    def test_origin(self):
        p = two_point()
        assert dual_objective(p, DualSolution(np.zeros(2), np.zeros(2))) == 0.0

    @pytest.mark.parametrize("c", [0.0, 0.3, 1.0])
    def test_single_ball_equal_duals(self, c):
        p = DualProblem(np.ones((1, 1)), [0.2], [0.7], 0.1, 1.0)
        assert abs(dual_objective(p, DualSolution(np.array([c]), np.array([c]))) - (-0.2 * c)) < 1e-15

    def test_two_point_optimum(self):
        s = DualSolution(np.array([0.0, 0.45]), np.array([0.45, 0.0]))
        assert abs(dual_objective(two_point(), s) - 0.405) < 1e-12

    def test_forms_agree(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = random_problem(rng, 5, kind="rbf")
            a, s = feasible_point(rng, 5, p.C)
            e, q = objective_forms(p, a, s)
            assert abs(e - q) <= 1e-10 * max(1.0, abs(e))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dual_objective(two_point(), DualSolution(np.zeros(3), np.zeros(3)))


class TestGradient:
    def test_finite_differences(self):
        rng = np.random.default_rng(1)
        p = random_problem(rng, 4, kind="rbf")
        h = 1e-6
        for _ in range(10):
            a, s = feasible_point(rng, 4, p.C)
            ga, gs = dual_gradient(p, DualSolution(a, s))
            for vec, grad in ((a, ga), (s, gs)):
                for i in range(4):
                    up, dn = vec.copy(), vec.copy()
                    up[i] += h
                    dn[i] -= h
                    args_up = (up, s) if vec is a else (a, up)
                    args_dn = (dn, s) if vec is a else (a, dn)
                    fd = (objective_forms(p, *args_up)[1] - objective_forms(p, *args_dn)[1]) / (2 * h)
                    assert abs(fd - grad[i]) <= 1e-4

    def test_origin(self):
        p = two_point()
        ga, gs = dual_gradient(p, DualSolution(np.zeros(2), np.zeros(2)))
        assert np.allclose(ga, p.y_hat - p.epsilon)
        assert np.allclose(gs, -p.y_hat - p.epsilon)

    def test_pair_sum(self):
        rng = np.random.default_rng(2)
        p = random_problem(rng, 6)
        a, s = feasible_point(rng, 6, p.C)
        ga, gs = dual_gradient(p, DualSolution(a, s))
        assert np.allclose(ga + gs, -2 * p.epsilon)


class TestProjection:
    def test_feasible_unchanged(self):
        a, s = np.array([0.2, 0.5]), np.array([0.4, 0.3])
        pa, ps = project_feasible(a, s, 1.0)
        assert np.abs(pa - a).max() <= 1e-12 and np.abs(ps - s).max() <= 1e-12

    def test_single_pair(self, backend):
        # min (a - 2C)^2 + s^2 subject to a = s in [0, C]  ->  a = s = C
        C = 1.5
        pa, ps = project_feasible([2 * C], [0.0], C)
        assert abs(pa[0] - ps[0]) <= 1e-10 and abs(pa[0] - C) <= 1e-10

    def test_balanced_corner(self):
        pa, ps = project_feasible([1.0, 0.0], [0.0, 1.0], 1.0)
        assert pa.tolist() == [1.0, 0.0] and ps.tolist() == [0.0, 1.0]

    @pytest.mark.parametrize("seed", range(10))
    def test_variational_inequality(self, backend, seed):
        # P(x) is the projection iff (x - P)·(q - P) <= 0 for every feasible q
        rng = np.random.default_rng(seed)
        n, C = int(rng.integers(1, 12)), float(rng.uniform(0.5, 3))
        x = np.concatenate([rng.normal(0, 2 * C, n), rng.normal(0, 2 * C, n)])
        pa, ps = project_feasible(x[:n], x[n:], C)
        P = np.concatenate([pa, ps])
        assert P.min() >= 0 and P.max() <= C
        assert abs(pa.sum() - ps.sum()) <= 1e-8 * n * C
        for _ in range(200):
            qa, qs = feasible_point(rng, n, C)
            q = np.concatenate([qa, qs])
            assert (x - P) @ (q - P) <= 1e-9 * (1 + np.abs(x).max()) ** 2

    def test_idempotent(self, backend):
        rng = np.random.default_rng(5)
        pa, ps = project_feasible(rng.normal(size=30), rng.normal(size=30), 0.7)
        qa, qs = project_feasible(pa, ps, 0.7)
        assert np.abs(qa - pa).max() <= 1e-12 and np.abs(qs - ps).max() <= 1e-12


class TestSolve:
    @pytest.mark.parametrize("rule", STEP_RULES)
    def test_two_point(self, backend, rule):
        s = solve_dual(two_point(), SolverConfig(step_rule=rule))
        assert s.converged
        assert np.allclose(s.beta, [-0.45, 0.45], atol=1e-5)
        assert abs(s.objective - 0.405) < 1e-9
        w = recover_weights(two_point(), s)
        assert abs(w.norm_w - 0.9) < 1e-5 and abs(w.bias) < 1e-6

    def test_wide_tube_is_flat(self):
        y = np.array([-0.3, 0.1, 0.2])
        p = DualProblem(gram(KernelSpec("rbf", 0.5), [[0.0], [1.0], [2.0]]), np.zeros(3), y, 0.4, 1.0)
        s = solve_dual(p)
        assert np.all(s.alpha == 0) and np.all(s.alpha_star == 0)
        # beta'y - eps * sum(alpha + alpha*) <= sum |beta_i| (|y_i| - eps) <= 0 everywhere
        rng = np.random.default_rng(0)
        for _ in range(100):
            assert dual_objective(p, DualSolution(*feasible_point(rng, 3, p.C))) <= 1e-12

    @pytest.mark.parametrize("rule", STEP_RULES)
    def test_monotone_and_feasible(self, backend, rule):
        rng = np.random.default_rng(3)
        p = random_problem(rng, 30, l=3, kind="rbf", eps=0.05, C=2.0)
        s = solve_dual(p, SolverConfig(max_iter=300, step_rule=rule, trace=True))
        obj = np.array([f for f, _ in s.trace])
        assert np.all(np.diff(obj) >= 0)
        assert s.alpha.min() >= 0 and s.alpha.max() <= p.C
        assert s.alpha_star.min() >= 0 and s.alpha_star.max() <= p.C
        assert abs(s.beta.sum()) <= 1e-8 * p.n * p.C
        assert len(s.trace) == s.iterations + 1

    def test_rules_agree(self):
        rng = np.random.default_rng(4)
        p = random_problem(rng, 12, kind="rbf")
        vals = [solve_dual(p, SolverConfig(step_rule=r, max_iter=100_000, tol=1e-7)).objective for r in STEP_RULES]
        assert max(vals) - min(vals) < 1e-9

    def test_warm_start(self):
        p = two_point()
        s = solve_dual(p, start=DualSolution(np.array([0.0, 0.45]), np.array([0.45, 0.0])))
        assert s.iterations <= 1 and abs(s.objective - 0.405) < 1e-12

    def test_non_finite(self):
        G = np.array([[1.0, np.nan], [np.nan, 1.0]])
        with pytest.raises(NumericalError):
            solve_dual(DualProblem(G, np.zeros(2), np.array([1.0, -1.0]), 0.1, 1.0))

    @pytest.mark.parametrize("kw", [dict(step_rule="newton"), dict(tol=0.0), dict(max_iter=-1)])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    @pytest.mark.parametrize("kw", [dict(epsilon=-1.0), dict(C=0.0), dict(radii=[-1.0, 0.0])])
    def test_problem_validation(self, kw):
        base = dict(gram=np.eye(2), radii=[0.0, 0.0], y_hat=[0.0, 1.0], epsilon=0.1, C=1.0)
        with pytest.raises(ValueError):
            DualProblem(**{**base, **kw})


class TestOracle:
    def test_two_point(self):
        assert abs(oracle_grid_solve(two_point(), grid_steps=200).objective - 0.405) <= 1e-3

    def test_single_ball(self):
        p = DualProblem(np.ones((1, 1)), [0.1], [0.8], 0.1, 1.0)
        s = oracle_grid_solve(p, grid_steps=50)
        assert s.objective == 0.0 and s.alpha[0] == s.alpha_star[0] == 0.0

    def test_agreement_n2(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            p = random_problem(rng, 2)
            assert abs(oracle_grid_solve(p, 100).objective - solve_dual(p).objective) <= 1e-3

    def test_too_large(self):
        with pytest.raises(ValueError):
            oracle_grid_solve(random_problem(np.random.default_rng(0), 4))


class TestRecover:
    def test_zero_beta(self):
        p = DualProblem(np.eye(3), np.zeros(3), np.array([1.0, 2.0, 6.0]), 0.1, 1.0)
        w = recover_weights(p, DualSolution(np.zeros(3), np.zeros(3)))
        assert w.norm_w == 0.0 and w.scale == 0.0
        # symmetric KKT interval around the target range midpoint
        assert w.bias == 3.5

    def test_zero_beta_symmetric_targets_give_mean(self):
        p = DualProblem(np.eye(2), np.zeros(2), np.array([-1.0, 1.0]), 0.1, 1.0)
        assert recover_weights(p, DualSolution(np.zeros(2), np.zeros(2))).bias == 0.0

    def test_clamp(self):
        G = gram(KernelSpec("linear"), [[0.0], [0.1]])
        p = DualProblem(G, np.array([0.0, 1.0]), np.array([0.0, 1.0]), 0.1, 1.0)
        w = recover_weights(p, DualSolution(np.array([0.0, 0.5]), np.array([0.5, 0.0])))
        assert w.clamped and w.norm_w == 0.0 and w.B == 0.5

    def test_weight_invariants(self):
        rng = np.random.default_rng(9)
        p = random_problem(rng, 8, kind="rbf")
        s = solve_dual(p)
        w = recover_weights(p, s)
        assert abs(w.norm_A ** 2 - s.beta @ p.gram @ s.beta) <= 1e-8 * max(1.0, w.norm_A ** 2)
        assert w.B == float(s.beta @ p.radii)
        assert w.norm_w == max(0.0, w.norm_A - w.B)
