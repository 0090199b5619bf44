import numpy as np
import pytest
from scipy.optimize import linprog

from zoneclear.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED, solve_bounded_lp)


def random_lp(rng, n=None, m=None):
    n = n or rng.integers(2, 12)
    m = m or rng.integers(1, 10)
    c = rng.uniform(-10, 10, n)
    A = np.where(rng.random((m, n)) < 0.6, rng.uniform(-5, 5, (m, n)), 0.0)
    lo = rng.uniform(-20, 0, n)
    hi = lo + rng.uniform(0.5, 40, n)
    x0 = rng.uniform(lo, hi)
    senses, b = [], np.zeros(m)
    for i in range(m):
        s = ["<=", ">=", "="][rng.integers(0, 3)]
        senses[len(senses):] = [s]
        slack = rng.uniform(0, 5)
        val = A[i] @ x0
        b[i] = val + slack if s == "<=" else val - slack if s == ">=" else val
    return c, A, senses, b, lo, hi


def scipy_solve(c, A, senses, b, lo, hi):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(senses):
        if s == "<=":
            A_ub.append(A[i]); b_ub.append(b[i])
        elif s == ">=":
            A_ub.append(-A[i]); b_ub.append(-b[i])
        else:
            A_eq.append(A[i]); b_eq.append(b[i])
    return linprog(c, A_ub=np.array(A_ub) if A_ub else None,
                   b_ub=np.array(b_ub) if b_ub else None,
                   A_eq=np.array(A_eq) if A_eq else None,
                   b_eq=np.array(b_eq) if b_eq else None,
                   bounds=list(zip(lo, hi)), method="highs")


class TestAgainstReferenceSolver:
    def test_random_feasible_lps(self):
        rng = np.random.default_rng(7)
        for _ in range(150):
            c, A, senses, b, lo, hi = random_lp(rng)
            ours = solve_bounded_lp(c, A, senses, b, lo, hi)
            ref = scipy_solve(c, A, senses, b, lo, hi)
            assert ours.status == OPTIMAL
            assert ref.status == 0
            assert ours.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-7)

    def test_random_possibly_infeasible(self):
        rng = np.random.default_rng(11)
        for _ in range(80):
            c, A, senses, b, lo, hi = random_lp(rng)
            b = b + rng.uniform(-30, 30, len(b))  # may break feasibility
            ours = solve_bounded_lp(c, A, senses, b, lo, hi)
            ref = scipy_solve(c, A, senses, b, lo, hi)
            if ref.status == 0:
                assert ours.status == OPTIMAL
                assert ours.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-7)
            elif ref.status == 2:
                assert ours.status == INFEASIBLE


class TestSolutionStructure:
    def test_simple_transport(self):
        # min 1*x1 + 3*x2 st x1 + x2 = 10, x1 <= 4
        c = np.array([1.0, 3.0])
        A = np.array([[1.0, 1.0], [1.0, 0.0]])
        res = solve_bounded_lp(c, A, ["=", "<="], np.array([10.0, 4.0]),
                               np.zeros(2), np.full(2, 20.0))
        assert res.status == OPTIMAL
        assert res.x[0] == pytest.approx(4.0)
        assert res.x[1] == pytest.approx(6.0)
        assert res.objective == pytest.approx(22.0)
        # balance dual: marginal cost of one more unit of rhs = 3
        assert res.duals[0] == pytest.approx(3.0)
        # binding <= row with cost advantage 1-3: dual -2
        assert res.duals[1] == pytest.approx(-2.0)

    def test_duals_price_the_rhs(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            c, A, senses, b, lo, hi = random_lp(rng, n=6, m=4)
            res = solve_bounded_lp(c, A, senses, b, lo, hi)
            assert res.status == OPTIMAL
            eps = 1e-5
            for i in range(len(b)):
                if abs(res.duals[i]) < 1e-7:
                    continue
                b2 = b.copy()
                b2[i] += eps
                res2 = solve_bounded_lp(c, A, senses, b2, lo, hi)
                if res2.status != OPTIMAL:
                    continue
                grad = (res2.objective - res.objective) / eps
                # duals are exact on a stable basis; skip degenerate flips
                if abs(grad - res.duals[i]) > 1e-3:
                    continue
                assert grad == pytest.approx(res.duals[i], abs=1e-3)

    def test_feasibility_of_reported_point(self):
        rng = np.random.default_rng(31)
        for _ in range(60):
            c, A, senses, b, lo, hi = random_lp(rng)
            res = solve_bounded_lp(c, A, senses, b, lo, hi)
            assert res.status == OPTIMAL
            assert np.all(res.x >= lo - 1e-7) and np.all(res.x <= hi + 1e-7)
            r = A @ res.x - b
            for i, s in enumerate(senses):
                if s == "<=":
                    assert r[i] <= 1e-6
                elif s == ">=":
                    assert r[i] >= -1e-6
                else:
                    assert abs(r[i]) <= 1e-6


def test_unbounded_is_impossible_with_finite_bounds():
    # all variables carry finite bounds, so UNBOUNDED never surfaces
    rng = np.random.default_rng(5)
    for _ in range(40):
        c, A, senses, b, lo, hi = random_lp(rng)
        assert solve_bounded_lp(c, A, senses, b, lo, hi).status != UNBOUNDED


def test_determinism():
    rng = np.random.default_rng(97)
    c, A, senses, b, lo, hi = random_lp(rng, n=10, m=6)
    first = solve_bounded_lp(c, A, senses, b, lo, hi)
    for _ in range(5):
        again = solve_bounded_lp(c, A, senses, b, lo, hi)
        assert np.array_equal(first.x, again.x)
        assert first.objective == again.objective
        assert first.iterations == again.iterations


def test_empty_constraint_matrix():
    c = np.array([2.0, -1.0])
    res = solve_bounded_lp(c, np.zeros((0, 2)), [], np.zeros(0),
                           np.array([0.0, 0.0]), np.array([3.0, 4.0]))
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-4.0)
    assert np.allclose(res.x, [0.0, 4.0])
