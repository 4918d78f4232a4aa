import numpy as np
import pytest
from scipy.optimize import linprog

from seaplan import convex_core
from seaplan.convex_core import ConvexSubproblem, check_feasible, solve


def _simple_lp(upper=3.0):
    p = ConvexSubproblem(1, [1.0], lower=[0.0], upper=[np.inf])
    p.add_linear([1.0], upper, "<=")
    return p


def test_one_dimensional_lp():
    r = solve(_simple_lp())
    assert r.status == "optimal"
    assert r.x[0] == pytest.approx(3.0, abs=1e-7)
    assert r.objective_value == pytest.approx(3.0, abs=1e-7)
    assert r.max_violation <= convex_core.FEAS_TOL


def test_equality_constraint():
    p = ConvexSubproblem(2, [1.0, 0.0], lower=[-10, -10], upper=[10, 10])
    p.add_linear([1.0, 1.0], 4.0, "==")
    r = solve(p)
    assert r.status == "optimal"
    assert r.x[0] + r.x[1] == pytest.approx(4.0, abs=1e-7)
    assert r.x[0] == pytest.approx(10.0, abs=1e-6)


def test_ball_constraint():
    # maximize x subject to x^2 <= 4 -> x = 2
    p = ConvexSubproblem(1, [1.0])
    p.add_ball([[1.0]], [0.0], [0.0], 4.0)
    r = solve(p)
    assert r.status == "optimal"
    assert r.x[0] == pytest.approx(2.0, abs=1e-6)


def test_ball_with_affine_rhs():
    # maximize x subject to x^2 <= x + 2 -> x = 2 (roots -1, 2)
    p = ConvexSubproblem(1, [1.0])
    p.add_ball([[1.0]], [0.0], [1.0], 2.0)
    r = solve(p)
    assert r.status == "optimal"
    assert r.x[0] == pytest.approx(2.0, abs=1e-6)


def test_shifted_ball():
    # maximize x subject to ||x - 5||^2 <= 1 -> x = 6
    p = ConvexSubproblem(1, [1.0])
    p.add_ball([[1.0]], [-5.0], [0.0], 1.0)
    r = solve(p)
    assert r.status == "optimal"
    assert r.x[0] == pytest.approx(6.0, abs=1e-6)


def test_infeasible_detected_with_certificate():
    p = ConvexSubproblem(1, [1.0])
    p.add_linear([1.0], 0.0, "<=")
    p.add_linear([1.0], 1.0, ">=")
    r = solve(p)
    assert r.status == "infeasible"
    # phase-I certifies the minimum shared violation, here 0.5
    assert r.max_violation == pytest.approx(0.5, abs=1e-6)


def test_unbounded_detected():
    p = ConvexSubproblem(1, [1.0], lower=[0.0])
    r = solve(p)
    assert r.status == "unbounded"


def test_feasibility_problem_returns_interior_point():
    p = ConvexSubproblem(1, [0.0])
    p.add_linear([1.0], 1.0, "<=")
    p.add_linear([1.0], -1.0, ">=")
    r = solve(p)
    assert r.status == "optimal"
    assert -1.0 - 1e-7 <= r.x[0] <= 1.0 + 1e-7
    assert r.max_violation <= convex_core.FEAS_TOL


def test_check_feasible_reports_violation():
    p = _simple_lp(upper=3.0)
    assert check_feasible(p, np.array([3.5])) == pytest.approx(0.5)
    assert check_feasible(p, np.array([2.0])) <= 0.0
    assert check_feasible(p, np.array([-0.25])) == pytest.approx(0.25)


def test_check_feasible_ball_and_box():
    p = ConvexSubproblem(2, [0.0, 0.0], lower=[0.0, 0.0], upper=[1.0, 1.0])
    p.add_ball(np.eye(2), np.zeros(2), np.zeros(2), 1.0)
    assert check_feasible(p, np.array([1.0, 1.0])) == pytest.approx(1.0)
    assert check_feasible(p, np.array([0.5, 0.5])) <= 0.0


def test_dimension_validation():
    p = ConvexSubproblem(2, [1.0, 0.0])
    with pytest.raises(ValueError):
        p.add_linear([1.0], 0.0)
    with pytest.raises(ValueError):
        p.add_linear([1.0, 0.0], 0.0, "<")
    with pytest.raises(ValueError):
        p.add_ball([[1.0]], [0.0], [0.0], 1.0)
    with pytest.raises(ValueError):
        check_feasible(p, np.zeros(3))


def _random_lp(rng, n, m):
    """Bounded, feasible random LP with an interior point."""
    c = rng.normal(size=n)
    lo = np.zeros(n)
    hi = rng.uniform(1.0, 10.0, size=n)
    a = rng.normal(size=(m, n))
    x0 = rng.uniform(0.2, 0.8) * hi
    b = a @ x0 + rng.uniform(0.1, 2.0, size=m)
    p = ConvexSubproblem(n, c, lower=lo, upper=hi)
    for i in range(m):
        p.add_linear(a[i], b[i], "<=")
    return p, c, a, b, lo, hi


@pytest.mark.parametrize("seed", range(10))
def test_against_reference_lp_solver(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 13))
        p, c, a, b, lo, hi = _random_lp(rng, n, m)
        r = solve(p)
        ref = linprog(-c, A_ub=a, b_ub=b, bounds=list(zip(lo, hi)), method="highs")
        assert ref.status == 0
        assert r.status == "optimal"
        scale = max(1.0, abs(ref.fun))
        assert abs(r.objective_value - (-ref.fun)) / scale <= 1e-6
        assert r.max_violation <= 1e-8


def test_dump_round_readable():
    p = _simple_lp()
    p.add_ball([[1.0]], [0.0], [0.0], 9.0)
    text = convex_core.dump(p)
    assert "vars 1" in text
    assert "lin" in text and "ball" in text
