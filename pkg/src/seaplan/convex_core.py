"""Canonical convex subproblem representation and a deterministic conic solver.

Subproblems are linear objectives over linear constraints, variable boxes, and
"ball" constraints ||E x + e0||^2 <= q.x + r0 with affine right-hand sides, so
every instance is convex by construction.  Solving maps each ball onto a
second-order cone and hands the embedding to Clarabel's primal-dual
interior-point method.  Feasibility questions are answered by an explicit
phase-I: minimize a shared slack added to every constraint and declare the
problem infeasible when the optimal slack exceeds ``feas_tol``.

Builders are expected to scale constraints to O(1) residuals; ``check_feasible``
reports raw residuals against the stored rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

import clarabel

FEAS_TOL = 1e-8
OPT_TOL = 1e-8
MAX_ITERATIONS = 200


@dataclass
class LinearConstraint:
    row: np.ndarray
    bound: float
    sense: str  # "<=", ">=", "=="


@dataclass
class BallConstraint:
    """||E x + e0||^2 <= q.x + r0."""

    E: np.ndarray       # (m, n)
    e0: np.ndarray      # (m,)
    q: np.ndarray       # (n,)
    r0: float


@dataclass
class ConvexSubproblem:
    n_vars: int
    objective: np.ndarray                      # maximize objective . x
    linear: list = field(default_factory=list)
    balls: list = field(default_factory=list)
    lower: np.ndarray | None = None            # box bounds; None = unbounded
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length must match n_vars")
        if self.lower is None:
            self.lower = np.full(self.n_vars, -np.inf)
        if self.upper is None:
            self.upper = np.full(self.n_vars, np.inf)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)

    def add_linear(self, row, bound, sense="<="):
        row = np.asarray(row, dtype=float)
        if row.shape != (self.n_vars,):
            raise ValueError("constraint row length must match n_vars")
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown sense {sense!r}")
        self.linear.append(LinearConstraint(row=row, bound=float(bound), sense=sense))

    def add_ball(self, E, e0, q, r0):
        E = np.atleast_2d(np.asarray(E, dtype=float))
        e0 = np.atleast_1d(np.asarray(e0, dtype=float))
        q = np.asarray(q, dtype=float)
        if E.shape[1] != self.n_vars or q.shape != (self.n_vars,) or e0.shape[0] != E.shape[0]:
            raise ValueError("ball constraint dimensions must match n_vars")
        self.balls.append(BallConstraint(E=E, e0=e0, q=q, r0=float(r0)))


@dataclass
class SolveResult:
    status: str                 # optimal | infeasible | unbounded | max_iterations
    x: np.ndarray | None
    objective_value: float
    max_violation: float
    iterations: int


def check_feasible(problem: ConvexSubproblem, x, feas_tol: float = FEAS_TOL) -> float:
    """Maximum signed constraint residual of ``x`` (positive = violated)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.n_vars,):
        raise ValueError("point dimension must match n_vars")
    worst = -math.inf
    for con in problem.linear:
        g = float(con.row @ x)
        if con.sense == "<=":
            worst = max(worst, g - con.bound)
        elif con.sense == ">=":
            worst = max(worst, con.bound - g)
        else:
            worst = max(worst, abs(g - con.bound))
    for ball in problem.balls:
        e = ball.E @ x + ball.e0
        worst = max(worst, float(e @ e - (ball.q @ x + ball.r0)))
    finite_lo = np.isfinite(problem.lower)
    if np.any(finite_lo):
        worst = max(worst, float(np.max(problem.lower[finite_lo] - x[finite_lo])))
    finite_hi = np.isfinite(problem.upper)
    if np.any(finite_hi):
        worst = max(worst, float(np.max(x[finite_hi] - problem.upper[finite_hi])))
    return worst if worst > -math.inf else 0.0


def _assemble(problem: ConvexSubproblem, slack: bool):
    """Clarabel conic data for the problem, optionally with a shared slack variable.

    With ``slack`` the variable vector is (x, s) and every constraint is relaxed
    by s; the objective becomes minimize s.
    """
    n = problem.n_vars + (1 if slack else 0)
    rows = []
    rhs = []
    cones = []

    def lin_row(coeffs, bound, relax=True):
        # coeffs . x - (s if relax) <= bound, as b - A x >= 0
        r = np.zeros(n)
        r[: problem.n_vars] = coeffs
        if slack and relax:
            r[-1] = -1.0
        rows.append(r)
        rhs.append(bound)

    n_eq = 0
    if not slack:
        for con in problem.linear:
            if con.sense == "==":
                lin_row(con.row, con.bound, relax=False)
                n_eq += 1
    if n_eq:
        cones.append(clarabel.ZeroConeT(n_eq))

    n_ineq = 0
    for con in problem.linear:
        if con.sense == "<=":
            lin_row(con.row, con.bound)
            n_ineq += 1
        elif con.sense == ">=":
            lin_row(-con.row, -con.bound)
            n_ineq += 1
        elif slack:
            # phase-I treats an equality as two relaxed inequalities
            lin_row(con.row, con.bound)
            lin_row(-con.row, -con.bound)
            n_ineq += 2
    for i in range(problem.n_vars):
        if np.isfinite(problem.upper[i]):
            e = np.zeros(problem.n_vars)
            e[i] = 1.0
            lin_row(e, problem.upper[i])
            n_ineq += 1
        if np.isfinite(problem.lower[i]):
            e = np.zeros(problem.n_vars)
            e[i] = -1.0
            lin_row(e, -problem.lower[i])
            n_ineq += 1
    if slack:
        # keep phase-I bounded below
        r = np.zeros(n)
        r[-1] = -1.0
        rows.append(r)
        rhs.append(1.0)
        n_ineq += 1
    if n_ineq:
        cones.append(clarabel.NonnegativeConeT(n_ineq))

    # ||e||^2 <= r  <=>  ||(2e, r-1)|| <= r+1, with r relaxed by the slack
    for ball in problem.balls:
        m = ball.E.shape[0]
        q = np.zeros(n)
        q[: problem.n_vars] = ball.q
        if slack:
            q[-1] = 1.0
        r0 = ball.r0
        top = np.zeros(n)
        top[:] = -q
        rows.append(top)                    # s0 = r + 1
        rhs.append(r0 + 1.0)
        for j in range(m):
            rj = np.zeros(n)
            rj[: problem.n_vars] = -2.0 * ball.E[j]
            rows.append(rj)                 # s_j = 2 e_j
            rhs.append(2.0 * ball.e0[j])
        last = np.zeros(n)
        last[:] = -q
        rows.append(last)                   # s_last = r - 1
        rhs.append(r0 - 1.0)
        cones.append(clarabel.SecondOrderConeT(m + 2))

    a = sp.csc_matrix(np.asarray(rows)) if rows else sp.csc_matrix((0, n))
    b = np.asarray(rhs, dtype=float)
    cost = np.zeros(n)
    if slack:
        cost[-1] = 1.0
    else:
        cost[: problem.n_vars] = -problem.objective
    return a, b, cones, cost, n


def _run_clarabel(a, b, cones, cost, n):
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.max_iter = MAX_ITERATIONS
    settings.tol_feas = 1e-11
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    p = sp.csc_matrix((n, n))
    solver = clarabel.DefaultSolver(p, cost, a, b, cones, settings)
    return solver.solve()


def _phase_one(problem: ConvexSubproblem):
    a, b, cones, cost, n = _assemble(problem, slack=True)
    sol = _run_clarabel(a, b, cones, cost, n)
    status = str(sol.status)
    if status not in ("Solved", "AlmostSolved"):
        return None, math.inf, sol.iterations
    x = np.asarray(sol.x[: problem.n_vars])
    return x, float(sol.x[-1]), sol.iterations


def solve(problem: ConvexSubproblem, feas_tol: float = FEAS_TOL,
          opt_tol: float = OPT_TOL) -> SolveResult:
    """Deterministically solve a convex subproblem.

    A pure feasibility problem (zero objective) goes straight to phase-I, which
    returns the most-interior point it finds.  Otherwise the problem is solved
    directly; a reported infeasibility is confirmed by phase-I so the status
    carries a minimum-violation certificate in ``max_violation``.
    """
    if not np.any(problem.objective):
        x, slack, iters = _phase_one(problem)
        if x is None or slack > feas_tol:
            return SolveResult("infeasible", None, 0.0, max(slack, 0.0), iters)
        return SolveResult("optimal", x, 0.0, check_feasible(problem, x, feas_tol), iters)

    a, b, cones, cost, n = _assemble(problem, slack=False)
    sol = _run_clarabel(a, b, cones, cost, n)
    status = str(sol.status)
    if status in ("Solved", "AlmostSolved"):
        x = np.asarray(sol.x[: problem.n_vars])
        return SolveResult(
            "optimal", x, float(problem.objective @ x),
            check_feasible(problem, x, feas_tol), sol.iterations,
        )
    if status in ("DualInfeasible", "AlmostDualInfeasible"):
        return SolveResult("unbounded", None, math.inf, 0.0, sol.iterations)
    if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        x, slack, iters = _phase_one(problem)
        if x is None or slack > feas_tol:
            return SolveResult("infeasible", None, 0.0, max(slack, 0.0), sol.iterations + iters)
        # certificate disagreed with phase-I; fall back to the phase-I point
        return SolveResult("optimal", x, float(problem.objective @ x),
                           check_feasible(problem, x, feas_tol), sol.iterations + iters)
    return SolveResult("max_iterations", None, 0.0, math.inf, sol.iterations)


def dump(problem: ConvexSubproblem) -> str:
    """Plain-text dump for offline cross-checking against external solvers."""
    lines = [f"vars {problem.n_vars}"]
    lines.append("maximize " + " ".join(f"{c:.17g}" for c in problem.objective))
    for i, (lo, hi) in enumerate(zip(problem.lower, problem.upper)):
        if np.isfinite(lo) or np.isfinite(hi):
            lines.append(f"box x{i} {lo:.17g} {hi:.17g}")
    for con in problem.linear:
        lines.append(
            "lin " + " ".join(f"{c:.17g}" for c in con.row) + f" {con.sense} {con.bound:.17g}"
        )
    for ball in problem.balls:
        lines.append(f"ball m={ball.E.shape[0]} r0={ball.r0:.17g}")
        for j in range(ball.E.shape[0]):
            lines.append("  E " + " ".join(f"{c:.17g}" for c in ball.E[j]) + f" +{ball.e0[j]:.17g}")
        lines.append("  q " + " ".join(f"{c:.17g}" for c in ball.q))
    return "\n".join(lines) + "\n"
