"""Trajectory feasibility subproblem and the bisection search over Q.

With powers and the candidate min-SNR q frozen, the UAV state (positions,
velocities, accelerations for all slots) must satisfy kinematic Taylor
residual bounds, speed/acceleration caps, the altitude box, the epigraph ball
around the served user, and linearized minimum-speed, backhaul, and
interference constraints.  The non-convex originals are replaced by their
affine minorants at the previous iterate (squared norms are globally
lower-bounded by their first-order Taylor expansion), so any accepted solution
also satisfies the original constraints.  The largest feasible q is found by
halving an interval whose upper end is the SNR of a hypothetical zero-distance
slot at minimum altitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import convex_core
from .channel import slot_gains


class TrajectoryInfeasible(RuntimeError):
    """Kinematics alone are unsatisfiable (even q = 0 fails)."""


@dataclass(frozen=True)
class LinearizationPoint:
    """Reference positions and velocities from the previous outer iterate."""

    c_ref: np.ndarray   # (T, 3)
    v_ref: np.ndarray   # (T, 3)

    def __post_init__(self):
        object.__setattr__(self, "c_ref", np.asarray(self.c_ref, dtype=float))
        object.__setattr__(self, "v_ref", np.asarray(self.v_ref, dtype=float))
        if self.c_ref.ndim != 2 or self.c_ref.shape[1] != 3:
            raise ValueError("c_ref must be (T, 3)")
        if self.v_ref.shape != self.c_ref.shape:
            raise ValueError("v_ref must match c_ref shape")
        if not (np.all(np.isfinite(self.c_ref)) and np.all(np.isfinite(self.v_ref))):
            raise ValueError("linearization point must be finite")


def taylor_lower_bound(ref_point, anchor, x) -> float:
    """Affine global minorant of ||x - anchor||^2 expanded at ref_point."""
    ref_point = np.asarray(ref_point, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    x = np.asarray(x, dtype=float)
    delta = ref_point - anchor
    return float(delta @ delta + 2.0 * delta @ (x - ref_point))


def default_residual_thresholds(scenario):
    """Kinematic Taylor residual bounds: an order below typical per-slot motion."""
    dv0 = 0.01 * scenario.limits.v_max * (scenario.dt / 60.0)
    dc0 = 0.01 * scenario.limits.v_max * scenario.dt
    return dv0, dc0


def build_feasibility(scenario, lin: LinearizationPoint, powers, q: float,
                      start_position=None, dv0: float = None, dc0: float = None
                      ) -> convex_core.ConvexSubproblem:
    """Convex feasibility problem over (c_t, v_t, a_t) at fixed powers and q.

    ``start_position`` pins the slot-1 position (the launch state); by default
    it is the linearization point's first position.
    """
    t = scenario.n_slots
    lim = scenario.limits
    exp = scenario.pathloss.exponent
    gains = slot_gains(scenario)
    powers = np.asarray(powers, dtype=float)
    if lin.c_ref.shape[0] != t:
        raise ValueError("linearization point must cover all T slots")
    if dv0 is None or dc0 is None:
        d_dv0, d_dc0 = default_residual_thresholds(scenario)
        dv0 = d_dv0 if dv0 is None else dv0
        dc0 = d_dc0 if dc0 is None else dc0
    if start_position is None:
        start_position = lin.c_ref[0]
    start_position = np.asarray(start_position, dtype=float)
    i0_over_noise = lim.i0 / scenario.noise_power
    length_scale = max(1.0, float(np.max(np.abs(scenario.user_track))))

    n = 9 * t
    problem = convex_core.ConvexSubproblem(n, np.zeros(n))

    def c_idx(s):
        return slice(3 * s, 3 * s + 3)

    def v_idx(s):
        return slice(3 * t + 3 * s, 3 * t + 3 * s + 3)

    def a_idx(s):
        return slice(6 * t + 3 * s, 6 * t + 3 * s + 3)

    # launch state: slot-1 position pinned
    for w in range(3):
        row = np.zeros(n)
        row[3 * 0 + w] = 1.0 / length_scale
        problem.add_linear(row, start_position[w] / length_scale, "==")

    # altitude box
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for s in range(t):
        lower[3 * s + 2] = lim.z_min
        upper[3 * s + 2] = lim.z_max
    problem.lower = lower
    problem.upper = upper

    dt = scenario.dt
    v_scale = lim.v_max
    c_scale = lim.v_max * dt
    for s in range(t - 1):
        # |v_{t+1} - (v_t + a_t dt)|_w <= dv0 componentwise
        for w in range(3):
            row = np.zeros(n)
            row[v_idx(s + 1)][w] = 1.0 / v_scale
            row[v_idx(s)][w] = -1.0 / v_scale
            row[a_idx(s)][w] = -dt / v_scale
            problem.add_linear(row, dv0 / v_scale, "<=")
            problem.add_linear(-row, dv0 / v_scale, "<=")
        # |c_{t+1} - (c_t + v_t dt + a_t dt^2/2)|_w <= dc0 componentwise
        for w in range(3):
            row = np.zeros(n)
            row[c_idx(s + 1)][w] = 1.0 / c_scale
            row[c_idx(s)][w] = -1.0 / c_scale
            row[v_idx(s)][w] = -dt / c_scale
            row[a_idx(s)][w] = -0.5 * dt * dt / c_scale
            problem.add_linear(row, dc0 / c_scale, "<=")
            problem.add_linear(-row, dc0 / c_scale, "<=")

    for s in range(t):
        # speed cap ||v_t||^2 <= v_max^2, scaled to unit radius
        e_mat = np.zeros((3, n))
        for w in range(3):
            e_mat[w, 3 * t + 3 * s + w] = 1.0 / lim.v_max
        problem.add_ball(e_mat, np.zeros(3), np.zeros(n), 1.0)
        # acceleration cap
        e_mat = np.zeros((3, n))
        for w in range(3):
            e_mat[w, 6 * t + 3 * s + w] = 1.0 / lim.a_max
        problem.add_ball(e_mat, np.zeros(3), np.zeros(n), 1.0)
        # minimum-speed minorant: ||v_ref||^2 + 2 v_ref.(v_t - v_ref) >= v_min^2
        vr = lin.v_ref[s]
        row = np.zeros(n)
        row[v_idx(s)] = 2.0 * vr / lim.v_max ** 2
        bound = (lim.v_min ** 2 + vr @ vr) / lim.v_max ** 2
        problem.add_linear(row, bound, ">=")

        # epigraph ball: q^(2/exp) ||c_t - c_user||^2 <= (B_i P_t)^(2/exp)
        if q > 0.0:
            b_p = gains.user[s] * powers[s]
            radius_sq = (b_p / q) ** (2.0 / exp) if b_p > 0 else 0.0
            radius = np.sqrt(radius_sq)
            scale = max(radius, 1e-9)
            e_mat = np.zeros((3, n))
            e0 = np.zeros(3)
            for w in range(3):
                e_mat[w, 3 * s + w] = 1.0 / scale
                e0[w] = -scenario.user_track[s, w] / scale
            problem.add_ball(e_mat, e0, np.zeros(n), radius_sq / scale ** 2)

        # backhaul minorant:
        #   (B_s P_s)^(2/exp) f_user(c_t) >= (B_i P_t)^(2/exp) ||c_t - c_tbs||^2
        k_s = (gains.tbs[s] * lim.p_s) ** (2.0 / exp)
        k_a = (gains.user[s] * powers[s]) ** (2.0 / exp)
        cr = lin.c_ref[s]
        delta = cr - scenario.user_track[s]
        d_ref = max(float(np.linalg.norm(delta)), 1.0)
        if k_a > 0.0:
            coeff = np.sqrt(k_a / k_s) / d_ref
            e_mat = np.zeros((3, n))
            e0 = np.zeros(3)
            for w in range(3):
                e_mat[w, 3 * s + w] = coeff
                e0[w] = -scenario.tbs_position[w] * coeff
            # r(c_t) = f_user(c_t) / d_ref^2, affine in c_t
            q_vec = np.zeros(n)
            q_vec[c_idx(s)] = 2.0 * delta / d_ref ** 2
            r0 = float(delta @ delta - 2.0 * delta @ cr) / d_ref ** 2
            problem.add_ball(e_mat, e0, q_vec, r0)

        # interference minorant per victim (affine):
        #   (i0/noise)^(2/exp) f_victim(c_t) >= (B_j P_t)^(2/exp)
        for b_j, c_j in zip(gains.victims[s], scenario.victim_tracks[s]):
            delta = lin.c_ref[s] - c_j
            d_ref_sq = max(float(delta @ delta), 1.0)
            rhs = (b_j * powers[s]) ** (2.0 / exp) / i0_over_noise ** (2.0 / exp)
            row = np.zeros(n)
            row[c_idx(s)] = 2.0 * delta / d_ref_sq
            bound = (rhs - float(delta @ delta) + 2.0 * float(delta @ lin.c_ref[s])) / d_ref_sq
            problem.add_linear(row, bound, ">=")

    return problem


def snr_upper_bound(scenario, powers) -> float:
    """Bisection cap: the SNR of a slot at distance z_min with its own power."""
    gains = slot_gains(scenario)
    exp = scenario.pathloss.exponent
    return float(np.max(np.asarray(powers) * gains.user * scenario.limits.z_min ** (-exp)))


def _extract_state(scenario, x):
    t = scenario.n_slots
    c = x[: 3 * t].reshape(t, 3).copy()
    v = x[3 * t: 6 * t].reshape(t, 3).copy()
    a = x[6 * t:].reshape(t, 3).copy()
    return c, v, a


def bisect_q(scenario, lin: LinearizationPoint, powers, eps: float = 1e-3,
             m_max: int = 50, q_lower: float = 0.0, start_position=None):
    """Largest q (within relative gap eps) keeping the feasibility problem solvable.

    ``q_lower`` seeds the bracket with a q known (or expected) to be feasible,
    e.g. the power step's achieved Q; it is probed before being trusted.
    Returns (q, (positions, velocities, accelerations), stats) where stats
    carries the probe count and accumulated solver iterations.
    """
    upper = snr_upper_bound(scenario, powers)
    lower = 0.0
    best_x = None
    stats = {"probes": 0, "solver_iterations": 0}

    def probe(q):
        stats["probes"] += 1
        problem = build_feasibility(scenario, lin, powers, q, start_position=start_position)
        result = convex_core.solve(problem)
        stats["solver_iterations"] += result.iterations
        return result.x if result.status == "optimal" else None

    if q_lower > 0.0:
        x = probe(min(q_lower, upper))
        if x is not None:
            lower = min(q_lower, upper)
            best_x = x
    if best_x is None:
        x = probe(0.0)
        if x is None:
            raise TrajectoryInfeasible(
                "kinematic constraints unsatisfiable even with the rate target removed"
            )
        best_x = x

    for _ in range(m_max):
        if lower > 0.0 and (upper - lower) / lower < eps:
            break
        q_mid = 0.5 * (upper + lower)
        x = probe(q_mid)
        if x is not None:
            lower = q_mid
            best_x = x
        else:
            upper = q_mid

    return lower, _extract_state(scenario, best_x), stats
