"""Outer successive-convex-approximation loop.

Default (decoupled) mode alternates the power LP and the bisection-wrapped
trajectory feasibility search, re-linearizing at each iterate, until the
relative improvement of the min average SNR falls below ``eps``.  The joint
mode re-solves the power LP inside every bisection probe instead of once per
outer iteration.  Every returned plan is audited against the original
(non-linearized) constraints.
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass, field

import numpy as np

from . import channel, power_step, trajectory_step
from .channel import slot_gains
from .scenario import FlightPlan

AUDIT_SLACK = 1e-6
MONOTONE_SLACK = 10 * 1e-8  # ten times the solver feasibility tolerance


class PlanError(RuntimeError):
    pass


class AuditError(PlanError):
    """The final plan violates an original constraint beyond tolerance."""


@dataclass
class IterationRecord:
    l: int
    q_after_power: float
    q_after_trajectory: float
    bisection_probes: int
    solver_iterations: int
    wall_time: float


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)

    def append(self, rec: IterationRecord):
        self.records.append(rec)

    @property
    def n_iterations(self) -> int:
        return len(self.records)

    def q_values(self):
        return [r.q_after_trajectory for r in self.records]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("iteration,q_after_power,q_after_trajectory,bisection_probes,"
                  "solver_iterations,wall_time_s\n")
        for r in self.records:
            out.write(f"{r.l},{r.q_after_power!r},{r.q_after_trajectory!r},"
                      f"{r.bisection_probes},{r.solver_iterations},{r.wall_time!r}\n")
        return out.getvalue()


def default_initializations(scenario):
    """The three stock initial trajectories: above the user, at the 3/4 point,
    and at the midpoint toward the TBS, all at minimum altitude."""
    track = scenario.user_track
    z = scenario.limits.z_min
    inits = []
    for factor in (1.0, 0.75, 0.5):
        c = track.copy()
        c[:, 0] = factor * track[:, 0]
        c[:, 2] = z
        inits.append(c)
    return inits


def _init_velocities(scenario, trajectory):
    t = scenario.n_slots
    if t == 1:
        v = np.zeros((1, 3))
        v[0, 0] = scenario.limits.v_min
        return v
    v = np.empty((t, 3))
    v[:-1] = np.diff(trajectory, axis=0) / scenario.dt
    v[-1] = v[-2]
    # keep the linearization point inside the speed band
    lim = scenario.limits
    for s in range(t):
        speed = np.linalg.norm(v[s])
        if speed < lim.v_min:
            direction = v[s] / speed if speed > 0 else np.array([1.0, 0.0, 0.0])
            v[s] = direction * lim.v_min
        elif speed > lim.v_max:
            v[s] *= lim.v_max / speed
    return v


def audit_plan(scenario, plan: FlightPlan, slack: float = AUDIT_SLACK) -> dict:
    """Relative residuals of the original constraints; positive = violated."""
    lim = scenario.limits
    gains = slot_gains(scenario)
    exp = scenario.pathloss.exponent
    t = scenario.n_slots
    c, v, a, p = plan.positions, plan.velocities, plan.accelerations, plan.powers

    res = {}
    res["power_box"] = float(np.max(np.maximum(p - lim.p_max, -p))) / lim.p_max
    res["energy"] = (float(np.sum(p) * scenario.dt) - lim.e0) / lim.e0
    speeds = np.linalg.norm(v, axis=1)
    res["speed_max"] = float(np.max(speeds - lim.v_max)) / lim.v_max
    res["speed_min"] = float(np.max(lim.v_min - speeds)) / lim.v_min
    res["acceleration"] = float(np.max(np.linalg.norm(a, axis=1) - lim.a_max)) / lim.a_max
    res["altitude"] = float(np.max(np.maximum(c[:, 2] - lim.z_max, lim.z_min - c[:, 2]))) / lim.z_min

    # expected interference power at each victim vs the temperature limit
    worst = -np.inf
    for s in range(t):
        for b_j, c_j in zip(gains.victims[s], scenario.victim_tracks[s]):
            d = np.linalg.norm(c[s] - c_j)
            interference = p[s] * b_j * d ** (-exp) * scenario.noise_power
            worst = max(worst, (interference - lim.i0) / lim.i0)
    res["interference"] = float(worst) if np.isfinite(worst) else -1.0

    # ergodic backhaul: UAV-to-user rate may not exceed the TBS-to-UAV rate
    worst = -np.inf
    for s in range(t):
        a_user = p[s] * gains.user[s] * np.linalg.norm(c[s] - scenario.user_track[s]) ** (-exp)
        a_tbs = lim.p_s * gains.tbs[s] * np.linalg.norm(c[s] - scenario.tbs_position) ** (-exp)
        r_user = channel.ergodic_rate(a_user, scenario.rician_k)
        r_tbs = channel.ergodic_rate(a_tbs, scenario.rician_k)
        worst = max(worst, (r_user - r_tbs) / max(r_tbs, 1e-12))
    res["backhaul_rate"] = float(worst)

    dv0, dc0 = trajectory_step.default_residual_thresholds(scenario)
    if t > 1:
        dv = v[1:] - (v[:-1] + a[:-1] * scenario.dt)
        dc = c[1:] - (c[:-1] + v[:-1] * scenario.dt + 0.5 * a[:-1] * scenario.dt ** 2)
        res["kinematic_v"] = float(np.max(np.abs(dv)) - dv0) / max(dv0, 1e-12)
        res["kinematic_c"] = float(np.max(np.abs(dc)) - dc0) / max(dc0, 1e-12)
    else:
        res["kinematic_v"] = res["kinematic_c"] = -1.0

    res["max_violation"] = max(res.values())
    res["passed"] = res["max_violation"] <= slack
    return res


def min_victim_clearance(scenario, plan: FlightPlan):
    """Per-slot ratio of actual victim distance to the interference-mandated
    minimum distance (B_j P_t normalized by i0/noise, to the 1/exponent)."""
    gains = slot_gains(scenario)
    exp = scenario.pathloss.exponent
    i0n = scenario.limits.i0 / scenario.noise_power
    ratios = []
    for s in range(scenario.n_slots):
        slot_ratio = np.inf
        for b_j, c_j in zip(gains.victims[s], scenario.victim_tracks[s]):
            required = (b_j * plan.powers[s] / i0n) ** (1.0 / exp)
            actual = float(np.linalg.norm(plan.positions[s] - c_j))
            if required > 0:
                slot_ratio = min(slot_ratio, actual / required)
        ratios.append(slot_ratio)
    return np.asarray(ratios)


def plan(scenario, init_trajectory=None, eps: float = 1e-3, l_max: int = 50,
         mode: str = "decoupled", bisect_eps: float = 1e-3,
         audit: bool = True):
    """Run the outer SCA loop; returns (FlightPlan, IterationTrace).

    The bracket of each bisection is seeded with the power step's achieved Q
    (a verified feasible point), which makes the Q sequence monotone
    non-decreasing up to solver tolerance.
    """
    if mode not in ("decoupled", "joint"):
        raise ValueError(f"unknown mode {mode!r}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if init_trajectory is None:
        init_trajectory = default_initializations(scenario)[2]
    init_trajectory = np.asarray(init_trajectory, dtype=float)
    lim = scenario.limits
    if np.any(init_trajectory[:, 2] < lim.z_min - 1e-9) or np.any(
            init_trajectory[:, 2] > lim.z_max + 1e-9):
        raise PlanError("infeasible initialization: altitude box violated")

    traj = init_trajectory.copy()
    vel = _init_velocities(scenario, traj)
    start = init_trajectory[0]
    powers = np.zeros(scenario.n_slots)
    q_prev = 0.0
    trace = IterationTrace()

    for l in range(1, l_max + 1):
        tic = time.perf_counter()
        if mode == "decoupled":
            powers, q_power = power_step.solve_power(scenario, traj)
            lin = trajectory_step.LinearizationPoint(traj, vel)
            q, (traj, vel, acc), stats = trajectory_step.bisect_q(
                scenario, lin, powers, eps=bisect_eps, q_lower=q_power,
                start_position=start)
        else:
            powers, q_power = power_step.solve_power(scenario, traj)
            lin = trajectory_step.LinearizationPoint(traj, vel)
            q, (traj, vel, acc), stats = _joint_bisect(
                scenario, lin, q_power, eps=bisect_eps, start_position=start)
            powers, _ = power_step.solve_power(scenario, traj)
        trace.append(IterationRecord(
            l=l, q_after_power=q_power, q_after_trajectory=q,
            bisection_probes=stats["probes"],
            solver_iterations=stats["solver_iterations"],
            wall_time=time.perf_counter() - tic))
        if q < q_prev - max(MONOTONE_SLACK, 1e-9 * q_prev):
            raise PlanError(
                f"non-monotone Q at iteration {l}: {q_prev} -> {q}; solver defect")
        if q > 0 and abs(q - q_prev) / q < eps:
            q_prev = q
            break
        q_prev = q

    q_final = power_step.achieved_q(scenario, traj, powers)
    flight = FlightPlan(positions=traj, velocities=vel, accelerations=acc,
                        powers=powers, q_value=q_final)
    if audit:
        report = audit_plan(scenario, flight)
        if not report["passed"]:
            raise AuditError(f"constraint audit failed: {report}")
    return flight, trace


def _joint_bisect(scenario, lin, q_seed, eps, start_position):
    """Joint-mode probe: at each candidate q, re-solve the power LP at the
    reference positions with the extra requirement Q >= q, then test the
    trajectory feasibility with those powers."""
    from . import convex_core

    def probe_powers(q):
        problem = power_step.build_power_lp(scenario, lin.c_ref)
        t = scenario.n_slots
        row = np.zeros(t + 1)
        row[t] = 1.0
        problem.add_linear(row, q, ">=")
        result = convex_core.solve(problem)
        if result.status != "optimal":
            return None
        return np.clip(result.x[:t], 0.0, scenario.limits.p_max)

    def probe(q):
        p = probe_powers(q)
        if p is None:
            return None
        problem = trajectory_step.build_feasibility(
            scenario, lin, p, q, start_position=start_position)
        result = convex_core.solve(problem)
        if result.status != "optimal":
            return None
        return p, result.x

    upper_powers = probe_powers(0.0)
    if upper_powers is None:
        raise PlanError("joint mode: power LP infeasible at q=0; construction bug")
    upper = trajectory_step.snr_upper_bound(scenario, np.full(
        scenario.n_slots, scenario.limits.p_max))
    lower = 0.0
    best = None
    stats = {"probes": 0, "solver_iterations": 0}

    def counted_probe(q):
        stats["probes"] += 1
        return probe(q)

    if q_seed > 0:
        hit = counted_probe(min(q_seed, upper))
        if hit is not None:
            lower = min(q_seed, upper)
            best = hit
    if best is None:
        hit = counted_probe(0.0)
        if hit is None:
            raise trajectory_step.TrajectoryInfeasible(
                "kinematic constraints unsatisfiable even with the rate target removed")
        best = hit
    for _ in range(50):
        if lower > 0 and (upper - lower) / lower < eps:
            break
        q_mid = 0.5 * (upper + lower)
        hit = counted_probe(q_mid)
        if hit is not None:
            lower = q_mid
            best = hit
        else:
            upper = q_mid
    powers, x = best
    return lower, trajectory_step._extract_state(scenario, x), stats
