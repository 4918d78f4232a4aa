"""Transmit-power subproblem with the trajectory frozen.

With positions fixed, raising both sides of every power-form constraint to the
exponent/2 power (a monotone map on nonnegative reals) leaves constraints that
are linear in the per-slot powers and the epigraph variable Q, so the step is
a plain LP: maximize Q subject to the epigraph, backhaul, interference, energy
and box constraints.  A second pass minimizes total energy at the achieved Q
so the returned powers are deterministic across equivalent optima.
"""

from __future__ import annotations

import numpy as np

from . import convex_core
from .channel import slot_gains


class PowerStepError(RuntimeError):
    pass


def _distances(scenario, trajectory):
    trajectory = np.asarray(trajectory, dtype=float)
    t = scenario.n_slots
    if trajectory.shape != (t, 3):
        raise PowerStepError(f"trajectory must have shape ({t}, 3)")
    d_user = np.linalg.norm(trajectory - scenario.user_track, axis=1)
    d_tbs = np.linalg.norm(trajectory - scenario.tbs_position, axis=1)
    d_vic = [
        np.linalg.norm(trajectory[s] - scenario.victim_tracks[s], axis=1)
        for s in range(t)
    ]
    if np.any(d_user <= 0) or np.any(d_tbs <= 0) or any(np.any(d <= 0) for d in d_vic):
        raise PowerStepError("degenerate geometry: UAV coincident with a user, TBS, or victim")
    return d_user, d_tbs, d_vic


def build_power_lp(scenario, trajectory) -> convex_core.ConvexSubproblem:
    """LP over (P_1..P_T, Q), maximizing Q at fixed UAV positions.

    The interference temperature enters noise-normalized (i0 / noise power) so
    the power-form constraint is algebraically identical to capping the
    expected interference power at i0.
    """
    t = scenario.n_slots
    lim = scenario.limits
    gains = slot_gains(scenario)
    d_user, d_tbs, d_vic = _distances(scenario, trajectory)
    exp = scenario.pathloss.exponent
    i0_over_noise = lim.i0 / scenario.noise_power

    n = t + 1
    objective = np.zeros(n)
    objective[t] = 1.0
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    upper[:t] = lim.p_max
    problem = convex_core.ConvexSubproblem(n, objective, lower=lower, upper=upper)

    for s in range(t):
        b_i = gains.user[s]
        # epigraph: Q d^exp <= B_i P, scaled to O(1)
        row = np.zeros(n)
        row[t] = d_user[s] ** exp / (b_i * lim.p_max)
        row[s] = -1.0 / lim.p_max
        problem.add_linear(row, 0.0, "<=")
        # backhaul: B_i P d_user^-exp <= B_s P_s d_tbs^-exp
        snr_tbs = lim.p_s * gains.tbs[s] * d_tbs[s] ** (-exp)
        cap = snr_tbs * d_user[s] ** exp / b_i
        row = np.zeros(n)
        row[s] = 1.0 / lim.p_max
        problem.add_linear(row, cap / lim.p_max, "<=")
        # interference per victim: B_j P d_vic^-exp <= i0 / noise
        for b_j, d in zip(gains.victims[s], d_vic[s]):
            cap = i0_over_noise * d ** exp / b_j
            row = np.zeros(n)
            row[s] = 1.0 / lim.p_max
            problem.add_linear(row, cap / lim.p_max, "<=")
    # energy budget
    row = np.zeros(n)
    row[:t] = scenario.dt / lim.e0
    problem.add_linear(row, 1.0, "<=")
    return problem


def achieved_q(scenario, trajectory, powers) -> float:
    """min over slots of the average SNR of the UAV-to-user link."""
    gains = slot_gains(scenario)
    d_user, _, _ = _distances(scenario, trajectory)
    exp = scenario.pathloss.exponent
    return float(np.min(np.asarray(powers) * gains.user * d_user ** (-exp)))


def solve_power(scenario, trajectory):
    """Optimal per-slot powers and the achieved min average SNR.

    Among power vectors achieving the optimal Q, the one with the smallest
    total energy is returned (second LP pass) so outputs are deterministic.
    """
    t = scenario.n_slots
    problem = build_power_lp(scenario, trajectory)
    result = convex_core.solve(problem)
    if result.status != "optimal":
        raise PowerStepError(f"power LP unexpectedly {result.status}; construction bug")
    q_star = float(result.x[t])

    # energy-minimal solution at (essentially) the same Q
    tie = build_power_lp(scenario, trajectory)
    tie.objective = np.zeros(t + 1)
    tie.objective[:t] = -1.0
    gains = slot_gains(scenario)
    d_user, _, _ = _distances(scenario, trajectory)
    exp = scenario.pathloss.exponent
    q_keep = q_star * (1.0 - 1e-9)
    for s in range(t):
        row = np.zeros(t + 1)
        row[s] = gains.user[s] * d_user[s] ** (-exp) / max(q_keep, 1e-300)
        tie.add_linear(row, 1.0, ">=")
    tie_result = convex_core.solve(tie)
    if tie_result.status == "optimal":
        powers = np.clip(tie_result.x[:t], 0.0, scenario.limits.p_max)
    else:
        powers = np.clip(result.x[:t], 0.0, scenario.limits.p_max)
    return powers, achieved_q(scenario, trajectory, powers)
