"""Independent verification tools.

Everything here deliberately avoids the code paths it checks: the Monte Carlo
rate estimator draws raw fading samples instead of integrating the density,
the grid planner enumerates discretized candidates against the original
(non-linearized) constraints, and the concavity scan cross-checks derivative
quadratures with finite differences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import channel
from .channel import slot_gains


def mc_ergodic_rate(a: float, k: float, n_samples: int, seed: int = 0):
    """Monte Carlo ergodic rate: (mean, standard error) over fading draws."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if a == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)
    h = math.sqrt(k / (1.0 + k)) + math.sqrt(1.0 / (2.0 * (1.0 + k))) * g
    rates = np.log2(1.0 + a * np.abs(h) ** 2)
    mean = float(np.mean(rates))
    stderr = float(np.std(rates, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return mean, stderr


@dataclass(frozen=True)
class GridSpec:
    """Discretization for the brute-force planner."""

    nx: int = 9
    ny: int = 9
    nz: int = 3
    n_powers: int = 8
    pin_start: np.ndarray | None = None  # optional slot-1 position


class GridInfeasible(RuntimeError):
    pass


def _position_grid(scenario, spec: GridSpec):
    pts = np.vstack([scenario.user_track, scenario.tbs_position[None, :]])
    x = np.linspace(pts[:, 0].min(), pts[:, 0].max(), spec.nx)
    y_lo, y_hi = pts[:, 1].min(), pts[:, 1].max()
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    y = np.linspace(y_lo, y_hi, spec.ny)
    z = np.linspace(scenario.limits.z_min, scenario.limits.z_max, spec.nz)
    grid = np.array([[xi, yi, zi] for xi in x for yi in y for zi in z])
    return grid


def grid_plan(scenario, spec: GridSpec = GridSpec()):
    """Exhaustive search over discretized positions and a power ladder.

    Candidates are kept only if they satisfy every original constraint in
    exact form (velocities and accelerations taken as finite differences of
    the discrete positions).  Returns (best_q, best_plan_dict).
    """
    t = scenario.n_slots
    if t > 3:
        raise ValueError("grid_plan supports T <= 3 only")
    lim = scenario.limits
    exp = scenario.pathloss.exponent
    gains = slot_gains(scenario)
    i0n = lim.i0 / scenario.noise_power
    grid = _position_grid(scenario, spec)
    # per-slot candidate sets; an explicit start pins slot 1 to a single point
    candidates = [grid] * t
    if spec.pin_start is not None:
        candidates = [np.asarray(spec.pin_start, dtype=float).reshape(1, 3)] + [grid] * (t - 1)
    n_candidates = 1
    for c in candidates:
        n_candidates *= c.shape[0]
    if n_candidates > 10 ** 6:
        raise ValueError("grid too large: more than 1e6 position candidates")
    powers = np.linspace(lim.p_max / spec.n_powers, lim.p_max, spec.n_powers)

    # per-candidate, per-slot quantities
    snr_per_watt = []
    cap = []
    for s in range(t):
        pts = candidates[s]
        d_user = np.linalg.norm(pts - scenario.user_track[s], axis=1)
        d_tbs = np.linalg.norm(pts - scenario.tbs_position, axis=1)
        spw = gains.user[s] * d_user ** (-exp)
        c = np.minimum(lim.p_max, lim.p_s * gains.tbs[s] * d_tbs ** (-exp) / spw)
        for b_j, c_j in zip(gains.victims[s], scenario.victim_tracks[s]):
            d = np.linalg.norm(pts - c_j, axis=1)
            c = np.minimum(c, i0n * d ** exp / b_j)
        snr_per_watt.append(spw)
        cap.append(c)

    best_q = -np.inf
    best = None
    power_combos = np.array(list(itertools.product(powers, repeat=t)))  # (n_pc, T)
    feasible_energy = power_combos.sum(axis=1) * scenario.dt <= lim.e0 * (1 + 1e-12)
    power_combos = power_combos[feasible_energy]
    if power_combos.size == 0:
        raise GridInfeasible("no power combination satisfies the energy budget")

    for combo in itertools.product(*(range(c.shape[0]) for c in candidates)):
        pos = np.array([candidates[s][combo[s]] for s in range(t)])
        if t > 1:
            vel = np.diff(pos, axis=0) / scenario.dt
            speeds = np.linalg.norm(vel, axis=1)
            if np.any(speeds < lim.v_min) or np.any(speeds > lim.v_max):
                continue
            if t > 2:
                acc = np.diff(vel, axis=0) / scenario.dt
                if np.any(np.linalg.norm(acc, axis=1) > lim.a_max):
                    continue
        caps = np.array([cap[s][combo[s]] for s in range(t)])
        per_watt = np.array([snr_per_watt[s][combo[s]] for s in range(t)])
        if np.any(caps <= 0):
            continue
        ok = np.all(power_combos <= caps[None, :] * (1 + 1e-12), axis=1)
        if not np.any(ok):
            continue
        snrs = power_combos[ok] * per_watt[None, :]
        q_vals = snrs.min(axis=1)
        idx = int(np.argmax(q_vals))
        if q_vals[idx] > best_q:
            best_q = float(q_vals[idx])
            best = {"positions": pos.copy(), "powers": power_combos[ok][idx].copy()}

    if best is None:
        raise GridInfeasible("no feasible grid candidate")
    return best_q, best


def compare_with_grid(scenario, plan_q: float, spec: GridSpec = GridSpec()):
    """Report how a plan's audited Q compares against the grid reference."""
    grid_q, grid_best = grid_plan(scenario, spec)
    ratio = plan_q / grid_q if grid_q > 0 else math.inf
    return {
        "grid_q": grid_q,
        "plan_q": plan_q,
        "ratio": ratio,
        "worse_local_optimum": plan_q < grid_q * (1 - 1e-9),
        "grid_plan": grid_best,
    }


def concavity_scan(k: float, a_grid) -> dict:
    """Numeric monotonicity/concavity verification of the ergodic rate.

    Checks finite-difference signs across the grid and cross-checks the
    first/second derivative quadratures against central differences.
    """
    a_grid = np.asarray(a_grid, dtype=float)
    if np.any(a_grid <= 0) or np.any(np.diff(a_grid) <= 0):
        raise ValueError("a_grid must be sorted and positive")
    rates = np.array([channel.ergodic_rate(a, k) for a in a_grid])
    d1 = np.diff(rates)
    # second differences on the (possibly log-spaced) grid via divided differences
    h1 = np.diff(a_grid)
    slopes = d1 / h1
    d2 = np.diff(slopes)

    checks = []
    for a in (a_grid[0], a_grid[len(a_grid) // 2], a_grid[-1]):
        h = 1e-4 * a
        central = (channel.ergodic_rate(a + h, k) - channel.ergodic_rate(a - h, k)) / (2 * h)
        quad = channel.ergodic_rate_derivative(a, k)
        checks.append({
            "a": float(a),
            "derivative_quadrature": quad,
            "derivative_central": central,
            "relative_error": abs(quad - central) / abs(quad),
            "second_derivative_quadrature": channel.ergodic_rate_second_derivative(a, k),
        })

    return {
        "k": k,
        "first_differences_positive": bool(np.all(d1 > 0)),
        "second_differences_negative": bool(np.all(d2 < 0)),
        "derivative_positive": all(c["derivative_quadrature"] > 0 for c in checks),
        "second_derivative_negative": all(
            c["second_derivative_quadrature"] < 0 for c in checks),
        "derivative_agreement": max(c["relative_error"] for c in checks),
        "checks": checks,
    }
