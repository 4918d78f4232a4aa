import itertools

import numpy as np
import pytest

from seaplan import power_step
from seaplan.channel import slot_gains
from seaplan.power_step import PowerStepError, achieved_q, build_power_lp, solve_power
from seaplan.scenario import toy_scenario


def _mid_trajectory(scenario, z=2600.0):
    traj = 0.5 * (scenario.user_track + scenario.tbs_position)
    traj[:, 2] = z
    return traj


def test_single_slot_closed_form():
    # with one slot the LP is min of four explicit caps mapped through B d^-exp
    scn = toy_scenario(n_slots=1)
    traj = np.array([[4000.0, 0.0, 2600.0]])
    g = slot_gains(scn)
    lim = scn.limits
    exp = scn.pathloss.exponent
    d_u = np.linalg.norm(traj[0] - scn.user_track[0])
    d_t = np.linalg.norm(traj[0] - scn.tbs_position)
    d_v = np.linalg.norm(traj[0] - scn.victim_tracks[0][0])
    cap = min(
        lim.p_max,
        lim.p_s * g.tbs[0] * d_t ** (-exp) * d_u ** exp / g.user[0],
        (lim.i0 / scn.noise_power) * d_v ** exp / g.victims[0][0],
        lim.e0 / scn.dt,
    )
    q_exact = cap * g.user[0] * d_u ** (-exp)
    powers, q = solve_power(scn, traj)
    assert q == pytest.approx(q_exact, rel=1e-8)
    assert powers[0] == pytest.approx(cap, rel=1e-8)


def test_achieved_q_definition(toy):
    traj = _mid_trajectory(toy)
    powers = np.array([2.0, 3.0])
    g = slot_gains(toy)
    exp = toy.pathloss.exponent
    d = np.linalg.norm(traj - toy.user_track, axis=1)
    manual = min(powers[s] * g.user[s] * d[s] ** (-exp) for s in range(2))
    assert achieved_q(toy, traj, powers) == pytest.approx(manual, rel=1e-14)


def test_solution_feasible_and_tight(toy):
    traj = _mid_trajectory(toy)
    powers, q = solve_power(toy, traj)
    lim = toy.limits
    assert np.all(powers >= 0.0) and np.all(powers <= lim.p_max * (1 + 1e-9))
    assert np.sum(powers) * toy.dt <= lim.e0 * (1 + 1e-9)
    assert q == pytest.approx(achieved_q(toy, traj, powers), rel=1e-12)
    # energy tie-break: no slot carries more power than its own SNR target needs
    g = slot_gains(toy)
    exp = toy.pathloss.exponent
    d = np.linalg.norm(traj - toy.user_track, axis=1)
    slot_snr = powers * g.user * d ** (-exp)
    assert np.min(slot_snr) == pytest.approx(q, rel=1e-9)


def test_brute_force_never_beats_lp(toy):
    traj = _mid_trajectory(toy)
    _, q_lp = solve_power(toy, traj)
    lim = toy.limits
    g = slot_gains(toy)
    exp = toy.pathloss.exponent
    d_u = np.linalg.norm(traj - toy.user_track, axis=1)
    d_t = np.linalg.norm(traj - toy.tbs_position, axis=1)
    ladder = np.linspace(lim.p_max / 40.0, lim.p_max, 40)
    best = 0.0
    i0n = lim.i0 / toy.noise_power
    for combo in itertools.product(ladder, repeat=toy.n_slots):
        p = np.asarray(combo)
        if np.sum(p) * toy.dt > lim.e0:
            continue
        ok = True
        for s in range(toy.n_slots):
            if p[s] * g.user[s] * d_u[s] ** (-exp) > lim.p_s * g.tbs[s] * d_t[s] ** (-exp):
                ok = False
            for b_j, c_j in zip(g.victims[s], toy.victim_tracks[s]):
                dv = np.linalg.norm(traj[s] - c_j)
                if p[s] * b_j * dv ** (-exp) > i0n:
                    ok = False
        if ok:
            best = max(best, float(np.min(p * g.user * d_u ** (-exp))))
    assert best <= q_lp * (1 + 1e-9)
    assert best >= 0.8 * q_lp  # ladder is coarse but should land nearby


@pytest.mark.parametrize("field,loose,tight", [
    ("i0_dbm", -50.0, -60.0),
    ("e0_j", 1600.0, 200.0),
])
def test_q_monotone_in_limits(field, loose, tight):
    scn_loose = toy_scenario(**{field: loose})
    scn_tight = toy_scenario(**{field: tight})
    traj = _mid_trajectory(scn_loose)
    _, q_loose = solve_power(scn_loose, traj)
    _, q_tight = solve_power(scn_tight, traj)
    assert q_loose >= q_tight * (1 - 1e-9)


def test_bad_trajectory_shape(toy):
    with pytest.raises(PowerStepError, match="shape"):
        solve_power(toy, np.zeros((3, 3)))


def test_degenerate_geometry(toy):
    traj = _mid_trajectory(toy)
    traj[0] = toy.user_track[0]
    with pytest.raises(PowerStepError, match="degenerate"):
        solve_power(toy, traj)


def test_lp_structure(toy):
    traj = _mid_trajectory(toy)
    problem = build_power_lp(toy, traj)
    t = toy.n_slots
    m_victims = sum(v.shape[0] for v in toy.victim_tracks)
    # epigraph + backhaul per slot, interference per victim, one energy row
    assert len(problem.linear) == 2 * t + m_victims + 1
    assert problem.n_vars == t + 1
    assert np.all(problem.lower == 0.0)
