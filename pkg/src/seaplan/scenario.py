"""Problem-instance data model.

A :class:`Scenario` bundles geometry (TBS, user track, per-slot victim users),
channel parameters, and operational limits for one planning run.  Everything is
stored in linear units (watts, meters, dimensionless gains); dB-denominated
values only appear in the JSON schema, where fields carry ``_db``/``_dbm``/
``_dbi`` suffixes.

Shadowing is treated as location-dependent and known ahead of time: one dB
value per (link, slot) is drawn from N(0, shadow_sigma^2) with the scenario
seed at construction and is deterministic thereafter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .units import dbi_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm


class ScenarioError(ValueError):
    """Raised when a scenario file fails to parse or violates an invariant."""


@dataclass(frozen=True)
class Gains:
    """Linear antenna gains (converted from dBi)."""

    tbs: float
    uav: float
    uav_user: float
    sat_user: float


@dataclass(frozen=True)
class Pathloss:
    a0_db: float
    exponent: float
    d0: float
    shadow_sigma_db: float


@dataclass(frozen=True)
class Limits:
    """Operational limits in linear units (m/s, m, W, J)."""

    v_min: float
    v_max: float
    a_max: float
    z_min: float
    z_max: float
    p_max: float
    e0: float
    i0: float
    p_s: float


@dataclass(frozen=True)
class Shadowing:
    """Per-link, per-slot shadowing realizations in dB."""

    user: np.ndarray            # (T,) UAV-to-user link
    tbs: np.ndarray             # (T,) TBS-to-UAV link
    victims: tuple              # per slot, (M_t,) UAV-to-victim links

    def __eq__(self, other):
        if not isinstance(other, Shadowing):
            return NotImplemented
        return (
            np.array_equal(self.user, other.user)
            and np.array_equal(self.tbs, other.tbs)
            and len(self.victims) == len(other.victims)
            and all(np.array_equal(a, b) for a, b in zip(self.victims, other.victims))
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable full problem instance; safe to share across workers.

    Identity-based hashing keeps instances usable as cache keys; compare
    field-wise via ``to_dict`` when needed.
    """

    tbs_position: np.ndarray    # (3,) m
    user_track: np.ndarray      # (T, 3) m
    victim_tracks: tuple        # per slot, (M_t, 3) m
    dt: float                   # s
    gains: Gains
    noise_power: float          # W
    rician_k: float
    pathloss: Pathloss
    limits: Limits
    shadow_realization: Shadowing
    seed: int = 0

    @property
    def n_slots(self) -> int:
        return self.user_track.shape[0]

    def validate(self) -> None:
        t = self.user_track.shape[0]
        if t < 1:
            raise ScenarioError("user_track: T >= 1 violated")
        if self.user_track.shape != (t, 3):
            raise ScenarioError("user_track: expected shape (T, 3)")
        if len(self.victim_tracks) != t:
            raise ScenarioError("victim_tracks: need exactly T per-slot victim lists")
        for s, victims in enumerate(self.victim_tracks):
            if victims.ndim != 2 or victims.shape[1] != 3:
                raise ScenarioError(f"victim_tracks[{s}]: expected shape (M_t, 3)")
        if not np.all(np.isfinite(self.user_track)):
            raise ScenarioError("user_track: non-finite entry")
        if self.dt <= 0:
            raise ScenarioError("dt: must be positive")
        lim = self.limits
        if not (0 < lim.v_min < lim.v_max):
            raise ScenarioError("limits: 0 < v_min < v_max violated")
        if lim.a_max <= 0:
            raise ScenarioError("limits.a_max: must be positive")
        if not (0 < lim.z_min < lim.z_max):
            raise ScenarioError("limits: 0 < z_min < z_max violated")
        for name in ("p_max", "e0", "i0", "p_s"):
            if getattr(lim, name) <= 0:
                raise ScenarioError(f"limits.{name}: must be positive")
        for name in ("tbs", "uav", "uav_user", "sat_user"):
            if getattr(self.gains, name) <= 0:
                raise ScenarioError(f"gains.{name}: must be positive")
        if self.noise_power <= 0:
            raise ScenarioError("noise_power: must be positive")
        if self.rician_k < 0:
            raise ScenarioError("rician_k: must be nonnegative")
        if self.pathloss.exponent <= 0:
            raise ScenarioError("pathloss.exponent: must be positive")
        if self.pathloss.d0 <= 0:
            raise ScenarioError("pathloss.d0: must be positive")
        if self.pathloss.shadow_sigma_db < 0:
            raise ScenarioError("pathloss.shadow_sigma_db: must be nonnegative")
        sh = self.shadow_realization
        if sh.user.shape != (t,) or sh.tbs.shape != (t,):
            raise ScenarioError("shadow_realization: per-slot arrays must have length T")
        if len(sh.victims) != t:
            raise ScenarioError("shadow_realization.victims: need exactly T entries")
        for s in range(t):
            if sh.victims[s].shape != (self.victim_tracks[s].shape[0],):
                raise ScenarioError(f"shadow_realization.victims[{s}]: length mismatch")

    def to_dict(self) -> dict:
        return {
            "geometry": {
                "tbs_position_m": self.tbs_position.tolist(),
                "user_track_m": self.user_track.tolist(),
                "victim_tracks_m": [v.tolist() for v in self.victim_tracks],
            },
            "channel": {
                "tbs_gain_dbi": linear_to_db(self.gains.tbs),
                "uav_gain_dbi": linear_to_db(self.gains.uav),
                "user_gain_dbi": linear_to_db(self.gains.uav_user),
                "sat_user_gain_dbi": linear_to_db(self.gains.sat_user),
                "noise_power_dbm": watts_to_dbm(self.noise_power),
                "rician_k": self.rician_k,
                "pathloss": {
                    "a0_db": self.pathloss.a0_db,
                    "exponent": self.pathloss.exponent,
                    "d0_m": self.pathloss.d0,
                    "shadow_sigma_db": self.pathloss.shadow_sigma_db,
                },
            },
            "limits": {
                "v_min_mps": self.limits.v_min,
                "v_max_mps": self.limits.v_max,
                "a_max_mps2": self.limits.a_max,
                "z_min_m": self.limits.z_min,
                "z_max_m": self.limits.z_max,
                "p_max_dbm": watts_to_dbm(self.limits.p_max),
                "e0_j": self.limits.e0,
                "i0_dbm": watts_to_dbm(self.limits.i0),
                "tbs_power_dbm": watts_to_dbm(self.limits.p_s),
            },
            "time": {"dt_s": self.dt},
            "seed": self.seed,
        }


@dataclass
class FlightPlan:
    """Per-slot planner output: UAV state, transmit power, and achieved min average SNR."""

    positions: np.ndarray       # (T, 3) m
    velocities: np.ndarray      # (T, 3) m/s
    accelerations: np.ndarray   # (T, 3) m/s^2
    powers: np.ndarray          # (T,) W
    q_value: float              # min over slots of the average SNR, dimensionless

    @property
    def n_slots(self) -> int:
        return self.positions.shape[0]

    def total_energy(self, dt: float) -> float:
        return float(np.sum(self.powers) * dt)


def _sample_shadowing(sigma_db: float, n_slots: int, victim_counts, seed: int) -> Shadowing:
    rng = np.random.default_rng(seed)
    user = rng.normal(0.0, sigma_db, n_slots)
    tbs = rng.normal(0.0, sigma_db, n_slots)
    victims = tuple(rng.normal(0.0, sigma_db, m) for m in victim_counts)
    return Shadowing(user=user, tbs=tbs, victims=victims)


def make_scenario(
    tbs_position,
    user_track,
    victim_tracks,
    dt: float,
    gains: Gains,
    noise_power: float,
    rician_k: float,
    pathloss: Pathloss,
    limits: Limits,
    seed: int = 0,
) -> Scenario:
    """Build and validate a Scenario, sampling the shadowing realization from the seed."""
    user_track = np.asarray(user_track, dtype=float)
    if user_track.ndim != 2 or user_track.shape[0] < 1 or user_track.shape[1] != 3:
        raise ScenarioError("user_track: T >= 1 violated (expected nonempty (T, 3) array)")
    victim_tracks = tuple(np.asarray(v, dtype=float).reshape(-1, 3) for v in victim_tracks)
    shadow = _sample_shadowing(
        pathloss.shadow_sigma_db, user_track.shape[0], [v.shape[0] for v in victim_tracks], seed
    )
    scn = Scenario(
        tbs_position=np.asarray(tbs_position, dtype=float),
        user_track=user_track,
        victim_tracks=victim_tracks,
        dt=float(dt),
        gains=gains,
        noise_power=float(noise_power),
        rician_k=float(rician_k),
        pathloss=pathloss,
        limits=limits,
        shadow_realization=shadow,
        seed=int(seed),
    )
    scn.validate()
    return scn


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ScenarioError(f"{where}.{key}: missing required field")
    return mapping[key]


def scenario_from_dict(cfg: dict) -> Scenario:
    for top in ("geometry", "channel", "limits", "time"):
        if top not in cfg:
            raise ScenarioError(f"{top}: missing required section")
    geo, ch, lim, tim = cfg["geometry"], cfg["channel"], cfg["limits"], cfg["time"]
    pl = _require(ch, "pathloss", "channel")
    user_track = np.asarray(_require(geo, "user_track_m", "geometry"), dtype=float)
    if user_track.size == 0:
        raise ScenarioError("geometry.user_track_m: T >= 1 violated")
    victim_raw = geo.get("victim_tracks_m")
    if victim_raw is None:
        victim_raw = [[] for _ in range(user_track.shape[0])]
    victim_tracks = [np.asarray(v, dtype=float).reshape(-1, 3) for v in victim_raw]
    gains = Gains(
        tbs=dbi_to_linear(_require(ch, "tbs_gain_dbi", "channel")),
        uav=dbi_to_linear(_require(ch, "uav_gain_dbi", "channel")),
        uav_user=dbi_to_linear(_require(ch, "user_gain_dbi", "channel")),
        sat_user=dbi_to_linear(_require(ch, "sat_user_gain_dbi", "channel")),
    )
    pathloss = Pathloss(
        a0_db=float(_require(pl, "a0_db", "channel.pathloss")),
        exponent=float(_require(pl, "exponent", "channel.pathloss")),
        d0=float(_require(pl, "d0_m", "channel.pathloss")),
        shadow_sigma_db=float(_require(pl, "shadow_sigma_db", "channel.pathloss")),
    )
    limits = Limits(
        v_min=float(_require(lim, "v_min_mps", "limits")),
        v_max=float(_require(lim, "v_max_mps", "limits")),
        a_max=float(_require(lim, "a_max_mps2", "limits")),
        z_min=float(_require(lim, "z_min_m", "limits")),
        z_max=float(_require(lim, "z_max_m", "limits")),
        p_max=dbm_to_watts(_require(lim, "p_max_dbm", "limits")),
        e0=float(_require(lim, "e0_j", "limits")),
        i0=dbm_to_watts(_require(lim, "i0_dbm", "limits")),
        p_s=dbm_to_watts(_require(lim, "tbs_power_dbm", "limits")),
    )
    return make_scenario(
        tbs_position=_require(geo, "tbs_position_m", "geometry"),
        user_track=user_track,
        victim_tracks=victim_tracks,
        dt=_require(tim, "dt_s", "time"),
        gains=gains,
        noise_power=dbm_to_watts(_require(ch, "noise_power_dbm", "channel")),
        rician_k=_require(ch, "rician_k", "channel"),
        pathloss=pathloss,
        limits=limits,
        seed=cfg.get("seed", 0),
    )


def load_scenario(path) -> Scenario:
    """Load a scenario from a JSON file; raises ScenarioError naming the offending field."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ScenarioError(f"scenario file {path}: top level must be a JSON object")
    return scenario_from_dict(cfg)


def save_scenario(scn: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scn.to_dict(), indent=2) + "\n")


def toy_scenario(n_slots: int = 2, dt: float = 60.0, seed: int = 1,
                 i0_dbm: float = -55.0, e0_j: float = 800.0) -> Scenario:
    """Small instance (T <= 3) sized for the brute-force grid reference.

    Same channel parameters and limits family as the canned instance, but a
    short user track starting at x = 5 km so coarse grids resolve it.
    """
    xs = np.linspace(5000.0, 5000.0 + 1800.0 * (n_slots - 1), n_slots)
    user_track = np.column_stack([xs, np.zeros(n_slots), np.full(n_slots, 10.0)])
    victim_tracks = [
        (user_track[i] + np.array([0.0, (-1.0) ** (i + 1) * 8000.0, 0.0])).reshape(1, 3)
        for i in range(n_slots)
    ]
    gains = Gains(
        tbs=dbi_to_linear(12.0),
        uav=dbi_to_linear(8.0),
        uav_user=dbi_to_linear(8.0),
        sat_user=dbi_to_linear(30.0),
    )
    limits = Limits(
        v_min=10.0, v_max=60.0, a_max=10.0, z_min=2600.0, z_max=5000.0,
        p_max=dbm_to_watts(40.0), e0=e0_j, i0=dbm_to_watts(i0_dbm),
        p_s=dbm_to_watts(40.0),
    )
    return make_scenario(
        tbs_position=[0.0, 0.0, 100.0],
        user_track=user_track,
        victim_tracks=victim_tracks,
        dt=dt,
        gains=gains,
        noise_power=dbm_to_watts(-107.0),
        rician_k=31.3,
        pathloss=Pathloss(a0_db=116.7, exponent=1.5, d0=2600.0, shadow_sigma_db=0.1),
        limits=limits,
        seed=seed,
    )


def canned_scenario(dt: float = 60.0, seed: int = 0, **limit_overrides) -> Scenario:
    """The canned maritime instance used throughout the test and acceptance suites.

    TBS at (0, 0, 100) m; user sampled at T=10 points along the x axis from
    5.0e4 m to 6.8e4 m at 10 m altitude; one victim per slot offset by
    (-1)^t * 8000 m in y (t 1-based); 12/8/8/30 dBi gains; path loss
    116.7 dB at 2600 m reference with decade slope 15 dB and 0.1 dB shadowing.

    Keyword overrides (p_max_dbm, i0_dbm, e0_j, rician_k) adjust the default
    limits of 40 dBm, -55 dBm, 4000 J and K=31.3.
    """
    t = 10
    xs = np.linspace(5.0e4, 6.8e4, t)
    user_track = np.column_stack([xs, np.zeros(t), np.full(t, 10.0)])
    victim_tracks = []
    for idx in range(t):
        slot = idx + 1  # 1-based slot number sets the offset sign
        offset = (-1.0) ** slot * 8000.0
        victim_tracks.append(user_track[idx] + np.array([0.0, offset, 0.0]))
    gains = Gains(
        tbs=dbi_to_linear(12.0),
        uav=dbi_to_linear(8.0),
        uav_user=dbi_to_linear(8.0),
        sat_user=dbi_to_linear(30.0),
    )
    pathloss = Pathloss(a0_db=116.7, exponent=1.5, d0=2600.0, shadow_sigma_db=0.1)
    limits = Limits(
        v_min=10.0,
        v_max=60.0,
        a_max=10.0,
        z_min=2600.0,
        z_max=5000.0,
        p_max=dbm_to_watts(limit_overrides.get("p_max_dbm", 40.0)),
        e0=float(limit_overrides.get("e0_j", 4000.0)),
        i0=dbm_to_watts(limit_overrides.get("i0_dbm", -55.0)),
        p_s=dbm_to_watts(40.0),
    )
    return make_scenario(
        tbs_position=[0.0, 0.0, 100.0],
        user_track=user_track,
        victim_tracks=[v.reshape(1, 3) for v in victim_tracks],
        dt=dt,
        gains=gains,
        noise_power=dbm_to_watts(-107.0),
        rician_k=float(limit_overrides.get("rician_k", 31.3)),
        pathloss=pathloss,
        limits=limits,
        seed=seed,
    )
