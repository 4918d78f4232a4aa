"""Composite-channel model: log-distance path loss, per-link large-scale
coefficients, average SNR, and the ergodic achievable rate of a Rician link.

The fading power of a unit-mean Rician channel follows a non-central
chi-square density with two degrees of freedom; the ergodic rate is the
expectation of log2(1 + a*gamma) under that density, evaluated by adaptive
quadrature.  A vectorized Monte Carlo estimator lives in :mod:`seaplan.oracle`
and cross-checks the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

LOG2E = math.log2(math.e)


class QuadratureError(RuntimeError):
    """Raised when the rate quadrature cannot reach the requested tolerance."""


# ---------------------------------------------------------------------------
# Modified Bessel function I0, exponentially scaled.
#
# Two regimes: the ascending power series for moderate arguments (all terms
# positive, no cancellation) and the large-argument asymptotic expansion.
# Both are accurate to ~1e-14 relative over their ranges.

_SERIES_CUTOFF = 30.0


def bessel_i0e(x: float) -> float:
    """exp(-|x|) * I0(x) for real x."""
    x = abs(float(x))
    if x < _SERIES_CUTOFF:
        # ascending series for I0, scaled afterwards
        term = 1.0
        total = 1.0
        q = 0.25 * x * x
        for k in range(1, 200):
            term *= q / (k * k)
            total += term
            if term < total * 1e-17:
                break
        return total * math.exp(-x)
    # asymptotic expansion: I0(x) ~ e^x / sqrt(2 pi x) * sum_k a_k / x^k
    # with a_k = ((2k-1)!!)^2 / (k! 8^k); truncate at the smallest term
    total = 1.0
    term = 1.0
    for k in range(1, 30):
        factor = (2 * k - 1) ** 2 / (8.0 * k * x)
        new_term = term * factor
        if new_term >= term:
            break
        term = new_term
        total += term
        if term < total * 1e-17:
            break
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i0(x: float) -> float:
    """Zeroth-order modified Bessel function of the first kind."""
    return bessel_i0e(x) * math.exp(abs(float(x)))


# ---------------------------------------------------------------------------
# Large-scale model


@dataclass(frozen=True)
class LinkGain:
    """Large-scale coefficient for one transmitter-receiver pair at one slot.

    ``b * distance**(-exponent)`` converts transmit power into average SNR.
    """

    b: float
    link_kind: str              # "uav_user" | "tbs_uav" | "uav_victim"
    slot: int
    exponent: float

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError(f"LinkGain.b must be positive, got {self.b}")


def path_loss_db(d: float, x_db: float, pathloss) -> float:
    """Log-distance path loss in dB at distance ``d`` with shadowing term ``x_db``."""
    if d <= 0:
        raise ValueError(f"path_loss_db: distance must be positive, got {d}")
    return pathloss.a0_db + 10.0 * pathloss.exponent * math.log10(d / pathloss.d0) + x_db


def link_coefficient(scenario, tx_gain: float, rx_gain: float, x_db: float,
                     link_kind: str = "uav_user", slot: int = 0) -> LinkGain:
    """Distance-independent part of the average SNR for one link.

    b = tx_gain * rx_gain * d0^exponent * noise^-1 * 10^(-(A0 + X)/10)
    """
    if tx_gain <= 0 or rx_gain <= 0:
        raise ValueError("link_coefficient: antenna gains must be positive")
    pl = scenario.pathloss
    b = (
        tx_gain
        * rx_gain
        * pl.d0 ** pl.exponent
        / scenario.noise_power
        * 10.0 ** (-(pl.a0_db + x_db) / 10.0)
    )
    return LinkGain(b=b, link_kind=link_kind, slot=slot, exponent=pl.exponent)


def average_snr(p: float, gain: LinkGain, tx_pos, rx_pos) -> float:
    """Average SNR of a link: p * b * ||tx - rx||^(-exponent)."""
    if p < 0:
        raise ValueError(f"average_snr: power must be nonnegative, got {p}")
    d = float(np.linalg.norm(np.asarray(tx_pos, dtype=float) - np.asarray(rx_pos, dtype=float)))
    if d <= 0:
        raise ValueError("average_snr: transmitter and receiver positions coincide")
    return p * gain.b * d ** (-gain.exponent)


@dataclass(frozen=True)
class SlotGains:
    """Per-slot B coefficients for all links of a scenario."""

    user: np.ndarray    # (T,) UAV -> served user
    tbs: np.ndarray     # (T,) TBS -> UAV
    victims: tuple      # per slot, (M_t,) UAV -> victim


_SLOT_GAINS_CACHE: "weakref.WeakKeyDictionary" = None  # created lazily


def slot_gains(scenario) -> SlotGains:
    global _SLOT_GAINS_CACHE
    import weakref

    if _SLOT_GAINS_CACHE is None:
        _SLOT_GAINS_CACHE = weakref.WeakKeyDictionary()
    cached = _SLOT_GAINS_CACHE.get(scenario)
    if cached is not None:
        return cached
    gains = _slot_gains(scenario)
    try:
        _SLOT_GAINS_CACHE[scenario] = gains
    except TypeError:
        pass
    return gains


def _slot_gains(scenario) -> SlotGains:
    sh = scenario.shadow_realization
    g = scenario.gains
    t = scenario.n_slots
    user = np.array([
        link_coefficient(scenario, g.uav, g.uav_user, sh.user[s], "uav_user", s).b
        for s in range(t)
    ])
    tbs = np.array([
        link_coefficient(scenario, g.tbs, g.uav, sh.tbs[s], "tbs_uav", s).b
        for s in range(t)
    ])
    victims = tuple(
        np.array([
            link_coefficient(scenario, g.uav, g.sat_user, x, "uav_victim", s).b
            for x in sh.victims[s]
        ])
        for s in range(t)
    )
    return SlotGains(user=user, tbs=tbs, victims=victims)


# ---------------------------------------------------------------------------
# Small-scale statistics


def rician_power_pdf(gamma: float, k: float) -> float:
    """Density of the squared magnitude of a unit-mean Rician channel.

    (1+K) exp(-K) exp(-(1+K) gamma) I0(2 sqrt(K (1+K) gamma)), written in
    exponentially-scaled form so large K and gamma do not overflow.
    """
    if gamma < 0:
        raise ValueError(f"rician_power_pdf: gamma must be nonnegative, got {gamma}")
    if k < 0:
        raise ValueError(f"rician_power_pdf: Rician factor must be nonnegative, got {k}")
    s = math.sqrt((1.0 + k) * gamma)
    arg = 2.0 * math.sqrt(k) * s
    return (1.0 + k) * math.exp(-((s - math.sqrt(k)) ** 2)) * bessel_i0e(arg)


def _gamma_max(k: float) -> float:
    # tail envelope exp(-(sqrt((1+K) g) - sqrt(K))^2) < 1e-26 beyond this point
    return (math.sqrt(k) + 8.0) ** 2 / (1.0 + k)


def _rate_quadrature(integrand, k: float, tol: float = 1e-10) -> float:
    gmax = _gamma_max(k)
    val, err, info = integrate.quad(integrand, 0.0, gmax, epsabs=tol, epsrel=1e-12,
                                    limit=300, full_output=True)[:3]
    if err > max(1e-8, 1e-8 * abs(val)):
        raise QuadratureError(
            f"rate quadrature did not converge: value {val}, error estimate {err}"
        )
    return val


def ergodic_rate(a: float, k: float) -> float:
    """Ergodic achievable rate in bits/s/Hz at average SNR ``a`` and Rician factor ``k``."""
    if a < 0:
        raise ValueError(f"ergodic_rate: average SNR must be nonnegative, got {a}")
    if a == 0.0:
        return 0.0
    return LOG2E * _rate_quadrature(
        lambda g: math.log1p(a * g) * rician_power_pdf(g, k), k
    )


def ergodic_rate_derivative(a: float, k: float) -> float:
    """First derivative of the ergodic rate with respect to the average SNR."""
    if a < 0:
        raise ValueError("ergodic_rate_derivative: average SNR must be nonnegative")
    return LOG2E * _rate_quadrature(
        lambda g: g / (1.0 + a * g) * rician_power_pdf(g, k), k
    )


def ergodic_rate_second_derivative(a: float, k: float) -> float:
    """Second derivative of the ergodic rate with respect to the average SNR."""
    if a < 0:
        raise ValueError("ergodic_rate_second_derivative: average SNR must be nonnegative")
    return -LOG2E * _rate_quadrature(
        lambda g: g * g / (1.0 + a * g) ** 2 * rician_power_pdf(g, k), k
    )
