import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from seaplan import channel
from seaplan.channel import (
    LinkGain,
    average_snr,
    bessel_i0,
    bessel_i0e,
    ergodic_rate,
    ergodic_rate_derivative,
    ergodic_rate_second_derivative,
    link_coefficient,
    path_loss_db,
    rician_power_pdf,
    slot_gains,
)


# ---------------------------------------------------------------------------
# Bessel


@given(st.floats(min_value=-500.0, max_value=500.0))
def test_bessel_i0e_matches_scipy(x):
    assert bessel_i0e(x) == pytest.approx(float(special.i0e(x)), rel=1e-13)


def test_bessel_i0_small_args():
    for x in (0.0, 1e-8, 0.5, 1.0, 5.0):
        assert bessel_i0(x) == pytest.approx(float(special.i0(x)), rel=1e-13)
    assert bessel_i0(0.0) == 1.0


def test_bessel_regime_boundary():
    for x in (29.999, 30.0, 30.001):
        assert bessel_i0e(x) == pytest.approx(float(special.i0e(x)), rel=1e-12)


# ---------------------------------------------------------------------------
# Path loss and link coefficients


def test_path_loss_reference_distance(canned):
    # at the reference distance the loss is exactly the intercept
    assert path_loss_db(2600.0, 0.0, canned.pathloss) == pytest.approx(116.7)


def test_path_loss_decade_slope(canned):
    base = path_loss_db(2600.0, 0.0, canned.pathloss)
    up = path_loss_db(26000.0, 0.0, canned.pathloss)
    assert up - base == pytest.approx(15.0)  # 10 * exponent dB per decade


def test_path_loss_shadowing_additive(canned):
    assert (
        path_loss_db(5000.0, 2.5, canned.pathloss)
        - path_loss_db(5000.0, 0.0, canned.pathloss)
    ) == pytest.approx(2.5)


def test_path_loss_rejects_nonpositive_distance(canned):
    with pytest.raises(ValueError):
        path_loss_db(0.0, 0.0, canned.pathloss)


def test_link_coefficient_hand_derivation(canned):
    # independent digit-by-digit rebuild of the distance-free SNR coefficient
    g = canned.gains
    x_db = float(canned.shadow_realization.user[0])
    expected = (
        g.uav
        * g.uav_user
        * 2600.0 ** 1.5
        / canned.noise_power
        * 10.0 ** (-(116.7 + x_db) / 10.0)
    )
    got = link_coefficient(canned, g.uav, g.uav_user, x_db)
    assert got.b == pytest.approx(expected, rel=1e-14)


def test_link_coefficient_noise_proportionality(canned):
    g = link_coefficient(canned, 1.0, 1.0, 0.0)
    # doubling the noise power halves the coefficient (frozen field arithmetic)
    assert g.b * canned.noise_power == pytest.approx(
        2600.0 ** 1.5 * 10.0 ** (-116.7 / 10.0), rel=1e-14
    )


def test_slot_gains_frozen_values(canned):
    # [DERIVED] slot-1 coefficients for the canned instance at seed 0
    g = slot_gains(canned)
    assert g.user[0] == pytest.approx(563900811.7216918, rel=1e-12)
    assert g.tbs[0] == pytest.approx(1441095515.065416, rel=1e-12)
    assert g.victims[0][0] == pytest.approx(89897035122.97232, rel=1e-12)


def test_slot_gains_cached(canned):
    assert slot_gains(canned) is slot_gains(canned)


def test_link_gain_validation():
    with pytest.raises(ValueError):
        LinkGain(b=0.0, link_kind="uav_user", slot=0, exponent=1.5)


def test_average_snr_formula(canned):
    gain = link_coefficient(canned, 1.0, 1.0, 0.0)
    snr = average_snr(2.0, gain, [0.0, 0.0, 1000.0], [0.0, 0.0, 0.0])
    assert snr == pytest.approx(2.0 * gain.b * 1000.0 ** -1.5, rel=1e-14)
    with pytest.raises(ValueError):
        average_snr(-1.0, gain, [0, 0, 1], [0, 0, 0])
    with pytest.raises(ValueError):
        average_snr(1.0, gain, [0, 0, 1], [0, 0, 1])


def test_average_snr_path_loss_consistency(canned):
    # coefficient route and explicit dB route must agree exactly
    gain = link_coefficient(canned, canned.gains.uav, canned.gains.uav_user, 0.3)
    d = 12_000.0
    p = 4.0
    loss_db = path_loss_db(d, 0.3, canned.pathloss)
    explicit = (
        p * canned.gains.uav * canned.gains.uav_user
        * 10.0 ** (-loss_db / 10.0) / canned.noise_power
    )
    direct = average_snr(p, gain, [d, 0.0, 0.0], [0.0, 0.0, 0.0])
    assert direct == pytest.approx(explicit, rel=1e-12)


def test_average_snr_fading_mean(rng):
    # unit-mean fading: Monte Carlo instantaneous SNR averages to the formula
    gain = LinkGain(b=5.0e8, link_kind="uav_user", slot=0, exponent=1.5)
    a = average_snr(2.0, gain, [9000.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    k = 31.3
    g = rng.standard_normal(10 ** 6) + 1j * rng.standard_normal(10 ** 6)
    h = math.sqrt(k / (1 + k)) + math.sqrt(1 / (2 * (1 + k))) * g
    mc = a * float(np.mean(np.abs(h) ** 2))
    assert mc == pytest.approx(a, rel=5e-3)


# ---------------------------------------------------------------------------
# Rician statistics


@pytest.mark.parametrize("k", [0.0, 1.0, 10.0, 30.0, 31.3])
def test_pdf_normalizes(k):
    total, err = integrate.quad(
        lambda g: rician_power_pdf(g, k), 0.0, channel._gamma_max(k), limit=200
    )
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", [0.0, 1.0, 10.0, 31.3])
def test_pdf_unit_mean(k):
    mean, err = integrate.quad(
        lambda g: g * rician_power_pdf(g, k), 0.0, channel._gamma_max(k), limit=200
    )
    assert mean == pytest.approx(1.0, abs=1e-8)


def test_pdf_rayleigh_special_case():
    # K = 0 collapses to the unit-mean exponential density
    for g in (0.0, 0.3, 1.0, 4.0):
        assert rician_power_pdf(g, 0.0) == pytest.approx(math.exp(-g), rel=1e-13)


def test_pdf_rejects_bad_args():
    with pytest.raises(ValueError):
        rician_power_pdf(-0.1, 1.0)
    with pytest.raises(ValueError):
        rician_power_pdf(0.1, -1.0)


# ---------------------------------------------------------------------------
# Ergodic rate


def test_rate_trivial_points():
    assert ergodic_rate(0.0, 31.3) == 0.0
    assert ergodic_rate(1.0, 31.3) > 0.0
    with pytest.raises(ValueError):
        ergodic_rate(-1.0, 31.3)


def test_rate_rayleigh_closed_form():
    # [DERIVED] K = 0 has the closed form log2(e) * exp(1/a) * E1(1/a)
    for a in (0.5, 3.0, 50.0, 1000.0):
        exact = channel.LOG2E * math.exp(1.0 / a) * float(special.exp1(1.0 / a))
        assert ergodic_rate(a, 0.0) == pytest.approx(exact, rel=1e-12)


def test_rate_jensen_upper_bound():
    # concavity of log: E[log2(1 + a g)] <= log2(1 + a E[g]) = log2(1 + a)
    for a, k in ((0.5, 0.0), (10.0, 5.0), (200.0, 31.3)):
        assert ergodic_rate(a, k) < math.log2(1.0 + a)


def test_rate_large_k_approaches_awgn():
    # huge LOS factor: fading vanishes, rate tends to log2(1 + a)
    assert ergodic_rate(100.0, 1e6) == pytest.approx(math.log2(101.0), abs=1e-3)


def test_rate_increasing_in_k_at_high_snr():
    # less fading helps once the SNR is in the log region
    assert ergodic_rate(100.0, 31.3) > ergodic_rate(100.0, 0.0)


def test_rate_regression_values():
    # [DERIVED] pinned quadrature outputs
    assert ergodic_rate(100.0, 31.3) == pytest.approx(6.613794337954709, rel=1e-10)
    assert ergodic_rate(10.0, 10.0) == pytest.approx(3.3503375040947234, rel=1e-10)
    assert ergodic_rate(1.0, 1.0) == pytest.approx(0.8856707729949667, rel=1e-10)


def test_derivatives_match_finite_differences():
    for a, k in ((0.7, 0.0), (20.0, 10.0), (300.0, 31.3)):
        h = 1e-4 * a
        central = (ergodic_rate(a + h, k) - ergodic_rate(a - h, k)) / (2 * h)
        assert ergodic_rate_derivative(a, k) == pytest.approx(central, rel=1e-6)
        central2 = (
            ergodic_rate(a + h, k) - 2 * ergodic_rate(a, k) + ergodic_rate(a - h, k)
        ) / h ** 2
        assert ergodic_rate_second_derivative(a, k) == pytest.approx(central2, rel=1e-4)


def test_second_derivative_negative():
    for a, k in ((0.1, 0.0), (5.0, 31.3), (1e3, 10.0)):
        assert ergodic_rate_second_derivative(a, k) < 0.0


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=1e-2, max_value=1e4),
    st.floats(min_value=0.0, max_value=50.0),
)
def test_rate_bounded_and_positive(a, k):
    r = ergodic_rate(a, k)
    assert 0.0 < r <= math.log2(1.0 + a) + 1e-12
