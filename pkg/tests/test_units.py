import math

import pytest
from hypothesis import given, strategies as st

from seaplan.units import (
    db_to_linear,
    dbi_to_linear,
    dbm_to_watts,
    linear_to_db,
    watts_to_dbm,
)


def test_known_points():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(10.0) == 10.0
    assert dbm_to_watts(30.0) == 1.0
    assert dbm_to_watts(0.0) == 1e-3
    assert watts_to_dbm(1.0) == 30.0
    assert dbi_to_linear(3.0) == pytest.approx(10 ** 0.3)


def test_nonpositive_rejected():
    with pytest.raises(ValueError):
        linear_to_db(0.0)
    with pytest.raises(ValueError):
        watts_to_dbm(-1.0)


@given(st.floats(min_value=-300.0, max_value=300.0))
def test_db_round_trip(x_db):
    assert linear_to_db(db_to_linear(x_db)) == pytest.approx(x_db, abs=1e-9)


@given(st.floats(min_value=-200.0, max_value=100.0))
def test_dbm_round_trip(x_dbm):
    assert watts_to_dbm(dbm_to_watts(x_dbm)) == pytest.approx(x_dbm, abs=1e-9)


@given(st.floats(min_value=1e-20, max_value=1e20))
def test_linear_round_trip(x):
    assert db_to_linear(linear_to_db(x)) == pytest.approx(x, rel=1e-12)


def test_decade_slope():
    # 15 dB per decade at exponent 1.5: the dB map is exactly logarithmic
    assert linear_to_db(1000.0) - linear_to_db(100.0) == pytest.approx(10.0)
    assert math.isclose(db_to_linear(15.0), 10 ** 1.5)
