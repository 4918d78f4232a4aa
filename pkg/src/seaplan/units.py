"""Decibel/linear conversions. All internal math is linear watts/meters; dB appears only at I/O boundaries."""

from __future__ import annotations


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    import math

    if x <= 0.0:
        raise ValueError(f"cannot convert nonpositive value {x} to dB")
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    return linear_to_db(x_w) + 30.0


def dbi_to_linear(x_dbi: float) -> float:
    return db_to_linear(x_dbi)
