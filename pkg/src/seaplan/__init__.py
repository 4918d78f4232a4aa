"""Offline planner for UAV-aided maritime coverage: joint 3-D trajectory and
transmit-power optimization under interference-temperature, backhaul,
kinematic, altitude, peak-power and energy constraints, driven by large-scale
channel state only."""

from .scenario import (
    FlightPlan,
    Scenario,
    ScenarioError,
    load_scenario,
    make_scenario,
    canned_scenario,
    save_scenario,
)
from .sca_driver import IterationTrace, audit_plan, default_initializations, plan

__all__ = [
    "FlightPlan",
    "IterationTrace",
    "Scenario",
    "ScenarioError",
    "audit_plan",
    "default_initializations",
    "load_scenario",
    "make_scenario",
    "canned_scenario",
    "plan",
    "save_scenario",
]

__version__ = "0.1.0"
