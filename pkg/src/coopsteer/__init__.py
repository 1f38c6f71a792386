"""Closed-loop driving simulation of a torque-sharing lane-keeping assist.

A synthetic driver and an assist controller both apply torque to one steering
wheel. The assist estimates who is driving the vehicle's lateral motion (and
whether the two agents agree) from windowed torque*lateral-velocity products,
lowers its gain when the driver fights it, and hands the target lane over when
a lane-change intent is detected. A time-to-line-crossing variant and a
no-assist condition are included for comparison, plus scenario traffic,
per-run metrics, a CLI harness and a real-time serve mode.
"""

from coopsteer.steering import ArmParams, SteeringParams, SteeringState, step_coupled
from coopsteer.vehicle import VehicleParams, VehicleState, step_vehicle
from coopsteer.shared_control import (
    AssistState,
    CooperativeStatus,
    GainParams,
    PseudoWorkEstimate,
    StatusThresholds,
    classify,
    das_gain,
    das_torque,
    detect_intent,
    pseudo_power,
    switch_lane,
    time_to_line_crossing,
    update_assist,
)
from coopsteer.driver import DriverIntent, DriverParams, decide_lane, driver_muscle_torque
from coopsteer.scenario import OtherVehicle, RoadSpec, ScenarioSpec, build_scenario, step_traffic, visible_vehicles
from coopsteer.metrics import MetricsReport, Region, compute_report, segment_regions
from coopsteer.config import RunConfig
from coopsteer.harness import Simulation, batch, run_experiment

__all__ = [
    "ArmParams",
    "AssistState",
    "CooperativeStatus",
    "DriverIntent",
    "DriverParams",
    "GainParams",
    "MetricsReport",
    "OtherVehicle",
    "PseudoWorkEstimate",
    "Region",
    "RoadSpec",
    "RunConfig",
    "ScenarioSpec",
    "Simulation",
    "StatusThresholds",
    "SteeringParams",
    "SteeringState",
    "VehicleParams",
    "VehicleState",
    "batch",
    "build_scenario",
    "classify",
    "compute_report",
    "das_gain",
    "das_torque",
    "decide_lane",
    "detect_intent",
    "driver_muscle_torque",
    "pseudo_power",
    "run_experiment",
    "segment_regions",
    "step_coupled",
    "step_traffic",
    "step_vehicle",
    "switch_lane",
    "time_to_line_crossing",
    "update_assist",
]

__version__ = "0.1.0"
