"""Synthetic driver: overtaking policy plus a preview/PD steering layer.

The driver stands in for the human participants. The outer layer picks the
lane it wants (cruise in the left lane, overtake slower traffic on the right,
return once clear); the inner layer turns the predicted lateral error into a
desired wheel angle and produces a muscle torque through a PD neuromuscular
loop with saturation and optional Gaussian torque noise.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

from coopsteer.scenario import LEFT_LANE_OCCUPANCY, PerceivedVehicle, RoadSpec
from coopsteer.steering import SteeringState
from coopsteer.vehicle import VehicleState

KEEP_LEFT = "keep_left"
OVERTAKING = "overtaking"
RETURNING = "returning"

RETURN_SETTLE_BAND = 0.3  # m around the left lane center to close a return


@dataclass(frozen=True)
class DriverParams:
    preview_time: float = 1.3        # s
    steering_gain: float = 0.12      # rad of wheel per m of predicted error
    neuro_p: float = 60.0            # N m/rad
    neuro_d: float = 3.0             # N m s/rad
    torque_limit: float = 6.0        # N m
    noise_std: float = 0.0           # N m, Gaussian per control step
    overtake_trigger_gap: float = 40.0  # m
    return_clearance: float = 15.0      # m

    def __post_init__(self) -> None:
        if min(self.preview_time, self.steering_gain, self.neuro_p, self.neuro_d) < 0:
            raise ValueError("driver gains must be >= 0")
        if not self.torque_limit > 0:
            raise ValueError("torque_limit must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")


@dataclass
class DriverIntent:
    target_lane: float = 0.0
    phase: str = KEEP_LEFT


def decide_lane(
    intent: DriverIntent,
    perception: list[PerceivedVehicle],
    vehicle: VehicleState,
    params: DriverParams,
    host_speed: float,
    road: RoadSpec,
) -> DriverIntent:
    """Advance the overtaking policy one step. Deterministic in its inputs.

    keep_left -> overtaking once a slower left-lane vehicle is closer ahead
    than the trigger gap; overtaking -> returning once every visible left-lane
    vehicle trails the host by at least the return clearance; returning ->
    keep_left once the host has settled back near the left lane center.
    """
    left_lane = [p for p in perception if p.lane in LEFT_LANE_OCCUPANCY]
    if intent.phase == KEEP_LEFT:
        blocked = any(
            0.0 < p.gap < params.overtake_trigger_gap and p.speed < host_speed
            for p in left_lane
        )
        if blocked:
            return DriverIntent(target_lane=road.right_center, phase=OVERTAKING)
    elif intent.phase == OVERTAKING:
        cleared = all(p.gap <= -params.return_clearance for p in left_lane)
        if cleared:
            return DriverIntent(target_lane=road.left_center, phase=RETURNING)
    elif intent.phase == RETURNING:
        if abs(vehicle.lateral_position - road.left_center) < RETURN_SETTLE_BAND:
            return DriverIntent(target_lane=road.left_center, phase=KEEP_LEFT)
    else:
        raise ValueError(f"unknown driver phase {intent.phase!r}")
    return replace(intent)


def driver_muscle_torque(
    vehicle: VehicleState,
    steering: SteeringState,
    intent: DriverIntent,
    params: DriverParams,
    host_speed: float,
    rng: random.Random | None = None,
) -> float:
    """Muscle torque for one control step, clamped to the torque limit.

    Desired wheel angle from the previewed lateral error, then a PD loop on
    the wheel angle. With noise_std = 0 the output is a deterministic
    function of the state.
    """
    predicted_error = (
        intent.target_lane - vehicle.lateral_position
        - host_speed * params.preview_time * vehicle.heading
    )
    desired_angle = params.steering_gain * predicted_error
    torque = (
        params.neuro_p * (desired_angle - steering.angle)
        - params.neuro_d * steering.angular_velocity
    )
    if params.noise_std > 0:
        if rng is None:
            raise ValueError("noise_std > 0 requires an rng stream")
        torque += rng.gauss(0.0, params.noise_std)
    if not math.isfinite(torque):
        raise ValueError("non-finite driver torque")
    return max(-params.torque_limit, min(params.torque_limit, torque))
