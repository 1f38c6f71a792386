"""Coupled steering-wheel / driver-arm dynamics.

The driver grips the wheel rigidly, so arm and wheel share one angle and the
two torque balances

    I_str * acc + b_str * rate = tau_c + tau_das + tau_v
    I_dr  * acc + b_dr  * rate = tau_msl - tau_c

collapse into a single second-order ODE in the wheel angle. The ODE is
integrated with classical fixed-step RK4 and the hand/wheel contact torque
tau_c is then recovered algebraically from the arm balance. The torque fed
back from the road, tau_v, is a linear self-aligning torque -k_sat * angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MAX_STEP = 5e-3  # s; torques are held constant over a step, keep steps short


@dataclass(frozen=True)
class SteeringParams:
    """Steering mechanism seen from the wheel axis."""

    inertia: float = 0.12        # kg m^2
    damping: float = 0.25        # N m s/rad
    sat_stiffness: float = 5.0   # N m/rad of restoring torque at fixed speed
    steering_ratio: float = 16.0  # wheel angle per front-wheel angle

    def __post_init__(self) -> None:
        if not self.inertia > 0:
            raise ValueError("steering inertia must be positive")
        if self.damping < 0 or self.sat_stiffness < 0:
            raise ValueError("steering damping and SAT stiffness must be >= 0")
        if not self.steering_ratio > 0:
            raise ValueError("steering ratio must be positive")


@dataclass(frozen=True)
class ArmParams:
    """Driver arm reduced to one rotational DOF about the wheel axis."""

    inertia: float = 0.05   # kg m^2
    damping: float = 0.30   # N m s/rad

    def __post_init__(self) -> None:
        if not self.inertia > 0:
            raise ValueError("arm inertia must be positive")
        if self.damping < 0:
            raise ValueError("arm damping must be >= 0")


@dataclass
class SteeringState:
    """Wheel angle/rate plus the torques observable at the wheel."""

    angle: float = 0.0             # rad
    angular_velocity: float = 0.0  # rad/s
    contact_torque: float = 0.0    # N m, exerted by the hand on the wheel
    vehicle_torque: float = 0.0    # N m, self-aligning torque from the road


def self_aligning_torque(state: SteeringState, params: SteeringParams) -> float:
    """Restoring torque -k_sat * angle; opposes the wheel deflection."""
    if not math.isfinite(state.angle):
        raise ValueError("non-finite steering angle")
    return -params.sat_stiffness * state.angle


def angular_acceleration(
    angle: float,
    angular_velocity: float,
    muscle_torque: float,
    das_torque: float,
    steering: SteeringParams,
    arm: ArmParams,
) -> float:
    """Wheel acceleration of the rigidly coupled wheel+arm body."""
    tau_v = -steering.sat_stiffness * angle
    inertia = steering.inertia + arm.inertia
    damping = steering.damping + arm.damping
    return (muscle_torque + das_torque + tau_v - damping * angular_velocity) / inertia


def contact_torque(
    state: SteeringState,
    muscle_torque: float,
    das_torque: float,
    steering: SteeringParams,
    arm: ArmParams,
) -> float:
    """Hand torque consistent with the arm balance at the given state."""
    acc = angular_acceleration(
        state.angle, state.angular_velocity, muscle_torque, das_torque, steering, arm
    )
    return muscle_torque - arm.inertia * acc - arm.damping * state.angular_velocity


def step_coupled(
    state: SteeringState,
    muscle_torque: float,
    das_torque: float,
    steering: SteeringParams,
    arm: ArmParams,
    dt: float,
) -> tuple[SteeringState, float]:
    """Advance the coupled wheel+arm by one RK4 step, torques held constant.

    Returns the new state and the contact torque at the new state.
    """
    if not 0.0 < dt <= MAX_STEP:
        raise ValueError(f"dt must be in (0, {MAX_STEP}] s, got {dt}")
    if not (
        math.isfinite(state.angle)
        and math.isfinite(state.angular_velocity)
        and math.isfinite(muscle_torque)
        and math.isfinite(das_torque)
    ):
        raise ValueError("non-finite steering step input")

    inertia = steering.inertia + arm.inertia
    damping = steering.damping + arm.damping
    k_sat = steering.sat_stiffness
    u = muscle_torque + das_torque

    th = state.angle
    w = state.angular_velocity

    # RK4, hand-unrolled: this runs once per millisecond of simulated time.
    k1_th = w
    k1_w = (u - k_sat * th - damping * w) / inertia
    th2 = th + 0.5 * dt * k1_th
    w2 = w + 0.5 * dt * k1_w
    k2_th = w2
    k2_w = (u - k_sat * th2 - damping * w2) / inertia
    th3 = th + 0.5 * dt * k2_th
    w3 = w + 0.5 * dt * k2_w
    k3_th = w3
    k3_w = (u - k_sat * th3 - damping * w3) / inertia
    th4 = th + dt * k3_th
    w4 = w + dt * k3_w
    k4_th = w4
    k4_w = (u - k_sat * th4 - damping * w4) / inertia

    new_angle = th + dt / 6.0 * (k1_th + 2.0 * k2_th + 2.0 * k3_th + k4_th)
    new_rate = w + dt / 6.0 * (k1_w + 2.0 * k2_w + 2.0 * k3_w + k4_w)

    acc = (u - k_sat * new_angle - damping * new_rate) / inertia
    tau_c = muscle_torque - arm.inertia * acc - arm.damping * new_rate

    new_state = SteeringState(
        angle=new_angle,
        angular_velocity=new_rate,
        contact_torque=tau_c,
        vehicle_torque=-k_sat * new_angle,
    )
    return new_state, tau_c


def equation_residuals(
    state: SteeringState,
    muscle_torque: float,
    das_torque: float,
    steering: SteeringParams,
    arm: ArmParams,
) -> tuple[float, float]:
    """Residuals of the wheel and arm torque balances at the given state.

    Uses the integrator's own acceleration, i.e. the acceleration implied by
    the state and the applied torques. Both residuals are zero up to float
    round-off when the state comes from :func:`step_coupled`.
    """
    acc = angular_acceleration(
        state.angle, state.angular_velocity, muscle_torque, das_torque, steering, arm
    )
    r_wheel = (
        steering.inertia * acc
        + steering.damping * state.angular_velocity
        - (state.contact_torque + das_torque + state.vehicle_torque)
    )
    r_arm = (
        arm.inertia * acc
        + arm.damping * state.angular_velocity
        - (muscle_torque - state.contact_torque)
    )
    return r_wheel, r_arm
