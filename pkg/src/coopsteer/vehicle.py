"""Constant-speed linear bicycle model for lateral motion on a straight road.

Sign convention used across the whole package: the road-frame lateral
coordinate y grows to the RIGHT. The left lane is centred at y = 0, the right
lane at y = +3 m, the shared lane marker at y = +1.5 m. A positive steering
wheel angle steers right, giving a positive yaw rate, positive heading and
positive lateral velocity.

The lateral states are the body-frame lateral velocity and the yaw rate of
the classic two-state bicycle model; heading and lateral position follow
through full (non-small-angle) kinematics. Longitudinal speed is fixed for a
run and the station simply advances by speed * dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

KMH = 1.0 / 3.6  # km/h -> m/s


@dataclass(frozen=True)
class VehicleParams:
    mass: float = 1830.0                      # kg
    yaw_inertia: float = 3500.0               # kg m^2
    dist_front: float = 1.40                  # m, CG to front axle
    dist_rear: float = 1.65                   # m, CG to rear axle
    cornering_stiffness_front: float = 80000.0  # N/rad
    cornering_stiffness_rear: float = 80000.0   # N/rad
    speed: float = 60.0 * KMH                 # m/s, fixed during a run

    def __post_init__(self) -> None:
        for name in (
            "mass",
            "yaw_inertia",
            "dist_front",
            "dist_rear",
            "cornering_stiffness_front",
            "cornering_stiffness_rear",
            "speed",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"vehicle parameter {name} must be positive")
        # The two-state lateral subsystem must be stable at the run speed:
        # for a 2x2 system that is trace < 0 (always true here) and det > 0.
        tr, det = _lateral_trace_det(self)
        if not (tr < 0 and det > 0):
            raise ValueError(
                "vehicle parameters are laterally unstable at "
                f"{self.speed:.2f} m/s (trace={tr:.4g}, det={det:.4g})"
            )

    @property
    def wheelbase(self) -> float:
        return self.dist_front + self.dist_rear


@dataclass
class VehicleState:
    lateral_position: float = 0.0   # m, road frame, + to the right
    lateral_velocity: float = 0.0   # m/s, road frame (dy/dt)
    heading: float = 0.0            # rad, vehicle heading relative to the road
    yaw_rate: float = 0.0           # rad/s
    station: float = 0.0            # m, longitudinal distance travelled
    body_lateral_velocity: float = 0.0  # m/s, lateral velocity in the body frame


@lru_cache(maxsize=8)
def _bicycle_coefficients(params: VehicleParams) -> tuple[float, float, float, float, float, float]:
    """State matrix entries of the two-state (body v_y, yaw rate) model."""
    m = params.mass
    iz = params.yaw_inertia
    a = params.dist_front
    b = params.dist_rear
    cf = params.cornering_stiffness_front
    cr = params.cornering_stiffness_rear
    v = params.speed
    a11 = -(cf + cr) / (m * v)
    a12 = -v + (cr * b - cf * a) / (m * v)
    a21 = (cr * b - cf * a) / (iz * v)
    a22 = -(cf * a * a + cr * b * b) / (iz * v)
    b1 = cf / m
    b2 = cf * a / iz
    return a11, a12, a21, a22, b1, b2


def _lateral_trace_det(params: VehicleParams) -> tuple[float, float]:
    a11, a12, a21, a22, _, _ = _bicycle_coefficients(params)
    return a11 + a22, a11 * a22 - a12 * a21


def step_vehicle(
    state: VehicleState,
    steering_wheel_angle: float,
    params: VehicleParams,
    steering_ratio: float,
    dt: float,
) -> VehicleState:
    """Advance the vehicle by one RK4 step with the wheel angle held constant."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not math.isfinite(steering_wheel_angle) or abs(steering_wheel_angle) >= math.pi:
        raise ValueError(f"steering wheel angle out of range: {steering_wheel_angle}")
    if not (
        math.isfinite(state.lateral_position)
        and math.isfinite(state.heading)
        and math.isfinite(state.body_lateral_velocity)
        and math.isfinite(state.yaw_rate)
    ):
        raise ValueError("non-finite vehicle state")

    a11, a12, a21, a22, b1, b2 = _bicycle_coefficients(params)
    v = params.speed
    delta = steering_wheel_angle / steering_ratio

    y = state.lateral_position
    psi = state.heading
    vy = state.body_lateral_velocity
    r = state.yaw_rate

    # RK4 on (y, heading, body v_y, yaw rate); runs once per millisecond.
    k1_y = v * math.sin(psi) + vy * math.cos(psi)
    k1_p = r
    k1_v = a11 * vy + a12 * r + b1 * delta
    k1_r = a21 * vy + a22 * r + b2 * delta

    y2 = y + 0.5 * dt * k1_y
    p2 = psi + 0.5 * dt * k1_p
    v2 = vy + 0.5 * dt * k1_v
    r2 = r + 0.5 * dt * k1_r
    k2_y = v * math.sin(p2) + v2 * math.cos(p2)
    k2_p = r2
    k2_v = a11 * v2 + a12 * r2 + b1 * delta
    k2_r = a21 * v2 + a22 * r2 + b2 * delta

    p3 = psi + 0.5 * dt * k2_p
    v3 = vy + 0.5 * dt * k2_v
    r3 = r + 0.5 * dt * k2_r
    k3_y = v * math.sin(p3) + v3 * math.cos(p3)
    k3_p = r3
    k3_v = a11 * v3 + a12 * r3 + b1 * delta
    k3_r = a21 * v3 + a22 * r3 + b2 * delta

    p4 = psi + dt * k3_p
    v4 = vy + dt * k3_v
    r4 = r + dt * k3_r
    k4_y = v * math.sin(p4) + v4 * math.cos(p4)
    k4_p = r4
    k4_v = a11 * v4 + a12 * r4 + b1 * delta
    k4_r = a21 * v4 + a22 * r4 + b2 * delta

    new_y = y + dt / 6.0 * (k1_y + 2.0 * k2_y + 2.0 * k3_y + k4_y)
    new_psi = psi + dt / 6.0 * (k1_p + 2.0 * k2_p + 2.0 * k3_p + k4_p)
    new_vy = vy + dt / 6.0 * (k1_v + 2.0 * k2_v + 2.0 * k3_v + k4_v)
    new_r = r + dt / 6.0 * (k1_r + 2.0 * k2_r + 2.0 * k3_r + k4_r)

    return VehicleState(
        lateral_position=new_y,
        lateral_velocity=v * math.sin(new_psi) + new_vy * math.cos(new_psi),
        heading=new_psi,
        yaw_rate=new_r,
        station=state.station + v * dt,
        body_lateral_velocity=new_vy,
    )


def lateral_eigenvalues(params: VehicleParams) -> tuple[complex, complex]:
    """Eigenvalues of the two-state lateral subsystem (for diagnostics)."""
    tr, det = _lateral_trace_det(params)
    disc = tr * tr - 4.0 * det
    root = math.sqrt(abs(disc))
    if disc >= 0:
        return ((tr + root) / 2.0 + 0j, (tr - root) / 2.0 + 0j)
    return (complex(tr / 2.0, root / 2.0), complex(tr / 2.0, -root / 2.0))
