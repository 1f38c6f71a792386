"""Cooperative-status estimation and the adaptive lane-keeping torque assist.

The assist watches three "pseudo-power" signals, each the product of a torque
acting on the steering system and the vehicle's lateral velocity: positive
when that torque pushes the vehicle the way it is already moving. Trailing
window means of these (the "pseudo-work" values) classify the interaction
into five states along two axes, who holds the initiative (driver vs system)
and whether the two agents agree:

    I      driver-led, cooperative
    II     driver-led, uncooperative (driver resisting the assist)
    III-a  system-led, driver guided along
    III-b  system-led, driver resisting
    IV     passive, no active operation

In state II the assist's gain is lowered along a sigmoid in its own work
contribution; once the smoothed gain falls under a fraction of the base gain
the driver's lane-change intent is declared and the target lane center jumps
to the adjacent lane. A time-to-line-crossing variant switches lanes from the
vehicle's motion alone, and a no-assist condition outputs zero torque while
still logging the classification.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

# Assist condition identifiers (config values).
NO_SYSTEM = "no_system"
GAIN_TUNED = "gain_tuned"
TLC = "tlc"
CONDITIONS = (NO_SYSTEM, GAIN_TUNED, TLC)


class CooperativeStatus(Enum):
    DRIVER_LED_COOPERATIVE = "I"
    DRIVER_LED_UNCOOPERATIVE = "II"
    SYSTEM_LED_COOPERATIVE = "III-a"
    SYSTEM_LED_UNCOOPERATIVE = "III-b"
    PASSIVE = "IV"

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class StatusThresholds:
    """Work offsets tolerated below zero before an agent counts as opposed.

    driver_margin guards the initiative test (driver holds initiative while
    work_c >= -driver_margin), das_margin guards the consistency test
    (intents agree while work_das >= -das_margin). Both inclusive.
    """

    driver_margin: float = 0.2  # N m m/s
    das_margin: float = 0.1     # N m m/s

    def __post_init__(self) -> None:
        if self.driver_margin < 0 or self.das_margin < 0:
            raise ValueError("status thresholds must be >= 0")


@dataclass(frozen=True)
class GainParams:
    """Sigmoid gain reduction used while the driver resists the assist."""

    k0: float = 0.5             # N m per m of preview error, base gain
    slope: float = 10.0         # sigmoid steepness over work_das
    offset: float = 0.4         # sigmoid shift
    intent_fraction: float = 0.3  # lane-change intent when gain <= fraction * k0
    smoothing_time: float = 0.2   # s, first-order lag on the gain; 0 disables

    def __post_init__(self) -> None:
        if not self.k0 > 0:
            raise ValueError("base gain k0 must be positive")
        if not self.slope > 0:
            raise ValueError("gain slope must be positive")
        if not 0.0 < self.intent_fraction < 1.0:
            raise ValueError("intent_fraction must be in (0, 1)")
        if self.smoothing_time < 0:
            raise ValueError("smoothing_time must be >= 0")


class PseudoWorkEstimate:
    """Trailing-window means of the three pseudo-power signals.

    Each work value is the exact integral of the piecewise-linear interpolant
    of the samples (trapezoid rule) over the trailing ``window_length``
    seconds, divided by ``window_length``. Before one full window has elapsed
    the integral runs from the first sample but is still divided by the full
    window length, so the estimates ramp up from zero.
    """

    __slots__ = ("window_length", "_samples", "_areas", "_sum_c", "_sum_das",
                 "_sum_msl", "work_c", "work_das", "work_msl")

    def __init__(self, window_length: float = 1.0):
        if not window_length > 0:
            raise ValueError("window_length must be positive")
        self.window_length = window_length
        self._samples: deque[tuple[float, float, float, float]] = deque()
        # _areas[k] = trapezoid area of the segment ending at sample k,
        # (0, 0, 0) for the first retained sample.
        self._areas: deque[tuple[float, float, float]] = deque()
        self._sum_c = 0.0
        self._sum_das = 0.0
        self._sum_msl = 0.0
        self.work_c = 0.0
        self.work_das = 0.0
        self.work_msl = 0.0

    @property
    def power_history(self) -> list[tuple[float, float, float, float]]:
        """Retained (time, p_c, p_das, p_msl) samples, oldest first."""
        return list(self._samples)

    def update(self, p_c: float, p_das: float, p_msl: float, time: float) -> None:
        """Append a power sample and refresh the windowed means."""
        if not (math.isfinite(p_c) and math.isfinite(p_das) and math.isfinite(p_msl)
                and math.isfinite(time)):
            raise ValueError("non-finite work window sample")
        if self._samples and time <= self._samples[-1][0]:
            raise ValueError(
                f"sample times must be strictly increasing, got {time} after "
                f"{self._samples[-1][0]}"
            )

        if self._samples:
            t_prev, c_prev, d_prev, m_prev = self._samples[-1]
            half = 0.5 * (time - t_prev)
            area = ((p_c + c_prev) * half, (p_das + d_prev) * half, (p_msl + m_prev) * half)
            self._sum_c += area[0]
            self._sum_das += area[1]
            self._sum_msl += area[2]
        else:
            area = (0.0, 0.0, 0.0)
        self._samples.append((time, p_c, p_das, p_msl))
        self._areas.append(area)

        boundary = time - self.window_length
        # Drop whole segments that lie entirely before the window. Keep one
        # sample at or before the boundary so the boundary value can be
        # interpolated.
        while len(self._samples) >= 2 and self._samples[1][0] <= boundary:
            self._samples.popleft()
            self._areas.popleft()
            dropped = self._areas[0]
            self._sum_c -= dropped[0]
            self._sum_das -= dropped[1]
            self._sum_msl -= dropped[2]
            self._areas[0] = (0.0, 0.0, 0.0)

        int_c, int_das, int_msl = self._sum_c, self._sum_das, self._sum_msl
        t0, c0, d0, m0 = self._samples[0]
        if t0 < boundary and len(self._samples) >= 2:
            # Subtract the part of the first segment that sticks out of the
            # window (linear interpolation of the power at the boundary).
            t1, c1, d1, m1 = self._samples[1]
            frac = (boundary - t0) / (t1 - t0)
            half = 0.5 * (boundary - t0)
            int_c -= (c0 + (c0 + (c1 - c0) * frac)) * half
            int_das -= (d0 + (d0 + (d1 - d0) * frac)) * half
            int_msl -= (m0 + (m0 + (m1 - m0) * frac)) * half
        self.work_c = int_c / self.window_length
        self.work_das = int_das / self.window_length
        self.work_msl = int_msl / self.window_length


def pseudo_power(torque: float, lateral_velocity: float) -> float:
    """Torque times lateral velocity; positive when they share a sign."""
    if not (math.isfinite(torque) and math.isfinite(lateral_velocity)):
        raise ValueError("non-finite pseudo-power input")
    return torque * lateral_velocity


def classify(
    work_c: float,
    work_das: float,
    work_msl: float,
    thresholds: StatusThresholds,
) -> CooperativeStatus:
    """Map the work triple onto the five cooperative states.

    Both threshold comparisons are inclusive on the driver/agreeing side; the
    III-a/III-b split uses the muscle work, which the simulator knows exactly.
    """
    driver_leads = work_c >= -thresholds.driver_margin
    das_agrees = work_das >= -thresholds.das_margin
    if driver_leads:
        if das_agrees:
            return CooperativeStatus.DRIVER_LED_COOPERATIVE
        return CooperativeStatus.DRIVER_LED_UNCOOPERATIVE
    if das_agrees:
        if work_msl >= 0:
            return CooperativeStatus.SYSTEM_LED_COOPERATIVE
        return CooperativeStatus.SYSTEM_LED_UNCOOPERATIVE
    return CooperativeStatus.PASSIVE


def raw_gain(work_das: float, status: CooperativeStatus, params: GainParams) -> float:
    """Unsmoothed assist gain: sigmoid in work_das during state II, else k0."""
    if status is CooperativeStatus.DRIVER_LED_UNCOOPERATIVE:
        return params.k0 / (1.0 + math.exp(-params.slope * work_das + params.offset))
    return params.k0


def das_gain(
    work_das: float,
    status: CooperativeStatus,
    params: GainParams,
    previous_gain: float,
    dt: float,
) -> float:
    """Assist gain for this control step, optionally lag-smoothed.

    The raw sigmoid jumps when state II is entered or left; a first-order lag
    (time constant ``smoothing_time``) realises the gradual gain traces the
    controller is meant to produce. ``smoothing_time = 0`` returns the raw
    value. The result always stays in (0, k0].
    """
    if not math.isfinite(work_das):
        raise ValueError("non-finite work_das")
    target = raw_gain(work_das, status, params)
    if params.smoothing_time <= 0.0 or dt <= 0.0:
        return target
    decay = math.exp(-dt / params.smoothing_time)
    return target + (previous_gain - target) * decay


def detect_intent(gain: float, params: GainParams) -> bool:
    """Lane-change intent: the (smoothed) gain dipped to a fraction of k0."""
    return gain <= params.intent_fraction * params.k0


def switch_lane(target: float, lateral_velocity: float, lane_width: float) -> float:
    """Move the target lane center one lane toward the current lateral motion.

    The result is clamped to the two valid lane centers {0, lane_width}.
    """
    if lateral_velocity > 0:
        target = target + lane_width
    elif lateral_velocity < 0:
        target = target - lane_width
    return min(max(target, 0.0), lane_width)


def time_to_line_crossing(
    y: float,
    lateral_velocity: float,
    target_lane_center: float,
    lane_width: float = 3.0,
) -> float:
    """Time until the shared lane marker is crossed at the current drift.

    The marker considered is the boundary of the current target lane in the
    direction of motion; only the marker shared by the two lanes can trigger
    a switch, so drifting toward a road edge (or not drifting at all) returns
    +inf.
    """
    if not (math.isfinite(y) and math.isfinite(lateral_velocity)):
        raise ValueError("non-finite TLC input")
    marker = 0.5 * lane_width
    toward_marker = (lateral_velocity > 0 and target_lane_center < marker) or (
        lateral_velocity < 0 and target_lane_center > marker
    )
    if not toward_marker:
        return math.inf
    return -(y - marker) / lateral_velocity


@dataclass
class AssistState:
    """Evolving state of the assist controller for one run."""

    condition: str = GAIN_TUNED
    time_constant: float = 0.15       # s, torque controller lag
    preview_time: float = 1.3         # s
    preview_distance: float = 21.666666666666668  # m, speed * preview_time
    lane_width: float = 3.0           # m
    tlc_threshold: float = 1.5        # s, switch lanes under this TLC
    settle_radius: float = 0.5        # m, re-arm band around the target center
    controller_lag_state: float = 0.0  # N m, also the last output torque
    gain: float = 0.5                 # current (smoothed) gain
    target_lane_center: float = 0.0   # m
    status: CooperativeStatus = CooperativeStatus.DRIVER_LED_COOPERATIVE
    switch_armed: bool = True
    tlc: float = field(default=math.inf)

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown assist condition {self.condition!r}")
        if not self.time_constant > 0:
            raise ValueError("controller time constant must be positive")


def das_torque(
    assist: AssistState,
    heading_term: float,
    lateral_error: float,
    gain: float,
    dt: float,
) -> float:
    """One exact ZOH step of the lag-filtered preview torque controller.

    The controller input is gain * (preview_distance * heading_term +
    lateral_error); the output is that input passed through a first-order lag
    with unity DC gain. The returned torque equals the new lag state. Under
    the no-assist condition the output is always zero.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if assist.condition == NO_SYSTEM:
        return 0.0
    u = gain * (assist.preview_distance * heading_term + lateral_error)
    decay = math.exp(-dt / assist.time_constant)
    return u + (assist.controller_lag_state - u) * decay


def update_assist(
    assist: AssistState,
    vehicle,
    work: PseudoWorkEstimate,
    thresholds: StatusThresholds,
    gain_params: GainParams,
    dt: float,
) -> tuple[AssistState, float]:
    """One control-rate update: classify, tune the gain, maybe switch the
    target lane, then run the torque controller.

    ``vehicle`` needs ``lateral_position``, ``lateral_velocity`` and
    ``heading`` attributes. Returns the new assist state and the torque to
    apply until the next control step. The target lane switches at most once
    per approach: after a switch the trigger re-arms only once the vehicle
    has settled within ``settle_radius`` of the new target center.
    """
    status = classify(work.work_c, work.work_das, work.work_msl, thresholds)
    y = vehicle.lateral_position
    ydot = vehicle.lateral_velocity

    new = replace(assist, status=status)
    # Re-arm only once the vehicle has settled into the new lane AND the
    # interaction is cooperative again; brief resisting episodes during the
    # settle-in (countersteering) must not re-trigger a switch.
    if (
        not assist.switch_armed
        and status is CooperativeStatus.DRIVER_LED_COOPERATIVE
        and abs(y - assist.target_lane_center) < assist.settle_radius
    ):
        new.switch_armed = True

    # TLC toward the current target's shared marker, logged for every
    # condition, acted on only under the TLC condition.
    new.tlc = time_to_line_crossing(y, ydot, assist.target_lane_center, assist.lane_width)

    if assist.condition == GAIN_TUNED:
        new.gain = das_gain(work.work_das, status, gain_params, assist.gain, dt)
        if (
            status is CooperativeStatus.DRIVER_LED_UNCOOPERATIVE
            and new.switch_armed
            and detect_intent(new.gain, gain_params)
        ):
            switched = switch_lane(assist.target_lane_center, ydot, assist.lane_width)
            if switched != assist.target_lane_center:
                new.target_lane_center = switched
                new.switch_armed = False
    elif assist.condition == TLC:
        new.gain = gain_params.k0
        if new.switch_armed and new.tlc < assist.tlc_threshold:
            switched = switch_lane(assist.target_lane_center, ydot, assist.lane_width)
            if switched != assist.target_lane_center:
                new.target_lane_center = switched
                new.switch_armed = False
    else:  # no assist: keep classifying and logging, output nothing
        new.gain = gain_params.k0
        new.controller_lag_state = 0.0
        return new, 0.0

    torque = das_torque(
        new,
        heading_term=-vehicle.heading,
        lateral_error=new.target_lane_center - y,
        gain=new.gain,
        dt=dt,
    )
    new.controller_lag_state = torque
    return new, torque
