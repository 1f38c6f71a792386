"""Trace segmentation and the five per-run evaluation measures.

A lane-change region starts where the contiguous |lateral velocity| >= 0.1
m/s stretch containing a lane-marker crossing begins, and ends at the first
moment after the host enters the destination lane's +/-0.5 m band where the
(low-passed) steering rate stays under 1 deg/s for 0.5 s; if the steering
never quiets (noisy runs) the region is closed 5 s after band entry. Straight
regions are all remaining left-lane stretches; right-lane cruising counts as
neither. Lateral error is pooled over straight regions, the torque and
steering measures over lane-change regions, all time-weighted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, lfilter

from coopsteer.scenario import RoadSpec
from coopsteer.trace import Trace

STRAIGHT = "straight"
LANE_CHANGE = "lane_change"

VEL_START_THRESHOLD = 0.1           # m/s, lane-change region onset
DEST_BAND = 0.5                     # m around the destination lane center
QUIET_RATE = math.radians(1.0)      # rad/s, "steering converged" threshold
QUIET_TIME = 0.5                    # s the rate must stay quiet
REGION_CLOSE_TIMEOUT = 5.0          # s after band entry, fallback close
SRR_DEADBAND = math.radians(0.1)    # rad/s ignored around zero
SRR_FILTER_HZ = 2.0                 # low-pass corner for the steering rate

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class Region:
    kind: str                # straight | lane_change
    start_time: float
    end_time: float
    direction: str = "none"  # left_to_right | right_to_left | none

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


@dataclass
class MetricsReport:
    rms_lateral_error: float | None = None     # m, straight regions
    rms_driver_torque: float | None = None     # N m, lane-change regions
    max_abs_driver_torque: float | None = None  # N m
    srr: float | None = None                   # 1/s, steering reversal rate
    max_abs_steering_angle: float | None = None  # deg
    regions: list[Region] = field(default_factory=list)
    per_region: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rms_lateral_error": self.rms_lateral_error,
            "rms_driver_torque": self.rms_driver_torque,
            "max_abs_driver_torque": self.max_abs_driver_torque,
            "srr": self.srr,
            "max_abs_steering_angle": self.max_abs_steering_angle,
            "regions": [
                {
                    "kind": r.kind,
                    "start_time": r.start_time,
                    "end_time": r.end_time,
                    "direction": r.direction,
                }
                for r in self.regions
            ],
            "per_region": self.per_region,
        }


def _lowpass_rate(rate: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Causal 2nd-order low-pass of the steering rate at SRR_FILTER_HZ."""
    if len(t) < 8:
        return rate
    fs = 1.0 / float(np.median(np.diff(t)))
    if fs <= 4.0 * SRR_FILTER_HZ:
        return rate
    b, a = butter(2, SRR_FILTER_HZ, fs=fs, btype="low")
    return lfilter(b, a, rate)


def segment_regions(trace: Trace, road: RoadSpec | None = None) -> list[Region]:
    """Split a completed run into lane-change and straight regions."""
    road = road or RoadSpec()
    t = trace.array("time")
    y = trace.array("lateral_position")
    ydot = trace.array("lateral_velocity")
    if len(t) < 2:
        return []
    rate = _lowpass_rate(trace.array("wheel_rate"), t)
    marker = road.marker

    quiet = np.abs(rate) < QUIET_RATE
    step = float(np.median(np.diff(t)))
    n_quiet = max(1, int(round(QUIET_TIME / step)))
    moving = np.abs(ydot) >= VEL_START_THRESHOLD

    below = y < marker
    crossings = np.nonzero(below[:-1] != below[1:])[0] + 1

    lane_changes: list[Region] = []
    for ci in crossings:
        if lane_changes and t[ci] <= lane_changes[-1].end_time:
            continue
        upward = y[ci] > y[ci - 1]
        dest = road.right_center if upward else road.left_center
        si = ci
        while si > 0 and moving[si - 1]:
            si -= 1
        start = t[si]
        if lane_changes:
            start = max(start, lane_changes[-1].end_time)

        in_band = np.abs(y - dest) <= DEST_BAND
        band_entries = np.nonzero(in_band[ci:])[0]
        if len(band_entries) == 0:
            warnings.warn("run ends mid lane change; open region dropped")
            continue
        j = ci + int(band_entries[0])
        deadline = t[j] + REGION_CLOSE_TIMEOUT
        # Converged means quiet steering inside the band with the lateral
        # motion died down; an overshoot that leaves the band, or residual
        # lateral velocity about to carry the vehicle out, keeps the region
        # open.
        settled = quiet & in_band & ~moving
        end = None
        for k in range(j, len(t) - n_quiet + 1):
            if t[k] > deadline:
                end = deadline
                break
            if settled[k : k + n_quiet].all():
                end = t[k]
                break
        if end is None:
            if t[-1] >= deadline:
                end = deadline
            else:
                warnings.warn("run ends mid lane change; open region dropped")
                continue
        lane_changes.append(
            Region(
                kind=LANE_CHANGE,
                start_time=start,
                end_time=end,
                direction="left_to_right" if upward else "right_to_left",
            )
        )

    in_lc = np.zeros(len(t), dtype=bool)
    for r in lane_changes:
        i0 = np.searchsorted(t, r.start_time - 1e-9)
        i1 = np.searchsorted(t, r.end_time + 1e-9)
        in_lc[i0:i1] = True
    in_left = (y < marker) & (y > marker - road.lane_width)
    straight_mask = in_left & ~in_lc

    regions: list[Region] = list(lane_changes)
    i = 0
    n = len(t)
    while i < n:
        if straight_mask[i]:
            j = i
            while j + 1 < n and straight_mask[j + 1]:
                j += 1
            if j > i:
                regions.append(Region(kind=STRAIGHT, start_time=t[i], end_time=t[j]))
            i = j + 1
        else:
            i += 1
    regions.sort(key=lambda r: r.start_time)
    return regions


def _region_slice(t: np.ndarray, region: Region) -> slice:
    i0 = int(np.searchsorted(t, region.start_time - 1e-9))
    i1 = int(np.searchsorted(t, region.end_time + 1e-9))
    return slice(i0, i1)


def _pooled_rms(t: np.ndarray, signal: np.ndarray, regions: list[Region]) -> float | None:
    integral = 0.0
    duration = 0.0
    for r in regions:
        sl = _region_slice(t, r)
        if sl.stop - sl.start < 2:
            continue
        integral += float(_trapezoid(signal[sl] ** 2, t[sl]))
        duration += float(t[sl.stop - 1] - t[sl.start])
    if duration <= 0:
        return None
    return math.sqrt(integral / duration)


def rms_lateral_error(
    trace: Trace, regions: list[Region], lane_center: float = 0.0
) -> float | None:
    """Pooled RMS of the error to the left lane center over straight regions."""
    straight = [r for r in regions if r.kind == STRAIGHT]
    if not straight:
        return None
    t = trace.array("time")
    e = trace.array("lateral_position") - lane_center
    return _pooled_rms(t, e, straight)


def rms_driver_torque(trace: Trace, regions: list[Region]) -> float | None:
    """Pooled RMS of the hand/wheel contact torque over lane-change regions."""
    lc = [r for r in regions if r.kind == LANE_CHANGE]
    if not lc:
        return None
    t = trace.array("time")
    tau = trace.array("contact_torque")
    return _pooled_rms(t, tau, lc)


def max_abs_driver_torque(trace: Trace, regions: list[Region]) -> float | None:
    lc = [r for r in regions if r.kind == LANE_CHANGE]
    if not lc:
        return None
    t = trace.array("time")
    tau = trace.array("contact_torque")
    peaks = [np.abs(tau[_region_slice(t, r)]).max(initial=0.0) for r in lc]
    return float(max(peaks))


def steering_reversal_rate(trace: Trace, regions: list[Region]) -> float | None:
    """Sign changes of the (filtered, deadbanded) steering rate per second."""
    lc = [r for r in regions if r.kind == LANE_CHANGE]
    if not lc:
        return None
    t = trace.array("time")
    rate = _lowpass_rate(trace.array("wheel_rate"), t)
    changes = 0
    duration = 0.0
    for r in lc:
        sl = _region_slice(t, r)
        last_sign = 0
        for v in rate[sl]:
            if v > SRR_DEADBAND:
                sign = 1
            elif v < -SRR_DEADBAND:
                sign = -1
            else:
                continue
            if last_sign != 0 and sign != last_sign:
                changes += 1
            last_sign = sign
        duration += r.duration
    if duration <= 0:
        return None
    return changes / duration


def max_abs_steering_angle(trace: Trace, regions: list[Region]) -> float | None:
    """Peak |wheel angle| over lane-change regions, in degrees."""
    lc = [r for r in regions if r.kind == LANE_CHANGE]
    if not lc:
        return None
    t = trace.array("time")
    angle = trace.array("wheel_angle")
    peaks = [np.abs(angle[_region_slice(t, r)]).max(initial=0.0) for r in lc]
    return math.degrees(float(max(peaks)))


def compute_report(trace: Trace, road: RoadSpec | None = None) -> MetricsReport:
    """Full per-run metrics, including per-region breakdowns."""
    road = road or RoadSpec()
    regions = segment_regions(trace, road)
    t = trace.array("time") if len(trace) else np.zeros(0)
    per_region = []
    for r in regions:
        entry = {
            "kind": r.kind,
            "start_time": r.start_time,
            "end_time": r.end_time,
            "direction": r.direction,
        }
        if r.kind == STRAIGHT:
            entry["rms_lateral_error"] = _pooled_rms(
                t, trace.array("lateral_position") - road.left_center, [r]
            )
        else:
            entry["rms_driver_torque"] = _pooled_rms(t, trace.array("contact_torque"), [r])
            entry["max_abs_driver_torque"] = max_abs_driver_torque(trace, [r])
            entry["max_abs_steering_angle"] = max_abs_steering_angle(trace, [r])
        per_region.append(entry)
    return MetricsReport(
        rms_lateral_error=rms_lateral_error(trace, regions, road.left_center),
        rms_driver_torque=rms_driver_torque(trace, regions),
        max_abs_driver_torque=max_abs_driver_torque(trace, regions),
        srr=steering_reversal_rate(trace, regions),
        max_abs_steering_angle=max_abs_steering_angle(trace, regions),
        regions=regions,
        per_region=per_region,
    )
