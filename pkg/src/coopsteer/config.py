"""Run configuration: defaults, flat-key overrides, config files.

Every tunable lives under a flat namespaced key (``assist.k0``,
``vehicle.mass``, ``run.seed`` ...). A config file is plain ``key = value``
lines with ``#`` comments; CLI flags and ``--set`` pairs override file
values. The fully resolved flat mapping is embedded next to every output so
a run is reproducible from its artifacts alone.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, replace

from coopsteer.driver import DriverParams
from coopsteer.scenario import RoadSpec
from coopsteer.shared_control import (
    CONDITIONS,
    GAIN_TUNED,
    AssistState,
    GainParams,
    StatusThresholds,
)
from coopsteer.steering import ArmParams, SteeringParams
from coopsteer.vehicle import VehicleParams

DEFAULT_DURATION_LIMIT = {"A": 240.0, "B": 700.0}  # s, safety caps


@dataclass(frozen=True)
class AssistConfig:
    """Assist-side knobs that are not gain or threshold parameters."""

    time_constant: float = 0.15   # s, torque controller lag
    preview_time: float = 1.3     # s
    tlc_threshold: float = 1.5    # s
    settle_radius: float = 0.5    # m, lane-switch re-arm band
    work_window: float = 1.0      # s, pseudo-work window length

    def __post_init__(self) -> None:
        if min(self.time_constant, self.preview_time, self.work_window) <= 0:
            raise ValueError("assist time constants must be positive")


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "A"
    condition: str = GAIN_TUNED
    seed: int = 0
    dt: float = 0.001              # s, dynamics step
    control_period: float = 0.01   # s, control/log step (multiple of dt)
    duration_limit: float | None = None
    lane_width: float = 3.0
    output_path: str | None = None
    steering: SteeringParams = field(default_factory=SteeringParams)
    arm: ArmParams = field(default_factory=ArmParams)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    thresholds: StatusThresholds = field(default_factory=StatusThresholds)
    gains: GainParams = field(default_factory=GainParams)
    driver: DriverParams = field(default_factory=DriverParams)
    assist: AssistConfig = field(default_factory=AssistConfig)

    def __post_init__(self) -> None:
        if self.scenario not in ("A", "B"):
            raise ValueError(f"scenario must be A or B, got {self.scenario!r}")
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        n = round(self.control_period / self.dt)
        if n < 1 or abs(n * self.dt - self.control_period) > 1e-9:
            raise ValueError(
                f"control_period {self.control_period} is not an integer "
                f"multiple of dt {self.dt}"
            )
        if self.duration_limit is not None and not self.duration_limit > 0:
            raise ValueError("duration_limit must be positive")
        if not self.lane_width > 0:
            raise ValueError("lane_width must be positive")

    @property
    def substeps(self) -> int:
        return round(self.control_period / self.dt)

    @property
    def effective_duration_limit(self) -> float:
        if self.duration_limit is not None:
            return self.duration_limit
        return DEFAULT_DURATION_LIMIT[self.scenario]

    def road(self) -> RoadSpec:
        return RoadSpec(lane_width=self.lane_width)

    def initial_assist_state(self) -> AssistState:
        return AssistState(
            condition=self.condition,
            time_constant=self.assist.time_constant,
            preview_time=self.assist.preview_time,
            preview_distance=self.vehicle.speed * self.assist.preview_time,
            lane_width=self.lane_width,
            tlc_threshold=self.assist.tlc_threshold,
            settle_radius=self.assist.settle_radius,
            gain=self.gains.k0,
        )


# flat key -> (config attribute holding the group, field name); None group
# means a direct RunConfig field.
_KEYMAP: dict[str, tuple[str | None, str]] = {
    "run.scenario": (None, "scenario"),
    "run.condition": (None, "condition"),
    "run.seed": (None, "seed"),
    "run.dt": (None, "dt"),
    "run.control_period": (None, "control_period"),
    "run.duration_limit": (None, "duration_limit"),
    "road.lane_width": (None, "lane_width"),
    "steering.inertia": ("steering", "inertia"),
    "steering.damping": ("steering", "damping"),
    "steering.sat_stiffness": ("steering", "sat_stiffness"),
    "steering.steering_ratio": ("steering", "steering_ratio"),
    "arm.inertia": ("arm", "inertia"),
    "arm.damping": ("arm", "damping"),
    "vehicle.mass": ("vehicle", "mass"),
    "vehicle.yaw_inertia": ("vehicle", "yaw_inertia"),
    "vehicle.dist_front": ("vehicle", "dist_front"),
    "vehicle.dist_rear": ("vehicle", "dist_rear"),
    "vehicle.cornering_stiffness_front": ("vehicle", "cornering_stiffness_front"),
    "vehicle.cornering_stiffness_rear": ("vehicle", "cornering_stiffness_rear"),
    "vehicle.speed": ("vehicle", "speed"),
    "assist.k0": ("gains", "k0"),
    "assist.slope": ("gains", "slope"),
    "assist.offset": ("gains", "offset"),
    "assist.intent_fraction": ("gains", "intent_fraction"),
    "assist.smoothing_time": ("gains", "smoothing_time"),
    "assist.driver_margin": ("thresholds", "driver_margin"),
    "assist.das_margin": ("thresholds", "das_margin"),
    "assist.time_constant": ("assist", "time_constant"),
    "assist.preview_time": ("assist", "preview_time"),
    "assist.tlc_threshold": ("assist", "tlc_threshold"),
    "assist.settle_radius": ("assist", "settle_radius"),
    "assist.work_window": ("assist", "work_window"),
    "driver.preview_time": ("driver", "preview_time"),
    "driver.steering_gain": ("driver", "steering_gain"),
    "driver.neuro_p": ("driver", "neuro_p"),
    "driver.neuro_d": ("driver", "neuro_d"),
    "driver.torque_limit": ("driver", "torque_limit"),
    "driver.noise_std": ("driver", "noise_std"),
    "driver.overtake_trigger_gap": ("driver", "overtake_trigger_gap"),
    "driver.return_clearance": ("driver", "return_clearance"),
}


def parse_value(text: str):
    """Parse a config value: int, then float, then bare string."""
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment; blank lines skipped."""
    values = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, text = line.split("=", 1)
            values[key.strip()] = parse_value(text)
    return values


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Return a new config with flat-key overrides applied."""
    direct: dict = {}
    grouped: dict[str, dict] = {}
    for key, value in overrides.items():
        if key not in _KEYMAP:
            raise KeyError(f"unknown config key {key!r}")
        group, attr = _KEYMAP[key]
        if group is None:
            direct[attr] = value
        else:
            grouped.setdefault(group, {})[attr] = value
    for group, attrs in grouped.items():
        direct[group] = replace(getattr(config, group), **attrs)
    return replace(config, **direct)


def resolved(config: RunConfig) -> dict:
    """Flat key -> value mapping of the fully resolved configuration."""
    out = {}
    for key, (group, attr) in _KEYMAP.items():
        holder = config if group is None else getattr(config, group)
        value = getattr(holder, attr)
        if isinstance(value, float) and not math.isfinite(value):
            value = repr(value)
        out[key] = value
    return out


def write_sidecar(config: RunConfig, trace_path) -> str:
    """Write the resolved config next to a trace file; returns the path."""
    path = str(trace_path)
    sidecar = (path[: -len(".csv")] if path.endswith(".csv") else path) + ".config.json"
    with open(sidecar, "w") as fh:
        json.dump(resolved(config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def config_from_overrides(overrides: dict | None = None, **direct) -> RunConfig:
    """Convenience builder: defaults, then direct fields, then flat overrides."""
    cfg = RunConfig(**direct)
    if overrides:
        cfg = apply_overrides(cfg, overrides)
    return cfg


def asdict_shallow(config: RunConfig) -> dict:
    return dataclasses.asdict(config)
