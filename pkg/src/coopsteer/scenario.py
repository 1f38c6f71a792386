"""Road, traffic and perception for the two overtaking scenarios.

Scenario A: three other vehicles (OVs) at 50 km/h in the left lane, 130 m
between centers of gravity, so the host overtakes one at a time.

Scenario B: six groups of three OVs, group speeds encountered in the order
40, 30, 50, 40, 30, 50 km/h, 25 m between group members. While the host sits
in the right lane beside a group, the group's middle vehicle holds station
alongside it to keep it from merging back early.

OVs become visible to the driver only under an 80 m center-to-center gap.
Groups after the first are staged: each is placed a fixed gap ahead of the
host the moment the previous group is cleared. Staging keeps the encounter
order and total course length well defined; statically placed constant-speed
groups cannot do both (a faster group behind a slower one either overtakes
it mid-run or has to start so far back that the course length diverges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

KMH = 1.0 / 3.6

LEFT = "left"
RIGHT = "right"
ALONGSIDE_LEFT = "alongside-left"  # left-lane pacing vehicle (Scenario B middle)

LEFT_LANE_OCCUPANCY = (LEFT, ALONGSIDE_LEFT)

# Scenario A geometry.
SCENARIO_A_SPEED = 50.0 * KMH
SCENARIO_A_GAP = 130.0          # m, CG gap between consecutive OVs
SCENARIO_A_FIRST_GAP = 118.0    # m ahead of the host start; visible after ~230 m

# Scenario B geometry. Within-group spacing and the staging gaps (how far
# ahead of the host each group appears once the previous one is cleared) are
# tuned so the full run covers roughly 7.5 km.
SCENARIO_B_GROUP_SPEEDS_KMH = (40.0, 30.0, 50.0, 40.0, 30.0, 50.0)
SCENARIO_B_IN_GROUP_GAP = 25.0  # m between group members
SCENARIO_B_FIRST_GAP = 160.0    # m, group 1 is placed statically
SCENARIO_B_STAGING_GAPS = (340.0, 210.0, 390.0, 430.0, 210.0)  # groups 2..6
SCENARIO_B_CLEAR_MARGIN = 30.0  # m past a group's head before the next stages
PACER_HEAD_GAP = 12.5           # m the pacer keeps behind its group head


@dataclass
class RoadSpec:
    """Endless straight road with two one-way lanes."""

    lane_width: float = 3.0

    @property
    def left_center(self) -> float:
        return 0.0

    @property
    def right_center(self) -> float:
        return self.lane_width

    @property
    def marker(self) -> float:
        return 0.5 * self.lane_width


@dataclass
class OtherVehicle:
    station: float          # m
    lane: str               # left | right | alongside-left
    speed: float            # m/s
    group_id: int
    active: bool = True
    staging_gap: float = 0.0  # m ahead of the host when activated (staged OVs)
    pacing: bool = False      # currently holding station beside the host


@dataclass
class PerceivedVehicle:
    gap: float    # m, OV station minus host station
    speed: float  # m/s
    lane: str
    group_id: int


@dataclass
class ScenarioSpec:
    kind: str
    ov_list: list[OtherVehicle] = field(default_factory=list)
    visibility_gap: float = 80.0
    road: RoadSpec = field(default_factory=RoadSpec)


def build_scenario(kind: str, host_start_station: float = 0.0) -> ScenarioSpec:
    """Lay out the traffic of scenario A or B relative to the host start."""
    if kind == "A":
        ovs = [
            OtherVehicle(
                station=host_start_station + SCENARIO_A_FIRST_GAP + i * SCENARIO_A_GAP,
                lane=LEFT,
                speed=SCENARIO_A_SPEED,
                group_id=i,
            )
            for i in range(3)
        ]
        return ScenarioSpec(kind="A", ov_list=ovs)
    if kind == "B":
        ovs: list[OtherVehicle] = []
        for g, speed_kmh in enumerate(SCENARIO_B_GROUP_SPEEDS_KMH):
            speed = speed_kmh * KMH
            active = g == 0
            tail = host_start_station + SCENARIO_B_FIRST_GAP if active else 0.0
            staging = 0.0 if active else SCENARIO_B_STAGING_GAPS[g - 1]
            for slot in range(3):
                ovs.append(
                    OtherVehicle(
                        station=tail + slot * SCENARIO_B_IN_GROUP_GAP,
                        lane=ALONGSIDE_LEFT if slot == 1 else LEFT,
                        speed=speed,
                        group_id=g,
                        active=active,
                        staging_gap=staging,
                    )
                )
        return ScenarioSpec(kind="B", ov_list=ovs)
    raise ValueError(f"unknown scenario kind {kind!r}")


def step_traffic(spec: ScenarioSpec, host, dt: float) -> ScenarioSpec:
    """Advance all active OVs by one step and manage staging/pacing.

    ``host`` needs ``station`` and ``lateral_position`` attributes. Pure with
    respect to its inputs: returns a new spec, the argument is not mutated.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    ovs = [replace(ov) for ov in spec.ov_list]

    # Stage the next dormant group once the previous group is cleared.
    active_groups = {ov.group_id for ov in ovs if ov.active}
    if active_groups:
        last_active = max(active_groups)
        dormant = [ov for ov in ovs if ov.group_id == last_active + 1]
        if dormant:
            head = max(ov.station for ov in ovs if ov.group_id == last_active)
            if host.station >= head + SCENARIO_B_CLEAR_MARGIN:
                tail = host.station + dormant[0].staging_gap
                for slot, ov in enumerate(sorted(dormant, key=lambda o: o.station)):
                    ov.station = tail + slot * SCENARIO_B_IN_GROUP_GAP
                    ov.active = True

    # Advance everything but the pacers first, so the pacers can clamp
    # against their group head's post-step position.
    pacers = []
    for ov in ovs:
        if not ov.active:
            continue
        if ov.lane == ALONGSIDE_LEFT:
            pacers.append(ov)
        else:
            ov.station += ov.speed * dt

    host_in_right_lane = host.lateral_position > spec.road.marker
    for ov in pacers:
        members = [o for o in ovs if o.group_id == ov.group_id and o is not ov]
        tail = min(o.station for o in members)
        head = max(o.station for o in members)
        beside = host_in_right_lane and tail <= host.station <= head
        # Engage when the host draws level; hold station alongside it from
        # then on, but never closer than PACER_HEAD_GAP to the group head.
        if beside and (ov.pacing or host.station >= ov.station):
            ov.station = min(host.station, head - PACER_HEAD_GAP)
            ov.pacing = True
        else:
            ov.pacing = False
            ov.station += ov.speed * dt
    return replace(spec, ov_list=ovs)


def visible_vehicles(spec: ScenarioSpec, host) -> list[PerceivedVehicle]:
    """Active OVs within the visibility gap (strict), nearest-behind first."""
    out = [
        PerceivedVehicle(
            gap=ov.station - host.station,
            speed=ov.speed,
            lane=ov.lane,
            group_id=ov.group_id,
        )
        for ov in spec.ov_list
        if ov.active and abs(ov.station - host.station) < spec.visibility_gap
    ]
    out.sort(key=lambda p: p.gap)
    return out


def all_overtaken(spec: ScenarioSpec, host, clearance: float = 30.0) -> bool:
    """True once every OV is on stage and at least ``clearance`` behind."""
    return all(
        ov.active and ov.station < host.station - clearance for ov in spec.ov_list
    )
