"""Deterministic two-rate simulation loop and batch experiments.

Control, estimation, the driver and logging run at the control period
(default 100 Hz); the steering and vehicle ODEs are integrated in dt
substeps (default 1 kHz) with the commanded torques held constant over the
control interval. Per control step the order is: perceive, driver lane
decision, driver torque, power/work update, assist update, steering
substeps, vehicle substeps, traffic step, log.

Each trace row carries the post-step states at the row's time together with
the torques applied over the interval just completed, so the wheel and arm
torque balances can be re-checked row by row. The power/work/status/gain
cells are the values computed at the interval's start, which produced those
torques. A run is a pure function of its configuration: identical configs
give byte-identical traces.
"""

from __future__ import annotations

import math
import random
import statistics

from coopsteer.config import RunConfig, write_sidecar
from coopsteer.driver import KEEP_LEFT, DriverIntent, decide_lane, driver_muscle_torque
from coopsteer.metrics import MetricsReport, compute_report
from coopsteer.scenario import all_overtaken, build_scenario, step_traffic, visible_vehicles
from coopsteer.shared_control import PseudoWorkEstimate, pseudo_power, update_assist
from coopsteer.steering import SteeringState, step_coupled
from coopsteer.trace import Trace
from coopsteer.vehicle import VehicleState, step_vehicle

BLOWUP_LIMIT = 1e6          # abort when any state magnitude passes this
COMPLETION_TAIL = 6.0       # s of extra logging after the scenario completes
COMPLETION_BAND = 0.5       # m around the left lane center
EXTERNAL_TORQUE_LIMIT = 20.0  # N m clamp on serve-mode commands


class Simulation:
    """One closed-loop run, advanced one control step at a time."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.road = config.road()
        self.spec = build_scenario(config.scenario, 0.0)
        self.host = VehicleState()
        self.wheel = SteeringState()
        self.assist = config.initial_assist_state()
        self.work = PseudoWorkEstimate(config.assist.work_window)
        self.intent = DriverIntent(target_lane=self.road.left_center)
        self.rng = random.Random(config.seed)
        self.trace = Trace()
        self.step_index = 0
        self.muscle_torque = 0.0       # applied over the last interval
        self.das_torque = 0.0          # applied over the last interval
        self.completed_at: float | None = None
        self._perception: list = []
        self._log_initial_row()

    # -- loop ------------------------------------------------------------

    def control_step(self, external_torque: float | None = None) -> dict:
        """Advance one control period; returns the logged row."""
        cfg = self.config
        t = self.step_index * cfg.control_period

        perception = visible_vehicles(self.spec, self.host)
        if external_torque is None:
            self.intent = decide_lane(
                self.intent, perception, self.host, cfg.driver, cfg.vehicle.speed, self.road
            )
            muscle = driver_muscle_torque(
                self.host, self.wheel, self.intent, cfg.driver, cfg.vehicle.speed, self.rng
            )
        else:
            muscle = max(-EXTERNAL_TORQUE_LIMIT, min(EXTERNAL_TORQUE_LIMIT, external_torque))

        # Power samples pair the current lateral velocity with the contact
        # torque measured at the end of the last interval, the assist torque
        # applied over it, and the muscle torque about to be applied.
        ydot = self.host.lateral_velocity
        p_c = pseudo_power(self.wheel.contact_torque, ydot)
        p_das = pseudo_power(self.das_torque, ydot)
        p_msl = pseudo_power(muscle, ydot)
        self.work.update(p_c, p_das, p_msl, t)

        self.assist, das = update_assist(
            self.assist, self.host, self.work, cfg.thresholds, cfg.gains, cfg.control_period
        )

        # Steering substeps first, recording the wheel-angle path; the
        # vehicle substeps then replay it (angle at each substep's start).
        angles = []
        wheel = self.wheel
        for _ in range(cfg.substeps):
            angles.append(wheel.angle)
            wheel, _tau = step_coupled(wheel, muscle, das, cfg.steering, cfg.arm, cfg.dt)
        self.wheel = wheel
        host = self.host
        for angle in angles:
            host = step_vehicle(host, angle, cfg.vehicle, cfg.steering.steering_ratio, cfg.dt)
        self.host = host

        if (
            abs(host.lateral_position) > BLOWUP_LIMIT
            or abs(wheel.angular_velocity) > BLOWUP_LIMIT
            or abs(host.yaw_rate) > BLOWUP_LIMIT
        ):
            raise RuntimeError(
                f"simulation diverged at t={t:.3f}s: y={host.lateral_position:.3g}, "
                f"wheel rate={wheel.angular_velocity:.3g}, yaw rate={host.yaw_rate:.3g}"
            )

        self.spec = step_traffic(self.spec, host, cfg.control_period)

        self.muscle_torque = muscle
        self.das_torque = das
        self._perception = perception
        self.step_index += 1
        row = self._row(self.step_index * cfg.control_period, p_c, p_das, p_msl)
        self.trace.append(row)
        self._check_completion(row["time"])
        return row

    def run(self) -> Trace:
        while not self.done:
            self.control_step()
        return self.trace

    @property
    def done(self) -> bool:
        t = self.step_index * self.config.control_period
        if t >= self.config.effective_duration_limit:
            return True
        return self.completed_at is not None and t >= self.completed_at + COMPLETION_TAIL

    # -- internals -------------------------------------------------------

    def _check_completion(self, t: float) -> None:
        if self.completed_at is not None:
            return
        if (
            all_overtaken(self.spec, self.host)
            and self.intent.phase == KEEP_LEFT
            and abs(self.host.lateral_position - self.road.left_center) < COMPLETION_BAND
        ):
            self.completed_at = t

    def _row(self, t: float, p_c: float, p_das: float, p_msl: float) -> dict:
        return {
            "time": t,
            "station": self.host.station,
            "lateral_position": self.host.lateral_position,
            "lateral_velocity": self.host.lateral_velocity,
            "heading": self.host.heading,
            "wheel_angle": self.wheel.angle,
            "wheel_rate": self.wheel.angular_velocity,
            "contact_torque": self.wheel.contact_torque,
            "das_torque": self.das_torque,
            "muscle_torque": self.muscle_torque,
            "sat_torque": self.wheel.vehicle_torque,
            "power_contact": p_c,
            "power_das": p_das,
            "power_muscle": p_msl,
            "work_contact": self.work.work_c,
            "work_das": self.work.work_das,
            "work_muscle": self.work.work_msl,
            "status": self.assist.status.label,
            "gain": self.assist.gain,
            "target_lane_center": self.assist.target_lane_center,
            "driver_target_lane": self.intent.target_lane,
            "tlc": self.assist.tlc,
            "ov_gaps": ";".join(repr(p.gap) for p in self._perception),
        }

    def _log_initial_row(self) -> None:
        self.trace.append(self._row(0.0, 0.0, 0.0, 0.0))


def run_experiment(config: RunConfig) -> tuple[Trace, MetricsReport]:
    """Run one configuration to completion and evaluate it.

    Writes the trace CSV, its config sidecar and a metrics JSON when the
    config carries an output path.
    """
    sim = Simulation(config)
    trace = sim.run()
    report = compute_report(trace, config.road())
    if config.output_path:
        trace.write_csv(config.output_path)
        write_sidecar(config, config.output_path)
        _write_metrics(report, config.output_path)
    return trace, report


def _write_metrics(report: MetricsReport, trace_path: str) -> str:
    import json

    path = (trace_path[: -len(".csv")] if trace_path.endswith(".csv") else trace_path)
    path += ".metrics.json"
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


METRIC_FIELDS = (
    ("rms_lateral_error", "RMS(e) [m]"),
    ("rms_driver_torque", "RMS(tau_c) [Nm]"),
    ("max_abs_driver_torque", "max|tau_c| [Nm]"),
    ("srr", "SRR [1/s]"),
    ("max_abs_steering_angle", "max|theta| [deg]"),
)


def batch(
    base_config: RunConfig,
    seeds: list[int],
    conditions: list[str],
) -> dict:
    """Run seeds x conditions and aggregate mean/std per condition.

    Failed runs are captured per (condition, seed) and reported, never
    silently dropped.
    """
    from dataclasses import replace

    if not seeds:
        raise ValueError("batch needs at least one seed")
    if not conditions:
        raise ValueError("batch needs at least one condition")
    runs: dict[str, dict[int, dict]] = {}
    failures: list[dict] = []
    for condition in conditions:
        runs[condition] = {}
        for seed in seeds:
            cfg = replace(base_config, condition=condition, seed=seed, output_path=None)
            try:
                _trace, report = run_experiment(cfg)
                runs[condition][seed] = {
                    key: getattr(report, key) for key, _label in METRIC_FIELDS
                }
            except Exception as exc:  # noqa: BLE001 - report, don't drop
                failures.append({"condition": condition, "seed": seed, "error": str(exc)})
                runs[condition][seed] = {"error": str(exc)}

    summary: dict[str, dict[str, dict]] = {}
    for condition in conditions:
        summary[condition] = {}
        for key, _label in METRIC_FIELDS:
            values = [
                r[key]
                for r in runs[condition].values()
                if "error" not in r and r.get(key) is not None
            ]
            if values:
                summary[condition][key] = {
                    "mean": statistics.fmean(values),
                    "std": statistics.stdev(values) if len(values) > 1 else 0.0,
                    "n": len(values),
                }
            else:
                summary[condition][key] = {"mean": None, "std": None, "n": 0}
    return {
        "seeds": list(seeds),
        "conditions": list(conditions),
        "runs": runs,
        "failures": failures,
        "summary": summary,
    }


def format_batch_table(result: dict) -> str:
    """Aggregate table, metric rows by condition columns, mean(std)."""
    conditions = result["conditions"]
    width = 22
    lines = []
    header = f"{'metric':<20}" + "".join(f"{c:>{width}}" for c in conditions)
    lines.append(header)
    lines.append("-" * len(header))
    for key, label in METRIC_FIELDS:
        cells = []
        for condition in conditions:
            agg = result["summary"][condition][key]
            if agg["mean"] is None:
                cells.append(f"{'-':>{width}}")
            else:
                cells.append(f"{agg['mean']:>{width - 8}.3f}({agg['std']:.3f})")
        lines.append(f"{label:<20}" + "".join(cells))
    if result["failures"]:
        lines.append("")
        lines.append(f"{len(result['failures'])} failed run(s):")
        for f in result["failures"]:
            lines.append(f"  {f['condition']} seed {f['seed']}: {f['error']}")
    return "\n".join(lines)
