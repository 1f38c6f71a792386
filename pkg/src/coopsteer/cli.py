"""Command-line interface: run, batch, serve and metrics subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from coopsteer.config import (
    RunConfig,
    apply_overrides,
    parse_config_file,
    parse_value,
)
from coopsteer.harness import (
    METRIC_FIELDS,
    batch,
    format_batch_table,
    run_experiment,
)
from coopsteer.metrics import compute_report
from coopsteer.scenario import RoadSpec
from coopsteer.trace import Trace


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any config key, e.g. --set assist.k0=0.4 (repeatable)",
    )
    parser.add_argument("--scenario", choices=("A", "B"))
    parser.add_argument(
        "--condition", choices=("no_system", "gain_tuned", "tlc")
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--duration-limit", type=float)


def _build_config(args: argparse.Namespace, extra: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    overrides: dict = {}
    if args.config:
        overrides.update(parse_config_file(args.config))
    for pair in args.overrides:
        if "=" not in pair:
            raise SystemExit(f"--set expects KEY=VALUE, got {pair!r}")
        key, text = pair.split("=", 1)
        overrides[key.strip()] = parse_value(text)
    if args.scenario is not None:
        overrides["run.scenario"] = args.scenario
    if args.condition is not None:
        overrides["run.condition"] = args.condition
    if args.seed is not None:
        overrides["run.seed"] = args.seed
    if args.duration_limit is not None:
        overrides["run.duration_limit"] = args.duration_limit
    if extra:
        overrides.update(extra)
    return apply_overrides(cfg, overrides)


def _parse_seed_range(text: str) -> list[int]:
    """'0..9', '0:9' or a comma list; ranges are inclusive."""
    text = text.strip()
    for sep in ("..", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    if args.out:
        cfg = replace(cfg, output_path=args.out)
    trace, report = run_experiment(cfg)
    print(f"run complete: {len(trace)} rows, {trace.column('time')[-1]:.2f} s simulated")
    for key, label in METRIC_FIELDS:
        value = getattr(report, key)
        print(f"  {label:<18} {'-' if value is None else f'{value:.4f}'}")
    if args.out:
        print(f"trace written to {args.out}")
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    seeds = _parse_seed_range(args.seeds)
    if not seeds:
        raise SystemExit("empty seed range")
    conditions = [c.strip() for c in args.conditions.split(",") if c.strip()]
    result = batch(cfg, seeds, conditions)
    print(format_batch_table(result))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"summary written to {args.out}")
    return 1 if result["failures"] else 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from coopsteer.serve import SimulationServer

    cfg = _build_config(args)
    server = SimulationServer(
        cfg,
        port=args.port,
        duration=args.duration,
        output_path=args.out,
    )
    # flush so callers waiting on the banner see it even when piped
    print(f"serving on ws://{server.host}:{server.port} (ctrl-c to stop)", flush=True)
    server.run_forever()
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    trace = Trace.read_csv(args.trace)
    report = compute_report(trace, RoadSpec(lane_width=args.lane_width))
    payload = report.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"metrics written to {args.out}")
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="coopsteer",
        description=(
            "Closed-loop simulation of a torque-sharing lane-keeping assist "
            "with cooperative-status estimation"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario/condition/seed")
    _add_config_arguments(p_run)
    p_run.add_argument("--out", help="trace CSV output path")
    p_run.set_defaults(func=_cmd_run)

    p_batch = sub.add_parser("batch", help="run a seed range across conditions")
    _add_config_arguments(p_batch)
    p_batch.add_argument("--seeds", required=True, help="e.g. 0..9 or 1,2,3")
    p_batch.add_argument(
        "--conditions",
        default="no_system,gain_tuned,tlc",
        help="comma list of conditions",
    )
    p_batch.add_argument("--out", help="summary JSON output path")
    p_batch.set_defaults(func=_cmd_batch)

    p_serve = sub.add_parser("serve", help="real-time session over WebSocket")
    _add_config_arguments(p_serve)
    p_serve.add_argument("--port", type=int, default=8710)
    p_serve.add_argument("--duration", type=float, help="stop after this many seconds")
    p_serve.add_argument("--out", help="record the session trace here")
    p_serve.set_defaults(func=_cmd_serve)

    p_metrics = sub.add_parser("metrics", help="re-analyse a saved trace")
    p_metrics.add_argument("--trace", required=True)
    p_metrics.add_argument("--lane-width", type=float, default=3.0)
    p_metrics.add_argument("--out", help="metrics JSON output path")
    p_metrics.set_defaults(func=_cmd_metrics)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
