"""Command-line interface.

Subcommands: simulate, optimize-workspace, stab-sweep, track, fsm-demo,
serve.  Outputs (CSV/JSON and the matching figures) land in --out or the
directory named by the VSARM_LOG_DIR environment variable (default ./runs).

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import logs
from .config import ConfigError, SimConfig, load_config
from .kinematics import PlanarPose

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("VSARM_LOG_DIR", "runs")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args) -> SimConfig:
    return load_config(args.config)


def cmd_optimize_workspace(args) -> int:
    from .workspace import optimize_workspace
    cfg = _load(args)
    out = _out_dir(args)
    t0 = time.time()
    result = optimize_workspace(cfg.workspace, cfg.grid)
    wall = time.time() - t0
    logs.export_workspace_result(result, out / "workspace_result.json")
    print(f"l1 = {result.l1:.0f} mm, l2 = {result.l2:.0f} mm, "
          f"theta1_max = {result.theta1_max:.0f} deg, "
          f"theta2_max = {result.theta2_max:.0f} deg "
          f"(area {result.area_W * 1e-6:.3f} m^2, {wall:.1f} s)")
    if args.occupancy_csv:
        from .workspace import reachable_workspace
        pts = reachable_workspace(result.l1, result.l2,
                                  ((0, result.theta1_max), (0, result.theta2_max)),
                                  1.0)
        spec = cfg.workspace
        labels = []
        for x, y in pts:
            if spec.cooperative_region.contains(x, y):
                labels.append("cooperative")
            elif spec.main_region.contains(x, y):
                labels.append("main")
            else:
                labels.append("extensive")
        logs.export_occupancy_csv(pts, labels, out / "workspace_occupancy.csv")
    if not args.no_plots:
        from .plots import plot_workspace
        plot_workspace(result, cfg.workspace, out / "workspace.png")
    return EXIT_OK


def cmd_track(args) -> int:
    from .control import track
    cfg = _load(args)
    out = _out_dir(args)
    target = PlanarPose(args.x, args.y) if args.x is not None else cfg.tracking_target
    start = np.radians(cfg.task.home_pose_deg)
    log = track(cfg.arm, target, cfg.tracking, start_theta=start)
    logs.export_csv(log, out / "track.csv")
    logs.export_summary(log, out / "track_summary.json", target=target)
    rms = log.rms_error_deg()
    print(f"rms error: {rms[0]:.4f} / {rms[1]:.4f} deg; "
          f"final Cartesian error: {log.final_cartesian_error_mm(target):.3f} mm; "
          f"detections: {0 if log.detection is None else 1}")
    if not args.no_plots:
        from .plots import plot_tracking
        plot_tracking(log, out / "track.png")
    return EXIT_OK


def cmd_stab_sweep(args) -> int:
    from .contact import sweep
    cfg = _load(args)
    out = _out_dir(args)
    results = sweep(list(cfg.stab_velocities), list(cfg.stab_cases),
                    cfg.arm, cfg.medium, cfg.stab)
    logs.export_stab_csv(results, out / "stab_sweep.csv")
    for r in results:
        print(f"case {r.case_id} @ {r.velocity:.2f} m/s: "
              f"F_p = {r.F_p:7.1f} N, d_p = {r.d_p:6.2f} mm, "
              f"detected at {r.detected_at}")
    if not args.no_plots:
        from .plots import plot_stab_sweep
        plot_stab_sweep(results, out / "stab_sweep.png")
    return EXIT_OK


def cmd_fsm_demo(args) -> int:
    from .session import load_event_script, run_batch
    cfg = _load(args)
    out = _out_dir(args)
    events = load_event_script(args.events)
    duration = args.duration or (max(float(e["t"]) for e in events) + 8.0)
    session, log = run_batch(cfg, duration, events)
    path = log.to_csv(out / "fsm_demo.csv")
    print(f"{len(log.rows)} ticks -> {path}; final state "
          f"{session.task.phase.value}"
          f"{' (transit)' if session.task.in_transit else ''}")
    if not args.no_plots:
        from .logs import read_csv
        from .plots import plot_session
        plot_session(read_csv(path), out / "fsm_demo.png")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .session import load_event_script, run_batch
    cfg = _load(args)
    out = _out_dir(args)
    events = load_event_script(args.events) if args.events else []
    session, log = run_batch(cfg, args.duration, events)
    path = log.to_csv(out / "simulate.csv")
    print(f"simulated {args.duration:.1f} s ({len(log.rows)} ticks) -> {path}")
    if not args.no_plots:
        from .logs import read_csv
        from .plots import plot_session
        plot_session(read_csv(path), out / "simulate.png")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve
    cfg = _load(args)
    serve(cfg, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsarm",
        description="Two-link variable-stiffness assistive arm: simulator, "
                    "safety evaluation and task service.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="path to the JSON config")
        p.add_argument("--out", help="output directory (default $VSARM_LOG_DIR or ./runs)")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")

    p = sub.add_parser("optimize-workspace",
                       help="brute-force link-length / joint-limit sweep")
    common(p)
    p.add_argument("--occupancy-csv", action="store_true",
                   help="also write the workspace occupancy samples")
    p.set_defaults(func=cmd_optimize_workspace)

    p = sub.add_parser("track", help="point-to-point tracking run")
    common(p)
    p.add_argument("--x", type=float, help="target x, mm")
    p.add_argument("--y", type=float, help="target y, mm")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("stab-sweep", help="soft-tissue stabbing sweep")
    common(p)
    p.set_defaults(func=cmd_stab_sweep)

    p = sub.add_parser("fsm-demo", help="replay a scripted button-event file")
    common(p)
    p.add_argument("--events", required=True, help="JSON-lines event script")
    p.add_argument("--duration", type=float,
                   help="simulated seconds (default: last event + 8 s)")
    p.set_defaults(func=cmd_fsm_demo)

    p = sub.add_parser("simulate", help="batch session run")
    common(p)
    p.add_argument("--events", help="optional JSON-lines event script")
    p.add_argument("--duration", type=float, default=10.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="real-time WebSocket session service")
    p.add_argument("config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, AssertionError, OSError, TimeoutError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
