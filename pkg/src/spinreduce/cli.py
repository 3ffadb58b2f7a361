"""Command-line interface.

Subcommands: simulate, portrait, lift, check, fixed-points.  Every run is
driven by a YAML config (see README for the schema); a few flags override
config fields.  Exit statuses: 0 success, 1 runtime failure, 2 config
error.  Outputs are deterministic for a fixed config and written
atomically, so a failed run leaves no partial files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .dynamics import integrate_full, integrate_reduced
from .errors import ConfigError, SpinreduceError
from .model import MLState, ReducedState, reduced_energy_grid, U_PERIOD
from .portrait import find_fixed_points, trace_separatrices, render_portrait
from .serialize import (
    fixed_point_json_lines,
    fixed_point_table,
    read_trajectory_csv,
    report_json,
    separatrices_json_lines,
    trajectory_json_lines,
    trajectory_table,
    write_text_atomic,
)
from .svgdoc import SvgCanvas
from .transforms import lift_point, lift_trajectory, ml_to_reduced
from .verification import run_checks

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinreduce",
        description="Reduced-dynamics simulation and phase-portrait analysis "
        "of axially symmetric antiferromagnet spin models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", required=True, help="path to the YAML run config")
        sp.add_argument("--out", help="output directory (overrides outputs.directory)")
        sp.add_argument(
            "--format",
            action="append",
            choices=["csv", "svg", "json-lines"],
            help="output format; may be repeated (overrides outputs.formats)",
        )

    sp = sub.add_parser("simulate", help="integrate a trajectory and write tables")
    add_common(sp)
    sp.add_argument(
        "--full",
        action="store_true",
        help="integrate the full 6-D system instead of the reduced one",
    )

    sp = sub.add_parser("portrait", help="fixed points, separatrices, level sets, SVG")
    add_common(sp)
    sp.add_argument("--grid-n", type=int, help="Newton seeding grid (overrides portrait.grid_n)")

    sp = sub.add_parser("fixed-points", help="fixed-point table only")
    add_common(sp)
    sp.add_argument("--grid-n", type=int, help="Newton seeding grid (overrides portrait.grid_n)")

    sp = sub.add_parser("lift", help="lift a reduced trajectory file to spin space")
    add_common(sp)
    sp.add_argument("trajectory", help="CSV trajectory with u, p_u, v columns")

    sp = sub.add_parser("check", help="run the self-verification suite")
    add_common(sp)
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    outputs = cfg.outputs
    if args.out:
        outputs = dataclasses.replace(outputs, directory=args.out)
    if args.format:
        outputs = dataclasses.replace(outputs, formats=tuple(dict.fromkeys(args.format)))
    cfg = dataclasses.replace(cfg, outputs=outputs)
    if getattr(args, "grid_n", None):
        cfg = dataclasses.replace(
            cfg, portrait=dataclasses.replace(cfg.portrait, grid_n=args.grid_n)
        )
    return cfg


def _write_table(out_dir: Path, stem: str, traj, formats) -> list[Path]:
    written = []
    if "csv" in formats:
        path = out_dir / f"{stem}.csv"
        write_text_atomic(path, trajectory_table(traj))
        written.append(path)
    if "json-lines" in formats:
        path = out_dir / f"{stem}.jsonl"
        write_text_atomic(path, trajectory_json_lines(traj))
        written.append(path)
    return written


def _curve_svg(points_3d: np.ndarray, label: str, plane: str) -> str:
    """Orthographic projection of a 3-D curve onto xy, xz, or an oblique plane."""
    x, y, z = points_3d[:, 0], points_3d[:, 1], points_3d[:, 2]
    if plane == "xy":
        px, py = x, y
        xl, yl = f"{label}_x", f"{label}_y"
    elif plane == "xz":
        px, py = x, z
        xl, yl = f"{label}_x", f"{label}_z"
    else:  # oblique: view direction (1, 1, 1)
        px = (x - y) / np.sqrt(2.0)
        py = (2.0 * z - x - y) / np.sqrt(6.0)
        xl, yl = "oblique-1", "oblique-2"
    pad_x = 0.05 * (np.max(px) - np.min(px) + 1e-9)
    pad_y = 0.05 * (np.max(py) - np.min(py) + 1e-9)
    canvas = SvgCanvas(
        x_min=float(np.min(px) - pad_x),
        x_max=float(np.max(px) + pad_x),
        y_min=float(np.min(py) - pad_y),
        y_max=float(np.max(py) + pad_y),
    )
    canvas.axes(xl, yl)
    canvas.clipped_group_start()
    canvas.polyline(np.column_stack([px, py]), stroke="#2060b0", stroke_width=1.0)
    canvas.group_end()
    return canvas.render()


def _write_curve_projections(out_dir: Path, traj, formats) -> None:
    if "svg" not in formats:
        return
    states = traj.states
    for label, sl in (("m", slice(0, 3)), ("l", slice(3, 6))):
        for plane in ("xy", "xz", "oblique"):
            doc = _curve_svg(states[:, sl], label, plane)
            write_text_atomic(out_dir / f"lift_{label}_{plane}.svg", doc)


def cmd_simulate(cfg: RunConfig, full: bool) -> int:
    cfg.require_initial()
    out_dir = Path(cfg.outputs.directory)
    formats = cfg.outputs.formats
    p = cfg.params

    if cfg.initial_reduced is not None:
        initial_reduced = cfg.initial_reduced
        initial_ml = lift_point(initial_reduced, p) if full or cfg.outputs.write_lifted else None
    else:
        image = ml_to_reduced(cfg.initial_ml)
        for name, cfg_v, derived in (
            ("g", p.g, image.g),
            ("h", p.h, image.h),
            ("p_v", p.p_v, image.p_v),
        ):
            if abs(cfg_v - derived) > 1e-9:
                raise ConfigError(
                    f"params.{name}",
                    f"value {cfg_v} inconsistent with the ml initial state "
                    f"(derived {derived}); align them or give a reduced initial state",
                )
        initial_reduced = image.state
        initial_ml = cfg.initial_ml

    if full:
        traj = integrate_full(p, initial_ml if initial_ml is not None else lift_point(initial_reduced, p), cfg.integrator)
    else:
        traj = integrate_reduced(p, initial_reduced, cfg.integrator)

    _write_table(out_dir, "trajectory", traj, formats)
    write_text_atomic(out_dir / "conservation.json", report_json(traj))
    if cfg.outputs.write_lifted and not full:
        lifted = lift_trajectory(traj, p)
        _write_table(out_dir, "trajectory_lifted", lifted, formats)
        _write_curve_projections(out_dir, lifted, formats)
    if traj.status != "completed":
        print(f"simulate: halted with status={traj.status}", file=sys.stderr)
    return 0


def _portrait_pieces(cfg: RunConfig):
    p = cfg.params
    pc = cfg.portrait
    u_nodes = np.linspace(0.0, U_PERIOD, 33)
    pu_nodes = np.linspace(p.momentum_range.lo, p.momentum_range.hi, 33)
    grid = reduced_energy_grid(p, u_nodes[:, None], pu_nodes[None, :])
    degenerate = float(np.max(grid) - np.min(grid)) < 1e-14 * (1.0 + abs(float(np.mean(grid))))
    if degenerate:
        print(
            "portrait: Hamiltonian is constant on the domain "
            "(degenerate portrait); reporting zero fixed points",
            file=sys.stderr,
        )
        return [], []
    points = find_fixed_points(p, grid_n=pc.grid_n)
    saddles = [fp for fp in points if fp.kind == "saddle"]
    separatrices = trace_separatrices(
        p,
        saddles,
        dt=pc.separatrix_dt,
        eps=pc.separatrix_eps,
        match_radius=pc.match_radius,
        max_arc=pc.arc_budget,
    )
    return points, separatrices


def _write_fixed_points(out_dir: Path, points, formats) -> None:
    if "csv" in formats:
        write_text_atomic(out_dir / "fixed_points.csv", fixed_point_table(points))
    if "json-lines" in formats:
        write_text_atomic(out_dir / "fixed_points.jsonl", fixed_point_json_lines(points))


def cmd_portrait(cfg: RunConfig) -> int:
    out_dir = Path(cfg.outputs.directory)
    formats = cfg.outputs.formats
    points, separatrices = _portrait_pieces(cfg)
    _write_fixed_points(out_dir, points, formats)
    write_text_atomic(out_dir / "separatrices.jsonl", separatrices_json_lines(separatrices))
    if "svg" in formats:
        doc = render_portrait(
            cfg.params,
            points,
            separatrices,
            levels=cfg.portrait.levels,
            resolution=cfg.portrait.resolution,
            u_periods=cfg.portrait.u_periods,
        )
        write_text_atomic(out_dir / "portrait.svg", doc)
    return 0


def cmd_fixed_points(cfg: RunConfig) -> int:
    out_dir = Path(cfg.outputs.directory)
    points = find_fixed_points(cfg.params, grid_n=cfg.portrait.grid_n)
    _write_fixed_points(out_dir, points, cfg.outputs.formats)
    for fp in points:
        print(f"{fp.kind:10s} u={fp.u:.12g} p_u={fp.p_u:.12g} H={fp.energy:.12g}")
    return 0


def cmd_lift(cfg: RunConfig, trajectory_path: str) -> int:
    from .dynamics import Trajectory

    names, values = read_trajectory_csv(Path(trajectory_path))
    for required in ("t", "u", "p_u", "v"):
        if required not in names:
            raise SpinreduceError(
                f"trajectory file {trajectory_path} lacks required column '{required}'"
            )
    times = values[:, names.index("t")]
    states = np.column_stack(
        [values[:, names.index("u")], values[:, names.index("p_u")], values[:, names.index("v")]]
    )
    traj = Trajectory(kind="reduced", columns=("u", "p_u", "v"), times=times, states=states)
    lifted = lift_trajectory(traj, cfg.params)
    out_dir = Path(cfg.outputs.directory)
    _write_table(out_dir, "lifted", lifted, cfg.outputs.formats)
    _write_curve_projections(out_dir, lifted, cfg.outputs.formats)
    return 0


def cmd_check(cfg: RunConfig) -> int:
    results = run_checks(
        cfg.params,
        initial=cfg.initial_reduced,
        seed=cfg.check.seed,
        break_sign=cfg.check.break_sign_hook,
    )
    for r in results:
        print(r.line())
    payload = {
        "all_passed": all(r.passed for r in results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "measured": r.measured,
                "threshold": r.threshold,
            }
            for r in results
        ],
    }
    out_dir = Path(cfg.outputs.directory)
    write_text_atomic(out_dir / "check_report.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return 0 if payload["all_passed"] else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg, full=args.full)
        if args.command == "portrait":
            return cmd_portrait(cfg)
        if args.command == "fixed-points":
            return cmd_fixed_points(cfg)
        if args.command == "lift":
            return cmd_lift(cfg, args.trajectory)
        if args.command == "check":
            return cmd_check(cfg)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpinreduceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
