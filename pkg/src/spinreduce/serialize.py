"""Trajectory/fixed-point/report serialization.

All writers are deterministic (no timestamps, fixed column orders, floats
at 17 significant digits so doubles round-trip exactly) and atomic
(write-temp-then-rename).
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .dynamics import Trajectory, conservation_report
from .portrait import FixedPoint, Separatrix

__all__ = [
    "write_text_atomic",
    "trajectory_table",
    "trajectory_json_lines",
    "read_trajectory_csv",
    "fixed_point_table",
    "fixed_point_json_lines",
    "separatrices_json_lines",
    "report_json",
]


def _f(x: float) -> str:
    return f"{x:.17g}"


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _trajectory_columns(traj: Trajectory) -> tuple[list[str], np.ndarray]:
    """Column names and value matrix: t, states, conserved values, drifts."""
    names = ["t", *traj.columns]
    cols = [traj.times] + [traj.states[:, i] for i in range(len(traj.columns))]
    for name in sorted(traj.conserved):
        if name not in traj.columns:
            names.append(name)
            cols.append(traj.conserved[name])
    for name in sorted(traj.conserved):
        series = np.asarray(traj.conserved[name], dtype=float)
        names.append(f"{name}_drift")
        cols.append(series - series[0])
    return names, np.column_stack(cols)


def trajectory_table(traj: Trajectory) -> str:
    """CSV text with header row and fixed column order."""
    names, values = _trajectory_columns(traj)
    lines = [",".join(names)]
    for row in values:
        lines.append(",".join(_f(x) for x in row))
    return "\n".join(lines) + "\n"


def trajectory_json_lines(traj: Trajectory) -> str:
    names, values = _trajectory_columns(traj)
    lines = []
    for row in values:
        lines.append(json.dumps(dict(zip(names, row.tolist())), sort_keys=True))
    return "\n".join(lines) + "\n"


def read_trajectory_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Read back a trajectory table; returns (column names, value matrix)."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty trajectory file")
    names = text[0].split(",")
    values = np.array([[float(x) for x in line.split(",")] for line in text[1:]])
    return names, values


def fixed_point_table(points: list[FixedPoint]) -> str:
    lines = ["u,p_u,kind,energy,residual,det_hessian"]
    for fp in points:
        det = fp.hessian[0, 0] * fp.hessian[1, 1] - fp.hessian[0, 1] * fp.hessian[1, 0]
        lines.append(
            ",".join(
                [_f(fp.u), _f(fp.p_u), fp.kind, _f(fp.energy), _f(fp.residual), _f(det)]
            )
        )
    return "\n".join(lines) + "\n"


def fixed_point_json_lines(points: list[FixedPoint]) -> str:
    lines = []
    for fp in points:
        det = fp.hessian[0, 0] * fp.hessian[1, 1] - fp.hessian[0, 1] * fp.hessian[1, 0]
        lines.append(
            json.dumps(
                {
                    "u": fp.u,
                    "p_u": fp.p_u,
                    "kind": fp.kind,
                    "energy": fp.energy,
                    "residual": fp.residual,
                    "det_hessian": det,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def separatrices_json_lines(separatrices: list[Separatrix]) -> str:
    lines = []
    for sep in separatrices:
        lines.append(
            json.dumps(
                {
                    "energy": sep.energy,
                    "topology": sep.topology,
                    "saddles": [[s.u, s.p_u] for s in sep.saddle_refs],
                    "branches": [
                        {
                            "start_saddle": br.start_saddle,
                            "end_saddle": br.end_saddle,
                            "reason": br.reason,
                            "complete": br.complete,
                            "max_energy_error": br.max_energy_error,
                            "points": [[float(a), float(b)] for a, b in br.points],
                        }
                        for br in sep.branches
                    ],
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def report_json(traj: Trajectory) -> str:
    """Machine-readable conservation summary for a trajectory."""
    report = conservation_report(traj)
    payload = {"status": traj.status, "invariants": report.summary()}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
