"""Phase-portrait analysis of the reduced system.

Finds the fixed points of H(u, p_u) on the fundamental domain
[0, sqrt2*pi) x (admissible p_u interval), classifies them as centers or
saddles by the sign of det Hess H (for a one-degree-of-freedom canonical
system det > 0 means purely imaginary linearization eigenvalues, det < 0 a
real +/- pair), extracts energy level sets by marching squares, and traces
separatrices by integrating off the saddle eigendirections.

Everything here is deterministic for fixed inputs: grid seeding,
deduplication and rendering all use fixed orders.  Seed batches may be
processed by a small thread pool capped by the SPINREDUCE_THREADS
environment variable (unset -> serial, 0 -> automatic); results are merged
in chunk order, so the output does not depend on scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import _midpoint_displacement_raw
from .errors import InadmissibleMomentumError, InadmissibleParameterError
from .model import (
    U_PERIOD,
    ModelParams,
    canonical_u,
    make_reduced_derivs,
    make_reduced_energy,
    reduced_energy_grid,
    wrap_delta,
)
from .svgdoc import SvgCanvas

__all__ = [
    "FixedPoint",
    "Branch",
    "Separatrix",
    "classify",
    "find_fixed_points",
    "level_set",
    "trace_separatrices",
    "render_portrait",
    "DEDUP_RADIUS",
    "MATCH_RADIUS",
    "SEED_MARGIN_FRACTION",
]

#: Converged Newton points closer than this (u modulo period) are merged.
DEDUP_RADIUS = 1e-6
#: A separatrix branch terminates on re-entering this radius of a saddle.
MATCH_RADIUS = 1e-4
#: Seed grids stay this fraction of the interval width away from the boundary.
SEED_MARGIN_FRACTION = 1e-6

_RESIDUAL_LIMIT = 1e-10


def _thread_count() -> int:
    env = os.environ.get("SPINREDUCE_THREADS", "").strip()
    if not env:
        return 1
    try:
        n = int(env)
    except ValueError:
        return 1
    if n == 0:
        return min(os.cpu_count() or 1, 8)
    return max(1, n)


@dataclass(frozen=True)
class FixedPoint:
    """A critical point of the reduced Hamiltonian.

    ``kind`` is "center", "saddle" or "degenerate" (|det Hess| below the
    scale-relative margin).  ``residual`` is the gradient norm at the point;
    ``u`` is canonicalized to [0, U_PERIOD).
    """

    u: float
    p_u: float
    kind: str
    energy: float
    hessian: np.ndarray
    residual: float

    def distance_to(self, u: float, p_u: float) -> float:
        return math.hypot(wrap_delta(u - self.u), p_u - self.p_u)


@dataclass
class Branch:
    """One traced invariant-manifold branch of a saddle.

    ``reason`` is "saddle" (re-entered a saddle's matching radius),
    "boundary" (left the admissible region) or "budget" (arc-length budget
    exhausted; flagged incomplete but kept).
    """

    points: np.ndarray  # (n, 2) in (u, p_u), u unwrapped
    start_saddle: int
    end_saddle: int | None
    reason: str
    complete: bool
    max_energy_error: float


@dataclass
class Separatrix:
    """A saddle energy level: the saddles it joins plus traced branches.

    ``topology`` is "saddle-loop" when the branches return to the single
    saddle they started from and "saddle-connection" when distinct saddles
    are joined.
    """

    energy: float
    saddle_refs: tuple[FixedPoint, ...]
    branches: list[Branch]
    topology: str


# ---------------------------------------------------------------------------
# Vectorized gradient for Newton batches


def _grad_arrays(p: ModelParams, u, p_u):
    """Vectorized (dH/du, dH/dp_u); NaN outside the open admissible interval."""
    u = np.asarray(u, dtype=float)
    p_u = np.asarray(p_u, dtype=float)
    spl = p_u + p.p_v
    smn = p_u - p.p_v
    sg = 2.0 * p.g * p.g - spl * spl
    sh = 2.0 * p.h * p.h - smn * smn
    ok = (sg > 0.0) & (sh > 0.0)
    with np.errstate(all="ignore"):
        Rg = np.sqrt(np.where(ok, sg, np.nan))
        Rh = np.sqrt(np.where(ok, sh, np.nan))
        P = Rg * Rh
        su = np.sqrt(2.0) * u
        c = np.cos(su)
        s = np.sin(su)
        gh2 = p.g * p.g + p.h * p.h
        w = gh2 + p_u * p_u - p.p_v * p.p_v - c * P
        dP = -spl * Rh / Rg - smn * Rg / Rh
        H_u = np.sqrt(2.0) * P * (0.5 * (p.A - p.B) * s - p.beta * c + 0.5 * p.C * w * s)
        w_pu = 2.0 * p_u - c * dP
        H_pu = (
            0.5 * p.A * w_pu
            + 0.5 * p.B * (c * dP - 2.0 * p_u)
            + 2.0 * p.alpha * p_u
            - p.beta * s * dP
            + 0.5 * p.C * w * w_pu
        )
    return H_u, H_pu


def _newton_batch(p: ModelParams, u0, pu0, lo, hi, iters=60, fd_h=1e-6):
    """Damped Newton on the gradient for a batch of seeds (lockstep arrays)."""
    u = np.asarray(u0, dtype=float).copy()
    pu = np.asarray(pu0, dtype=float).copy()
    with np.errstate(all="ignore"):
        for _ in range(iters):
            gu, gp = _grad_arrays(p, u, pu)
            guu = (_grad_arrays(p, u + fd_h, pu)[0] - _grad_arrays(p, u - fd_h, pu)[0]) / (2 * fd_h)
            gup = (_grad_arrays(p, u, pu + fd_h)[0] - _grad_arrays(p, u, pu - fd_h)[0]) / (2 * fd_h)
            gpu = (_grad_arrays(p, u + fd_h, pu)[1] - _grad_arrays(p, u - fd_h, pu)[1]) / (2 * fd_h)
            gpp = (_grad_arrays(p, u, pu + fd_h)[1] - _grad_arrays(p, u, pu - fd_h)[1]) / (2 * fd_h)
            det = guu * gpp - gup * gpu
            du = (gpp * gu - gup * gp) / det
            dpu = (-gpu * gu + guu * gp) / det
            # damp long steps so seeds do not tunnel across basins
            norm = np.abs(du) + np.abs(dpu)
            scale = np.where(norm > 0.5, 0.5 / norm, 1.0)
            u = u - du * scale
            pu = pu - dpu * scale
            dead = ~np.isfinite(u) | ~np.isfinite(pu) | (pu <= lo) | (pu >= hi)
            u = np.where(dead, np.nan, u)
            pu = np.where(dead, np.nan, pu)
        gu, gp = _grad_arrays(p, u, pu)
        res = np.hypot(gu, gp)
    good = np.isfinite(res) & (res < 1e-9)
    return u[good], pu[good]


def _fd_hessian(p: ModelParams, u: float, p_u: float, h: float = 1e-6) -> np.ndarray:
    """Symmetrized finite-difference Jacobian of the analytic gradient."""
    d = make_reduced_derivs(p)
    gu_p, gp_p, _ = d(u + h, p_u)
    gu_m, gp_m, _ = d(u - h, p_u)
    gu_q, gp_q, _ = d(u, p_u + h)
    gu_r, gp_r, _ = d(u, p_u - h)
    a = (gu_p - gu_m) / (2 * h)
    b1 = (gp_p - gp_m) / (2 * h)
    b2 = (gu_q - gu_r) / (2 * h)
    dd = (gp_q - gp_r) / (2 * h)
    b = 0.5 * (b1 + b2)
    return np.array([[a, b], [b, dd]])


def _newton_polish(p: ModelParams, u: float, p_u: float, iters: int = 4):
    d = make_reduced_derivs(p)
    for _ in range(iters):
        gu, gp, _ = d(u, p_u)
        hess = _fd_hessian(p, u, p_u)
        det = hess[0, 0] * hess[1, 1] - hess[0, 1] * hess[1, 0]
        if not math.isfinite(det) or abs(det) < 1e-300:
            break
        du = (hess[1, 1] * gu - hess[0, 1] * gp) / det
        dpu = (-hess[1, 0] * gu + hess[0, 0] * gp) / det
        u, p_u = u - du, p_u - dpu
    return u, p_u


def classify(hessian: np.ndarray, delta: float | None = None) -> str:
    """Center/saddle/degenerate from the sign of det Hess.

    The degeneracy margin defaults to 1e-8 times the largest Hessian entry,
    keeping the classification scale-free.
    """
    hessian = np.asarray(hessian, dtype=float)
    det = hessian[0, 0] * hessian[1, 1] - hessian[0, 1] * hessian[1, 0]
    if delta is None:
        delta = 1e-8 * max(float(np.max(np.abs(hessian))), 1e-300)
    if det > delta:
        return "center"
    if det < -delta:
        return "saddle"
    return "degenerate"


def find_fixed_points(p: ModelParams, grid_n: int = 64) -> list[FixedPoint]:
    """Newton search for all critical points of the reduced Hamiltonian.

    Seeds a grid_n x grid_n grid over one u period and the interior of the
    admissible p_u interval, runs damped Newton on the analytic gradient
    (finite-difference Jacobian), deduplicates converged points to
    DEDUP_RADIUS with u compared modulo the period, and classifies each
    survivor.  Points are returned sorted by (u, p_u); every reported point
    has gradient-norm residual below 1e-10.

    For a Hamiltonian that is constant over the domain (all gradients
    vanish identically) an empty list is returned.
    """
    rng = p.momentum_range
    if rng.degenerate:
        raise InadmissibleParameterError(
            "admissible momentum interval is degenerate; no interior portrait exists"
        )
    margin = SEED_MARGIN_FRACTION * rng.width
    lo, hi = rng.lo + margin, rng.hi - margin
    us = np.linspace(0.0, U_PERIOD, grid_n, endpoint=False)
    pus = np.linspace(lo, hi, grid_n)
    UU, PP = np.meshgrid(us, pus, indexing="ij")
    seeds_u = UU.ravel()
    seeds_pu = PP.ravel()

    gu, gp = _grad_arrays(p, seeds_u, seeds_pu)
    finite = np.hypot(gu, gp)[np.isfinite(gu) & np.isfinite(gp)]
    if finite.size and float(np.max(finite)) < 1e-12:
        return []  # constant Hamiltonian: every point is trivially critical

    n_threads = _thread_count()
    if n_threads <= 1:
        conv_u, conv_pu = _newton_batch(p, seeds_u, seeds_pu, rng.lo, rng.hi)
        converged = [(conv_u, conv_pu)]
    else:
        chunks_u = np.array_split(seeds_u, n_threads)
        chunks_pu = np.array_split(seeds_pu, n_threads)
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            converged = list(
                pool.map(
                    lambda ab: _newton_batch(p, ab[0], ab[1], rng.lo, rng.hi),
                    zip(chunks_u, chunks_pu),
                )
            )
    all_u = np.concatenate([c[0] for c in converged])
    all_pu = np.concatenate([c[1] for c in converged])

    # deduplicate in a fixed (sorted) order
    uc = np.array([canonical_u(x) for x in all_u])
    order = np.lexsort((all_pu, uc))
    clusters: list[tuple[float, float]] = []
    for idx in order:
        cu, cpu = float(uc[idx]), float(all_pu[idx])
        for qu, qpu in clusters:
            if math.hypot(wrap_delta(cu - qu), cpu - qpu) < DEDUP_RADIUS:
                break
        else:
            clusters.append((cu, cpu))

    derivs = make_reduced_derivs(p)
    energy = make_reduced_energy(p)
    points = []
    for cu, cpu in clusters:
        fu, fpu = _newton_polish(p, cu, cpu)
        if not (rng.lo < fpu < rng.hi) or not math.isfinite(fu):
            continue
        gu1, gp1, _ = derivs(fu, fpu)
        residual = math.hypot(gu1, gp1)
        if residual >= _RESIDUAL_LIMIT:
            continue
        hess = _fd_hessian(p, fu, fpu)
        points.append(
            FixedPoint(
                u=canonical_u(fu),
                p_u=float(fpu),
                kind=classify(hess),
                energy=float(energy(fu, fpu)),
                hessian=hess,
                residual=float(residual),
            )
        )
    # a second dedup after polishing (polish can merge near-duplicates)
    points.sort(key=lambda f: (f.u, f.p_u))
    unique: list[FixedPoint] = []
    for fp in points:
        if not any(
            math.hypot(wrap_delta(fp.u - q.u), fp.p_u - q.p_u) < DEDUP_RADIUS
            for q in unique
        ):
            unique.append(fp)
    return unique


# ---------------------------------------------------------------------------
# Level sets (marching squares with periodic stitching in u)


def level_set(p: ModelParams, energy: float, resolution: int = 256) -> list[np.ndarray]:
    """Polylines of the contour H(u, p_u) = energy over one u period.

    Marching squares with linear interpolation on cell edges.  The grid is
    closed in u (the column at u = U_PERIOD repeats the u = 0 column), and
    contour pieces crossing that seam are stitched into single polylines
    whose u coordinate continues past the period.  Closed loops repeat
    their first vertex at the end.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    rng = p.momentum_range
    u_nodes = np.linspace(0.0, U_PERIOD, resolution + 1)
    pu_nodes = np.linspace(rng.lo, rng.hi, resolution + 1)
    H = reduced_energy_grid(p, u_nodes[:, None], pu_nodes[None, :])
    H[-1, :] = H[0, :]  # exact periodic seam

    above = H >= energy
    if np.all(above) or not np.any(above):
        return []

    # crossing point for every edge separating above/below nodes
    cross: dict[tuple, tuple[float, float]] = {}
    for i in range(resolution):
        for j in range(resolution + 1):
            if above[i, j] != above[i + 1, j]:
                t = (energy - H[i, j]) / (H[i + 1, j] - H[i, j])
                cross[("u", i, j)] = (
                    u_nodes[i] + t * (u_nodes[i + 1] - u_nodes[i]),
                    pu_nodes[j],
                )
    for i in range(resolution + 1):
        for j in range(resolution):
            if above[i, j] != above[i, j + 1]:
                t = (energy - H[i, j]) / (H[i, j + 1] - H[i, j])
                cross[("p", i, j)] = (
                    u_nodes[i],
                    pu_nodes[j] + t * (pu_nodes[j + 1] - pu_nodes[j]),
                )

    segments: list[tuple[tuple, tuple]] = []
    for i in range(resolution):
        for j in range(resolution):
            edges = []
            for key in (("u", i, j), ("p", i + 1, j), ("u", i, j + 1), ("p", i, j)):
                if key in cross:
                    edges.append(key)
            if len(edges) == 2:
                segments.append((edges[0], edges[1]))
            elif len(edges) == 4:
                # saddle cell: resolve pairing with the center value
                center = 0.25 * (H[i, j] + H[i + 1, j] + H[i, j + 1] + H[i + 1, j + 1])
                bottom, right, top, left = (
                    ("u", i, j),
                    ("p", i + 1, j),
                    ("u", i, j + 1),
                    ("p", i, j),
                )
                if (center >= energy) == bool(above[i, j]):
                    # corners (i,j),(i+1,j+1) connect through the center
                    segments.append((bottom, right))
                    segments.append((top, left))
                else:
                    segments.append((bottom, left))
                    segments.append((top, right))

    # chain segments through shared edges
    incident: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        incident.setdefault(a, []).append(idx)
        incident.setdefault(b, []).append(idx)

    used = [False] * len(segments)
    chains: list[list[tuple]] = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        first, second = segments[start]
        chain = [first, second]
        closed = False
        # extend forward from the end, then backward from the start
        for forward in (True, False):
            while not closed:
                tip = chain[-1] if forward else chain[0]
                nxt = None
                for idx in incident.get(tip, ()):
                    if not used[idx]:
                        nxt = idx
                        break
                if nxt is None:
                    break
                used[nxt] = True
                x, y = segments[nxt]
                other = y if x == tip else x
                if forward:
                    chain.append(other)
                else:
                    chain.insert(0, other)
                closed = chain[0] == chain[-1]
        chains.append(chain)

    # stitch across the periodic seam: right-border exits continue at u = 0
    def _is_right_border(edge):
        return edge[0] == "p" and edge[1] == resolution

    def _is_left_border(edge):
        return edge[0] == "p" and edge[1] == 0

    items = [{"edges": c, "closed": c[0] == c[-1] and len(c) > 2} for c in chains]
    progress = True
    while progress:
        progress = False
        for a in items:
            if a["closed"]:
                continue
            if not _is_right_border(a["edges"][-1]):
                if _is_right_border(a["edges"][0]):
                    a["edges"].reverse()
                else:
                    continue
            j = a["edges"][-1][2]
            partner_key = ("p", 0, j)
            if a["edges"][0] == partner_key:
                # the chain continues into its own periodic image
                a["closed"] = "periodic"
                continue
            joined = False
            for b in items:
                if b is a or b["closed"]:
                    continue
                if b["edges"][-1] == partner_key and not _is_left_border(b["edges"][0]):
                    b["edges"].reverse()
                if b["edges"][0] == partner_key:
                    a["edges"].extend(b["edges"])
                    items.remove(b)
                    joined = True
                    break
            if joined:
                progress = True
                break

    polylines = []
    for item in items:
        pts = []
        shift = 0.0
        prev_u = None
        for edge in item["edges"]:
            x, y = cross[edge]
            if prev_u is not None and prev_u - (x + shift) > 0.5 * U_PERIOD:
                shift += U_PERIOD
            pts.append((x + shift, y))
            prev_u = x + shift
        polylines.append(np.array(pts))
    polylines.sort(key=lambda a: (float(a[0, 0]), float(a[0, 1]), len(a)))
    return polylines


# ---------------------------------------------------------------------------
# Separatrix tracing


def trace_separatrices(
    p: ModelParams,
    saddles: list[FixedPoint],
    dt: float = 1e-3,
    eps: float = 1e-6,
    match_radius: float = MATCH_RADIUS,
    arm_radius: float = 1e-2,
    max_arc: float | None = None,
    record_ds: float | None = None,
) -> list[Separatrix]:
    """Trace the invariant manifolds of every saddle.

    Four branches per saddle are seeded at +-eps along the stable and
    unstable eigenvectors of the linearized field and integrated (backward
    for the stable pair) with the implicit midpoint rule until they re-enter
    a saddle's matching radius, leave the admissible region, or exhaust the
    arc-length budget (the last case is flagged incomplete but kept).
    Branches are then grouped into connected components over the saddles
    they join, giving one Separatrix record per component.
    """
    saddles = [s for s in saddles if s.kind == "saddle"]
    if not saddles:
        return []
    rng = p.momentum_range
    if max_arc is None:
        max_arc = 24.0 * (U_PERIOD + rng.width)
    if record_ds is None:
        record_ds = max(1e-4, (U_PERIOD + rng.width) / 4000.0)

    derivs = make_reduced_derivs(p)
    energy = make_reduced_energy(p)

    branches: list[Branch] = []
    for s_idx, fp in enumerate(saddles):
        hess = fp.hessian
        lin = np.array(
            [[hess[1, 0], hess[1, 1]], [-hess[0, 0], -hess[0, 1]]]
        )  # d/dt dz = J * Hess * dz
        eigvals, eigvecs = np.linalg.eig(lin)
        eigvals = np.real(eigvals)
        eigvecs = np.real(eigvecs)
        for col in np.argsort(eigvals):
            lam = eigvals[col]
            if abs(lam) < 1e-12:
                continue
            direction = eigvecs[:, col]
            direction = direction / np.hypot(direction[0], direction[1])
            time_dir = 1.0 if lam > 0 else -1.0
            for sign in (1.0, -1.0):
                branch = _trace_branch(
                    p,
                    derivs,
                    energy,
                    saddles,
                    s_idx,
                    seed=(fp.u + sign * eps * direction[0], fp.p_u + sign * eps * direction[1]),
                    dt=dt * time_dir,
                    match_radius=match_radius,
                    arm_radius=arm_radius,
                    max_arc=max_arc,
                    record_ds=record_ds,
                )
                branches.append(branch)

    # connected components over saddles joined by saddle-terminated branches
    parent = list(range(len(saddles)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for br in branches:
        if br.end_saddle is not None:
            a, b = find(br.start_saddle), find(br.end_saddle)
            if a != b:
                parent[max(a, b)] = min(a, b)

    groups: dict[int, list[int]] = {}
    for i in range(len(saddles)):
        groups.setdefault(find(i), []).append(i)

    out = []
    for root in sorted(groups):
        members = groups[root]
        grp_branches = [br for br in branches if find(br.start_saddle) == root]
        refs = tuple(saddles[i] for i in members)
        topology = "saddle-loop" if len(members) == 1 else "saddle-connection"
        out.append(
            Separatrix(
                energy=saddles[members[0]].energy,
                saddle_refs=refs,
                branches=grp_branches,
                topology=topology,
            )
        )
    return out


def _trace_branch(
    p,
    derivs,
    energy,
    saddles,
    start_idx,
    seed,
    dt,
    match_radius,
    arm_radius,
    max_arc,
    record_ds,
):
    u, pu = seed
    e0 = saddles[start_idx].energy
    pts = [(u, pu)]
    max_err = abs(energy(u, pu) - e0)
    arc = 0.0
    since_record = 0.0
    armed = False
    reason = "budget"
    end_saddle = None
    max_steps = 2_000_000  # hard cap; normal runs stop on arc or saddle match
    for _ in range(max_steps):
        try:
            du, dpu, _ = _midpoint_displacement_raw(derivs, u, pu, dt)
        except InadmissibleMomentumError:
            reason = "boundary"
            break
        u += du
        pu += dpu
        step_len = math.hypot(du, dpu)
        arc += step_len
        since_record += step_len
        if since_record >= record_ds:
            pts.append((u, pu))
            err = abs(energy(u, pu) - e0)
            if err > max_err:
                max_err = err
            since_record = 0.0
        dists = [s.distance_to(u, pu) for s in saddles]
        if not armed:
            if min(dists) > arm_radius:
                armed = True
        else:
            nearest = int(np.argmin(dists))
            if dists[nearest] < match_radius:
                reason = "saddle"
                end_saddle = nearest
                break
        if arc > max_arc:
            reason = "budget"
            break
    if pts[-1] != (u, pu):
        pts.append((u, pu))
    err = abs(energy(u, pu) - e0)
    if err > max_err:
        max_err = err
    return Branch(
        points=np.array(pts),
        start_saddle=start_idx,
        end_saddle=end_saddle,
        reason=reason,
        complete=(reason != "budget"),
        max_energy_error=float(max_err),
    )


# ---------------------------------------------------------------------------
# Rendering


def _wrapped_pieces(points: np.ndarray, u_span: float) -> list[np.ndarray]:
    """Map u into [0, u_span) and split the polyline at wrap jumps."""
    u = np.mod(points[:, 0], u_span)
    pieces = []
    start = 0
    for k in range(1, len(u)):
        if abs(u[k] - u[k - 1]) > 0.5 * u_span:
            if k - start >= 2:
                pieces.append(np.column_stack([u[start:k], points[start:k, 1]]))
            start = k
    if len(u) - start >= 2:
        pieces.append(np.column_stack([u[start:], points[start:, 1]]))
    return pieces


def render_portrait(
    p: ModelParams,
    fixed_points: list[FixedPoint],
    separatrices: list[Separatrix],
    sample_orbits: list = (),
    levels: int = 12,
    resolution: int = 201,
    u_periods: int = 1,
) -> str:
    """Layered SVG document of the phase portrait.

    Background level-set curves, separatrices in a distinct stroke, saddle
    cross markers, center dot markers, then sample orbits; axes labeled u
    and p_u (= l_z/sqrt2).  Deterministic: fixed inputs give byte-identical
    output.
    """
    rng = p.momentum_range
    u_span = u_periods * U_PERIOD
    pad = 0.04 * rng.width if rng.width > 0 else 0.1
    canvas = SvgCanvas(
        x_min=0.0, x_max=u_span, y_min=rng.lo - pad, y_max=rng.hi + pad
    )
    canvas.axes("u", "p_u = l_z/&#8730;2")
    canvas.clipped_group_start()

    level_polys: list[np.ndarray] = []
    if levels > 0:
        u_nodes = np.linspace(0.0, U_PERIOD, 101)
        pu_nodes = np.linspace(rng.lo, rng.hi, 101)
        grid = reduced_energy_grid(p, u_nodes[:, None], pu_nodes[None, :])
        if float(np.max(grid) - np.min(grid)) > 1e-14 * (1.0 + abs(float(np.mean(grid)))):
            qs = np.linspace(0.04, 0.96, levels)
            energies = sorted(set(float(np.quantile(grid, q)) for q in qs))
            for e in energies:
                level_polys.extend(level_set(p, e, resolution))
    for poly in level_polys:
        for period in range(u_periods):
            for piece in _wrapped_pieces(poly, U_PERIOD):
                shifted = piece.copy()
                shifted[:, 0] += period * U_PERIOD
                canvas.polyline(shifted, stroke="#b8c4d8", stroke_width=0.8)

    for sep in separatrices:
        for br in sep.branches:
            for period in range(u_periods):
                for piece in _wrapped_pieces(br.points, U_PERIOD):
                    shifted = piece.copy()
                    shifted[:, 0] += period * U_PERIOD
                    canvas.polyline(shifted, stroke="#c03020", stroke_width=1.5)

    for orbit in sample_orbits:
        pts = np.column_stack([orbit.column("u"), orbit.column("p_u")])
        for period in range(u_periods):
            for piece in _wrapped_pieces(pts, U_PERIOD):
                shifted = piece.copy()
                shifted[:, 0] += period * U_PERIOD
                canvas.polyline(shifted, stroke="#2060b0", stroke_width=1.1)

    for fp in fixed_points:
        for period in range(u_periods):
            x = fp.u + period * U_PERIOD
            if fp.kind == "saddle":
                canvas.cross(x, fp.p_u, 5.0, stroke="#c03020")
            elif fp.kind == "center":
                canvas.circle(x, fp.p_u, 3.5, fill="#1a1a1a")
            else:
                canvas.circle(x, fp.p_u, 3.5, fill="#888888")
    canvas.group_end()
    return canvas.render()
