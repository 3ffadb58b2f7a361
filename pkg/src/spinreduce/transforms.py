"""Coordinate chain between spin space and the reduced canonical chart.

The chain runs

    (m, l)  <->  (g, h)  <->  (g, g_z, phi_g; h, h_z, phi_h)  <->  (u, p_u, v, p_v)

with g = (m + l)/2 and h = (m - l)/2, cylindrical coordinates on each of
g and h, and the canonical rotation

    u = (phi_g - phi_h)/sqrt2,   p_u = (g_z - h_z)/sqrt2,
    v = (phi_g + phi_h)/sqrt2,   p_v = (g_z + h_z)/sqrt2.

Two exact linear identities hold along the chain and are used as test
anchors: p_u = l_z/sqrt2 and p_v = m_z/sqrt2.

The cylindrical chart is singular where a transverse component vanishes
(longitude angle undefined); those states raise
:class:`SingularConfigurationError` rather than returning arbitrary angles.
Longitude angles use the full-quadrant arctangent and are canonicalized to
[0, 2*pi); lifted trajectories keep angles continuous (unwrapped) so the
space curves come out smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import Trajectory
from .errors import InadmissibleMomentumError, SingularConfigurationError
from .model import SQRT2, MLState, ModelParams, ReducedState, RADICAND_TOL

__all__ = [
    "TRANSVERSE_TOL",
    "CylState",
    "ReductionResult",
    "ml_to_gh",
    "gh_to_ml",
    "gh_to_cyl",
    "cyl_to_gh",
    "cyl_to_canonical",
    "canonical_to_cyl",
    "ml_to_reduced",
    "lift_point",
    "lift_trajectory",
]

#: Transverse norms below this are treated as chart singularities.
TRANSVERSE_TOL = 1e-12

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CylState:
    """Cylindrical chart on the pair (g, h): moduli, z-components, longitudes."""

    g_mag: float
    g_z: float
    phi_g: float
    h_mag: float
    h_z: float
    phi_h: float

    def __post_init__(self):
        if self.g_mag < 0.0 or self.h_mag < 0.0:
            raise ValueError("moduli must be non-negative")
        if abs(self.g_z) > self.g_mag * (1.0 + 1e-9) + 1e-12:
            raise ValueError(f"|g_z|={abs(self.g_z)} exceeds modulus {self.g_mag}")
        if abs(self.h_z) > self.h_mag * (1.0 + 1e-9) + 1e-12:
            raise ValueError(f"|h_z|={abs(self.h_z)} exceeds modulus {self.h_mag}")
        object.__setattr__(self, "phi_g", float(self.phi_g % _TWO_PI))
        object.__setattr__(self, "phi_h", float(self.phi_h % _TWO_PI))


@dataclass(frozen=True)
class ReductionResult:
    """A reduced state together with the conserved quantities it came with."""

    state: ReducedState
    g: float
    h: float
    p_v: float

    def params_like(self, coeffs: ModelParams) -> ModelParams:
        """Copy the energy coefficients, replacing (g, h, p_v) with ours."""
        return replace(coeffs, g=self.g, h=self.h, p_v=self.p_v)


def ml_to_gh(st: MLState) -> tuple[np.ndarray, np.ndarray]:
    """g = (m + l)/2, h = (m - l)/2 (exact linear map)."""
    g = 0.5 * (st.m + st.l)
    h = 0.5 * (st.m - st.l)
    return g, h


def gh_to_ml(g, h) -> MLState:
    """Inverse of :func:`ml_to_gh`: m = g + h, l = g - h."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    return MLState(m=g + h, l=g - h)


def _to_cyl_one(v: np.ndarray, label: str) -> tuple[float, float, float]:
    transverse = math.hypot(v[0], v[1])
    if transverse < TRANSVERSE_TOL:
        raise SingularConfigurationError(
            f"{label} has transverse norm {transverse:.3e}; longitude undefined"
        )
    mag = math.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    phi = math.atan2(v[1], v[0]) % _TWO_PI
    return mag, float(v[2]), phi


def gh_to_cyl(g, h) -> CylState:
    """Moduli, z-components and longitude angles of the pair (g, h).

    Raises SingularConfigurationError when either transverse norm is below
    TRANSVERSE_TOL.
    """
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    g_mag, g_z, phi_g = _to_cyl_one(g, "g")
    h_mag, h_z, phi_h = _to_cyl_one(h, "h")
    return CylState(g_mag=g_mag, g_z=g_z, phi_g=phi_g, h_mag=h_mag, h_z=h_z, phi_h=phi_h)


def cyl_to_gh(cyl: CylState) -> tuple[np.ndarray, np.ndarray]:
    """Rebuild the Cartesian vectors from the cylindrical chart."""
    tg = math.sqrt(max(cyl.g_mag**2 - cyl.g_z**2, 0.0))
    th = math.sqrt(max(cyl.h_mag**2 - cyl.h_z**2, 0.0))
    g = np.array([tg * math.cos(cyl.phi_g), tg * math.sin(cyl.phi_g), cyl.g_z])
    h = np.array([th * math.cos(cyl.phi_h), th * math.sin(cyl.phi_h), cyl.h_z])
    return g, h


def cyl_to_canonical(cyl: CylState) -> ReductionResult:
    """Rotate (phi, z) pairs into the canonical variables.

    u = (phi_g - phi_h)/sqrt2, p_u = (g_z - h_z)/sqrt2, v = (phi_g +
    phi_h)/sqrt2, p_v = (g_z + h_z)/sqrt2; the moduli pass through as the
    Casimir values.
    """
    u = (cyl.phi_g - cyl.phi_h) / SQRT2
    p_u = (cyl.g_z - cyl.h_z) / SQRT2
    v = (cyl.phi_g + cyl.phi_h) / SQRT2
    p_v = (cyl.g_z + cyl.h_z) / SQRT2
    return ReductionResult(
        state=ReducedState(u=u, p_u=p_u, v=v), g=cyl.g_mag, h=cyl.h_mag, p_v=p_v
    )


def canonical_to_cyl(rs: ReducedState, g: float, h: float, p_v: float) -> CylState:
    """Inverse canonical rotation; requires the cyclic angle v."""
    if rs.v is None:
        raise ValueError("cyclic angle v is required to leave the reduced chart")
    phi_g = (rs.v + rs.u) / SQRT2
    phi_h = (rs.v - rs.u) / SQRT2
    g_z = (rs.p_u + p_v) / SQRT2
    h_z = (p_v - rs.p_u) / SQRT2
    return CylState(g_mag=g, g_z=g_z, phi_g=phi_g, h_mag=h, h_z=h_z, phi_h=phi_h)


def ml_to_reduced(st: MLState) -> ReductionResult:
    """Full chain (m, l) -> (u, p_u, v) plus the conserved (g, h, p_v).

    By construction p_u = l_z/sqrt2 and p_v = m_z/sqrt2.  Raises
    SingularConfigurationError when m + l or m - l has a (near-)zero
    transverse part.
    """
    g, h = ml_to_gh(st)
    return cyl_to_canonical(gh_to_cyl(g, h))


def lift_point(rs: ReducedState, p: ModelParams) -> MLState:
    """Rebuild an (m, l) state from a reduced state carrying v.

    The transverse radii come from the Casimir moduli in ``p``; inadmissible
    momenta raise InadmissibleMomentumError.
    """
    if rs.v is None:
        raise ValueError("cyclic angle v is required to lift a reduced state")
    g_z = (rs.p_u + p.p_v) / SQRT2
    h_z = (p.p_v - rs.p_u) / SQRT2
    tg2 = p.g * p.g - g_z * g_z
    th2 = p.h * p.h - h_z * h_z
    # same admissibility as the reduced radicands, halved scale
    if tg2 < -0.5 * RADICAND_TOL or th2 < -0.5 * RADICAND_TOL:
        raise InadmissibleMomentumError(
            f"p_u={rs.p_u} inadmissible for g={p.g}, h={p.h}, p_v={p.p_v}"
        )
    tg = math.sqrt(max(tg2, 0.0))
    th = math.sqrt(max(th2, 0.0))
    phi_g = (rs.v + rs.u) / SQRT2
    phi_h = (rs.v - rs.u) / SQRT2
    g = np.array([tg * math.cos(phi_g), tg * math.sin(phi_g), g_z])
    h = np.array([th * math.cos(phi_h), th * math.sin(phi_h), h_z])
    return MLState(m=g + h, l=g - h)


def lift_trajectory(traj: Trajectory, p: ModelParams) -> Trajectory:
    """Lift a reduced trajectory (with v samples) to spin space pointwise.

    Returns an "ml" trajectory whose conserved log holds the energy, m_z and
    both Casimirs recomputed from the lifted states.
    """
    from .dynamics import ml_conserved_log  # local import to avoid a cycle

    if traj.kind != "reduced":
        raise ValueError(f"expected a reduced trajectory, got kind={traj.kind!r}")
    if "v" not in traj.columns:
        raise ValueError("trajectory lacks the cyclic angle column 'v'")
    iu = traj.columns.index("u")
    ipu = traj.columns.index("p_u")
    iv = traj.columns.index("v")
    states = np.empty((len(traj.times), 6))
    for k in range(len(traj.times)):
        st = lift_point(
            ReducedState(
                u=float(traj.states[k, iu]),
                p_u=float(traj.states[k, ipu]),
                v=float(traj.states[k, iv]),
            ),
            p,
        )
        states[k, :3] = st.m
        states[k, 3:] = st.l
    conserved = ml_conserved_log(p, states)
    return Trajectory(
        kind="ml",
        columns=("m_x", "m_y", "m_z", "l_x", "l_y", "l_z"),
        times=traj.times.copy(),
        states=states,
        conserved=conserved,
        status=traj.status,
    )
