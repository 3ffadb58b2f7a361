"""Physical parameters, energies, gradients and vector fields.

Three energy functions live here:

* the four-sublattice quadratic energy in the moments s_1..s_4,
* the Hamiltonian in the pair (m, l),

      H = (A/2) l^2 + (B/2) m^2 + (alpha/2) l_z^2 + (b/2) m_z^2
          + beta (l_x m_y - l_y m_x) + (C/4) (l^2)^2,

* the reduced one-degree-of-freedom Hamiltonian in (u, p_u) obtained from
  the axial symmetry, with the Casimir magnitudes g, h and the conserved
  cyclic momentum p_v entering as parameters:

      R_g = sqrt(2 g^2 - (p_u + p_v)^2),  R_h = sqrt(2 h^2 - (p_u - p_v)^2)
      W   = -cos(sqrt2 u) R_g R_h + g^2 + h^2 + p_u^2 - p_v^2     (= l^2)
      M   =  cos(sqrt2 u) R_g R_h + g^2 + h^2 - p_u^2 + p_v^2     (= m^2)
      H   = (A/2) W + (B/2) M + alpha p_u^2 + b p_v^2
            - beta sin(sqrt2 u) R_g R_h + (C/4) W^2.

Sign convention: xdot = {x, H}.  The closed-form vector fields below are an
optimization; :func:`spinreduce.algebra.bracket_vector_field` is the
normative definition and the test suite checks the two against each other.

The reduced Hamiltonian is periodic in u with period sqrt(2)*pi, and defined
for momenta with both radicands non-negative.  Radicands in [-1e-12, 0] are
clamped to zero (round-off at the boundary); more negative values raise
:class:`InadmissibleMomentumError`.  Gradients additionally require strictly
positive radicands: the chart is singular where a transverse component
vanishes, so boundary gradients raise rather than extrapolate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleMomentumError, InadmissibleParameterError

__all__ = [
    "SQRT2",
    "U_PERIOD",
    "RADICAND_TOL",
    "ModelParams",
    "SublatticeParams",
    "MLState",
    "ReducedState",
    "MomentumRange",
    "admissible_momentum_range",
    "canonical_u",
    "wrap_delta",
    "energy_sublattice",
    "energy_ml",
    "grad_ml",
    "energy_cylindrical",
    "energy_reduced",
    "grad_reduced",
    "vector_field_full",
    "vector_field_reduced",
    "reduced_energy_grid",
    "make_reduced_derivs",
    "make_reduced_energy",
    "make_full_field",
]

SQRT2 = math.sqrt(2.0)
#: Period of the reduced coordinate u (the energy depends on u only through
#: cos(sqrt2 u) and sin(sqrt2 u)).
U_PERIOD = SQRT2 * math.pi
#: Radicands in [-RADICAND_TOL, 0] are treated as exactly 0.
RADICAND_TOL = 1e-12


def canonical_u(u: float) -> float:
    """Representative of u in the fundamental domain [0, U_PERIOD)."""
    return float(u % U_PERIOD)


def wrap_delta(d: float, period: float = U_PERIOD) -> float:
    """Reduce a coordinate difference to (-period/2, period/2]."""
    return float(-((period / 2.0 - d) % period) + period / 2.0)


@dataclass(frozen=True)
class MomentumRange:
    """Closed admissible interval for the reduced momentum p_u."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def degenerate(self) -> bool:
        """True when the interval collapses to (numerically) a single point."""
        return self.width < 1e-12

    def contains(self, p_u: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= p_u <= self.hi + tol

    def interior(self, margin: float) -> "MomentumRange":
        """Shrink both ends by an absolute margin."""
        return MomentumRange(self.lo + margin, self.hi - margin)


def _momentum_range(g: float, h: float, p_v: float) -> MomentumRange:
    lo = max(-SQRT2 * g - p_v, -SQRT2 * h + p_v)
    hi = min(SQRT2 * g - p_v, SQRT2 * h + p_v)
    return MomentumRange(lo, hi)


@dataclass(frozen=True)
class ModelParams:
    """Energy coefficients plus the conserved quantities of a reduced run.

    A, B are the exchange coefficients of the l^2 and m^2 terms, alpha and b
    the axial anisotropies of l_z and m_z, beta the antisymmetric-exchange
    coefficient, C the quartic coefficient of (l^2)^2.  g and h are the
    magnitudes of the Casimir vectors (m + l)/2 and (m - l)/2, and p_v the
    conserved cyclic momentum m_z / sqrt2.

    Construction fails if the admissible p_u interval implied by (g, h, p_v)
    is empty.  Instances are immutable.
    """

    A: float
    B: float
    alpha: float
    b: float
    beta: float
    C: float
    g: float
    h: float
    p_v: float

    def __post_init__(self):
        for name in ("A", "B", "alpha", "b", "beta", "C", "g", "h", "p_v"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise InadmissibleParameterError(f"{name} must be a real number")
            if not math.isfinite(v):
                raise InadmissibleParameterError(f"{name} must be finite")
            object.__setattr__(self, name, float(v))
        if self.g < 0.0 or self.h < 0.0:
            raise InadmissibleParameterError("g and h must be non-negative")
        r = _momentum_range(self.g, self.h, self.p_v)
        if r.lo > r.hi:
            raise InadmissibleParameterError(
                f"admissible p_u interval is empty: [{r.lo}, {r.hi}]"
            )

    @property
    def momentum_range(self) -> MomentumRange:
        return _momentum_range(self.g, self.h, self.p_v)


def admissible_momentum_range(p: ModelParams) -> MomentumRange:
    """Closed interval of p_u for which both radicands are non-negative.

    [max(-sqrt2 g - p_v, -sqrt2 h + p_v), min(sqrt2 g - p_v, sqrt2 h + p_v)];
    an empty interval is rejected already at ModelParams construction.
    """
    return p.momentum_range


@dataclass(frozen=True)
class SublatticeParams:
    """Coefficients of the four-sublattice quadratic energy."""

    A1: float
    A2: float
    A3: float
    B: float
    alpha1: float
    alpha2: float
    alpha3: float
    b: float
    beta1: float
    beta2: float


@dataclass(frozen=True)
class MLState:
    """Pair of order-parameter vectors: total moment m and staggered l."""

    m: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        for name in ("m", "l"):
            v = np.array(getattr(self, name), dtype=float).reshape(3)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def casimir_plus(self) -> float:
        """(m + l)^2, conserved under any flow of this bracket."""
        s = self.m + self.l
        return float(s @ s)

    @property
    def casimir_minus(self) -> float:
        """(m - l)^2, conserved under any flow of this bracket."""
        d = self.m - self.l
        return float(d @ d)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.m, self.l])


@dataclass(frozen=True)
class ReducedState:
    """Canonical pair (u, p_u), optionally carrying the cyclic angle v.

    u is meaningful modulo U_PERIOD; values outside [0, U_PERIOD) are
    accepted (trajectories keep u unwrapped for continuity).  Admissibility
    of p_u depends on ModelParams and is checked by the operations.
    """

    u: float
    p_u: float
    v: float | None = None


# ---------------------------------------------------------------------------
# Four-sublattice energy


def energy_sublattice(p: SublatticeParams, s1, s2, s3, s4) -> float:
    """Quadratic magnetic energy of the four sublattice moments.

    The moments combine into m = s1+s2+s3+s4 and the staggered vectors
    l1 = s1-s2-s3+s4, l2 = s1-s2+s3-s4, l3 = s1+s2-s3-s4; the energy is

        E = A1 l1^2 + A2 l2^2 + A3 l3^2 + B m^2
            + alpha1 l1z^2 + alpha2 l2z^2 + alpha3 l3z^2 + b m_z^2
            + beta1 (l1x m_y - l1y m_x) + beta2 (l2x l3y - l2y l3x),

    invariant under a simultaneous rotation of all four moments about z.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    s3 = np.asarray(s3, dtype=float)
    s4 = np.asarray(s4, dtype=float)
    m = s1 + s2 + s3 + s4
    l1 = s1 - s2 - s3 + s4
    l2 = s1 - s2 + s3 - s4
    l3 = s1 + s2 - s3 - s4
    return float(
        p.A1 * (l1 @ l1)
        + p.A2 * (l2 @ l2)
        + p.A3 * (l3 @ l3)
        + p.B * (m @ m)
        + p.alpha1 * l1[2] ** 2
        + p.alpha2 * l2[2] ** 2
        + p.alpha3 * l3[2] ** 2
        + p.b * m[2] ** 2
        + p.beta1 * (l1[0] * m[1] - l1[1] * m[0])
        + p.beta2 * (l2[0] * l3[1] - l2[1] * l3[0])
    )


# ---------------------------------------------------------------------------
# (m, l) Hamiltonian


def energy_ml(p: ModelParams, st: MLState) -> float:
    """H = (A/2)l^2 + (B/2)m^2 + (alpha/2)l_z^2 + (b/2)m_z^2
    + beta (l_x m_y - l_y m_x) + (C/4)(l^2)^2."""
    m, l = st.m, st.l
    m2 = float(m @ m)
    l2 = float(l @ l)
    return (
        0.5 * p.A * l2
        + 0.5 * p.B * m2
        + 0.5 * p.alpha * l[2] ** 2
        + 0.5 * p.b * m[2] ** 2
        + p.beta * (l[0] * m[1] - l[1] * m[0])
        + 0.25 * p.C * l2 * l2
    )


def grad_ml(p: ModelParams, st: MLState) -> tuple[np.ndarray, np.ndarray]:
    """Analytic (dH/dm, dH/dl) of :func:`energy_ml`.

    dH/dm = B m + b m_z e_z + beta (z_hat x l)
    dH/dl = A l + alpha l_z e_z + beta (m x z_hat) + C l^2 l
    """
    m, l = st.m, st.l
    l2 = float(l @ l)
    gm = p.B * m + np.array([-p.beta * l[1], p.beta * l[0], p.b * m[2]])
    gl = (p.A + p.C * l2) * l + np.array(
        [p.beta * m[1], -p.beta * m[0], p.alpha * l[2]]
    )
    return gm, gl


def vector_field_full(p: ModelParams, st: MLState) -> tuple[np.ndarray, np.ndarray]:
    """Equations of motion of (m, l) in cross-product form.

    mdot = dH/dm x m + dH/dl x l,  ldot = dH/dm x l + dH/dl x m.
    """
    gm, gl = grad_ml(p, st)
    mdot = np.cross(gm, st.m) + np.cross(gl, st.l)
    ldot = np.cross(gm, st.l) + np.cross(gl, st.m)
    return mdot, ldot


def make_full_field(p: ModelParams):
    """Scalar-arithmetic right-hand side f(t, y) for the 6-D flow.

    y = (m_x, m_y, m_z, l_x, l_y, l_z); written out component-wise to keep
    adaptive integration cheap.
    """
    A, B, alpha, b, beta, C = p.A, p.B, p.alpha, p.b, p.beta, p.C

    def field(t, y):
        mx, my, mz, lx, ly, lz = y
        l2 = lx * lx + ly * ly + lz * lz
        gmx = B * mx - beta * ly
        gmy = B * my + beta * lx
        gmz = B * mz + b * mz
        al = A + C * l2
        glx = al * lx + beta * my
        gly = al * ly - beta * mx
        glz = al * lz + alpha * lz
        # mdot = gm x m + gl x l
        mdx = gmy * mz - gmz * my + gly * lz - glz * ly
        mdy = gmz * mx - gmx * mz + glz * lx - glx * lz
        mdz = gmx * my - gmy * mx + glx * ly - gly * lx
        # ldot = gm x l + gl x m
        ldx = gmy * lz - gmz * ly + gly * mz - glz * my
        ldy = gmz * lx - gmx * lz + glz * mx - glx * mz
        ldz = gmx * ly - gmy * lx + glx * my - gly * mx
        return (mdx, mdy, mdz, ldx, ldy, ldz)

    return field


# ---------------------------------------------------------------------------
# Cylindrical-chart Hamiltonian (pre-canonical form, kept as a cross-check)


def energy_cylindrical(
    p: ModelParams,
    g_mag: float,
    g_z: float,
    phi_g: float,
    h_mag: float,
    h_z: float,
    phi_h: float,
) -> float:
    """The Hamiltonian in the chart (g, g_z, phi_g; h, h_z, phi_h).

    This is the same energy as :func:`energy_reduced` expressed before the
    canonical (u, p_u, v, p_v) change of variables; the moduli are taken
    from the arguments, not from ``p``.  It exists to pin down numerically
    that the alpha- and b-terms of the reduced form carry no extra 1/2:
    (alpha/2)(g_z - h_z)^2 = alpha p_u^2.
    """
    tg = g_mag * g_mag - g_z * g_z
    th = h_mag * h_mag - h_z * h_z
    if tg < -RADICAND_TOL or th < -RADICAND_TOL:
        raise InadmissibleMomentumError("z-component exceeds modulus")
    rt = math.sqrt(max(tg, 0.0)) * math.sqrt(max(th, 0.0))
    dphi = phi_g - phi_h
    cross = 2.0 * rt * math.cos(dphi)
    zz = 2.0 * g_z * h_z
    sq = g_mag * g_mag + h_mag * h_mag
    w = -cross - zz + sq  # l^2
    mm = cross + zz + sq  # m^2
    return (
        0.5 * p.A * w
        + 0.5 * p.B * mm
        + 0.5 * p.alpha * (g_z - h_z) ** 2
        + 0.5 * p.b * (g_z + h_z) ** 2
        - 2.0 * p.beta * rt * math.sin(dphi)
        + 0.25 * p.C * w * w
    )


# ---------------------------------------------------------------------------
# Reduced Hamiltonian


def _radicands(g: float, h: float, p_v: float, p_u: float) -> tuple[float, float]:
    spl = p_u + p_v
    smn = p_u - p_v
    return 2.0 * g * g - spl * spl, 2.0 * h * h - smn * smn


def make_reduced_energy(p: ModelParams):
    """Fast scalar closure u, p_u -> H for the reduced Hamiltonian."""
    A, B, alpha, b, beta, C = p.A, p.B, p.alpha, p.b, p.beta, p.C
    g, h, p_v = p.g, p.h, p.p_v
    gh2 = g * g + h * h
    pv2 = p_v * p_v
    sqrt = math.sqrt
    cos = math.cos
    sin = math.sin

    def energy(u: float, p_u: float) -> float:
        sg, sh = _radicands(g, h, p_v, p_u)
        if sg < -RADICAND_TOL or sh < -RADICAND_TOL:
            raise InadmissibleMomentumError(
                f"p_u={p_u} outside the admissible interval (radicands {sg}, {sh})"
            )
        P = sqrt(max(sg, 0.0)) * sqrt(max(sh, 0.0))
        su = SQRT2 * u
        c = cos(su)
        w = gh2 + p_u * p_u - pv2 - c * P
        mm = gh2 - p_u * p_u + pv2 + c * P
        return (
            0.5 * A * w
            + 0.5 * B * mm
            + alpha * p_u * p_u
            + b * pv2
            - beta * sin(su) * P
            + 0.25 * C * w * w
        )

    return energy


def make_reduced_derivs(p: ModelParams, flip_u_sign: bool = False):
    """Fast scalar closure u, p_u -> (dH/du, dH/dp_u, dH/dp_v).

    Raises InadmissibleMomentumError at or beyond the admissible boundary
    (the gradient has a coordinate singularity there).  ``flip_u_sign`` is a
    fault-injection hook for negative-control tests: it negates dH/du.
    """
    A, B, alpha, b, beta, C = p.A, p.B, p.alpha, p.b, p.beta, p.C
    g, h, p_v = p.g, p.h, p.p_v
    gh2 = g * g + h * h
    pv2 = p_v * p_v
    half_AmB = 0.5 * (A - B)
    sqrt = math.sqrt
    cos = math.cos
    sin = math.sin
    sign = -1.0 if flip_u_sign else 1.0

    def derivs(u: float, p_u: float) -> tuple[float, float, float]:
        spl = p_u + p_v
        smn = p_u - p_v
        sg = 2.0 * g * g - spl * spl
        sh = 2.0 * h * h - smn * smn
        if sg <= 0.0 or sh <= 0.0:
            raise InadmissibleMomentumError(
                f"gradient undefined at p_u={p_u}: radicands ({sg}, {sh})"
            )
        Rg = sqrt(sg)
        Rh = sqrt(sh)
        P = Rg * Rh
        su = SQRT2 * u
        c = cos(su)
        s = sin(su)
        w = gh2 + p_u * p_u - pv2 - c * P
        dP_pu = -spl * Rh / Rg - smn * Rg / Rh
        dP_pv = -spl * Rh / Rg + smn * Rg / Rh
        H_u = SQRT2 * P * (half_AmB * s - beta * c + 0.5 * C * w * s)
        w_pu = 2.0 * p_u - c * dP_pu
        H_pu = (
            0.5 * A * w_pu
            + 0.5 * B * (c * dP_pu - 2.0 * p_u)
            + 2.0 * alpha * p_u
            - beta * s * dP_pu
            + 0.5 * C * w * w_pu
        )
        w_pv = -2.0 * p_v - c * dP_pv
        H_pv = (
            0.5 * A * w_pv
            + 0.5 * B * (c * dP_pv + 2.0 * p_v)
            + 2.0 * b * p_v
            - beta * s * dP_pv
            + 0.5 * C * w * w_pv
        )
        return sign * H_u, H_pu, H_pv

    return derivs


def energy_reduced(p: ModelParams, st: ReducedState) -> float:
    """Reduced Hamiltonian H(u, p_u; g, h, p_v).  See the module docstring."""
    return make_reduced_energy(p)(st.u, st.p_u)


def grad_reduced(p: ModelParams, st: ReducedState) -> tuple[float, float]:
    """Analytic (dH/du, dH/dp_u); requires a strictly interior state."""
    H_u, H_pu, _ = make_reduced_derivs(p)(st.u, st.p_u)
    return H_u, H_pu


def vector_field_reduced(p: ModelParams, st: ReducedState) -> tuple[float, float, float]:
    """Canonical equations (udot, p_udot, vdot) of the reduced system.

    udot = dH/dp_u, p_udot = -dH/du; vdot = dH/dp_v is the precession rate
    of the cyclic angle, needed to lift trajectories back to spin space.
    """
    H_u, H_pu, H_pv = make_reduced_derivs(p)(st.u, st.p_u)
    return H_pu, -H_u, H_pv


def reduced_energy_grid(p: ModelParams, u, p_u) -> np.ndarray:
    """Vectorized reduced Hamiltonian over broadcastable arrays (u, p_u).

    Grid evaluation for contouring and brute-force scans; inputs must stay
    inside the admissible momentum interval (round-off clamp included).
    """
    u = np.asarray(u, dtype=float)
    p_u = np.asarray(p_u, dtype=float)
    spl = p_u + p.p_v
    smn = p_u - p.p_v
    sg = 2.0 * p.g * p.g - spl * spl
    sh = 2.0 * p.h * p.h - smn * smn
    if np.any(sg < -RADICAND_TOL) or np.any(sh < -RADICAND_TOL):
        raise InadmissibleMomentumError("grid exceeds the admissible interval")
    P = np.sqrt(np.clip(sg, 0.0, None)) * np.sqrt(np.clip(sh, 0.0, None))
    su = SQRT2 * u
    c = np.cos(su)
    gh2 = p.g * p.g + p.h * p.h
    pv2 = p.p_v * p.p_v
    w = gh2 + p_u * p_u - pv2 - c * P
    mm = gh2 - p_u * p_u + pv2 + c * P
    return (
        0.5 * p.A * w
        + 0.5 * p.B * mm
        + p.alpha * p_u * p_u
        + p.b * pv2
        - p.beta * np.sin(su) * P
        + 0.25 * p.C * w * w
    )
