"""Time integration of the reduced and the full spin systems.

The reduced canonical system (u, p_u) is integrated by structure-preserving
fixed-step methods; the cyclic angle v is advanced alongside by quadrature
of vdot = dH/dp_v so trajectories can later be lifted to spin space.  The
full 6-D system serves as a high-accuracy short-time oracle and is driven
by an adaptive embedded Runge-Kutta pair (scipy's DOP853), not by a
structure-preserving scheme.

Methods
-------
symplectic-midpoint (default)
    Implicit midpoint rule, symplectic and second order, solved by
    fixed-point iteration (tolerance 1e-13, at most 50 sweeps, plus two
    polishing sweeps so one step is converged to round-off).
stormer-verlet-generalized
    The symmetric two-stage generalized leapfrog for non-separable
    Hamiltonians; both implicit stages use the same fixed-point contract.
adaptive-rk
    scipy.integrate.solve_ivp(method="RK45"); for the reduced system a
    terminal event halts the run at the admissible-momentum boundary.

Integration near the admissible boundary halts with ``status="boundary"``
at the last valid sample: the chart is singular there and continuing would
fabricate dynamics.  Identical inputs produce bit-identical trajectories on
one platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    InadmissibleMomentumError,
    StepFailureError,
    StiffFailureError,
)
from .model import (
    MLState,
    ModelParams,
    ReducedState,
    make_full_field,
    make_reduced_derivs,
    make_reduced_energy,
)

__all__ = [
    "METHOD_MIDPOINT",
    "METHOD_VERLET",
    "METHOD_ADAPTIVE",
    "IntegratorSpec",
    "Trajectory",
    "InvariantDrift",
    "ConservationReport",
    "integrate_reduced",
    "integrate_full",
    "conservation_report",
    "midpoint_step",
    "midpoint_displacement",
    "ml_conserved_log",
]

METHOD_MIDPOINT = "symplectic-midpoint"
METHOD_VERLET = "stormer-verlet-generalized"
METHOD_ADAPTIVE = "adaptive-rk"
_METHODS = (METHOD_MIDPOINT, METHOD_VERLET, METHOD_ADAPTIVE)

_FP_TOL = 1e-13
_FP_MAX_ITER = 50


@dataclass(frozen=True)
class IntegratorSpec:
    """How to integrate: method, step/tolerances, horizon, sampling.

    ``dt`` is the step of the fixed-step methods and the sampling resolution
    of the adaptive one; samples are stored every ``sample_stride`` steps.
    """

    method: str = METHOD_MIDPOINT
    dt: float = 1e-3
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_end: float = 100.0
    sample_stride: int = 10

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {_METHODS}")
        if not (self.dt > 0.0):
            raise ValueError("dt must be positive")
        if not (self.t_end > 0.0):
            raise ValueError("t_end must be positive")
        if not (self.dt < self.t_end):
            raise ValueError("dt must be smaller than t_end")
        if not (0.0 < self.rel_tol < 1.0):
            raise ValueError("rel_tol must lie in (0, 1)")
        if not (0.0 < self.abs_tol < 1.0):
            raise ValueError("abs_tol must lie in (0, 1)")
        if not (isinstance(self.sample_stride, int) and self.sample_stride >= 1):
            raise ValueError("sample_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return max(1, round(self.t_end / self.dt))


@dataclass
class Trajectory:
    """Sampled time series of states with a conserved-quantity log.

    ``states`` has one row per sample in the order given by ``columns``;
    ``conserved`` maps invariant names to per-sample arrays.  ``status`` is
    "completed" or "boundary" (the run reached the admissible-momentum
    boundary and halted at the last valid sample).
    """

    kind: str  # "reduced" | "ml"
    columns: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    conserved: dict[str, np.ndarray] = field(default_factory=dict)
    status: str = "completed"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != (len(self.times), len(self.columns)):
            raise ValueError("states shape does not match times/columns")
        if len(self.times) == 0:
            raise ValueError("trajectory must hold at least one sample")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        for name, series in self.conserved.items():
            if len(series) != len(self.times):
                raise ValueError(f"conserved log {name!r} length mismatch")

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    def final_reduced_state(self) -> ReducedState:
        if self.kind != "reduced":
            raise ValueError("not a reduced trajectory")
        u, p_u, v = self.states[-1]
        return ReducedState(u=float(u), p_u=float(p_u), v=float(v))


def ml_conserved_log(p: ModelParams, states: np.ndarray) -> dict[str, np.ndarray]:
    """Energy, m_z and both Casimirs for an array of 6-D spin states."""
    m = states[:, :3]
    l = states[:, 3:]
    m2 = np.einsum("ij,ij->i", m, m)
    l2 = np.einsum("ij,ij->i", l, l)
    H = (
        0.5 * p.A * l2
        + 0.5 * p.B * m2
        + 0.5 * p.alpha * l[:, 2] ** 2
        + 0.5 * p.b * m[:, 2] ** 2
        + p.beta * (l[:, 0] * m[:, 1] - l[:, 1] * m[:, 0])
        + 0.25 * p.C * l2 * l2
    )
    plus = m + l
    minus = m - l
    return {
        "H": H,
        "m_z": m[:, 2].copy(),
        "casimir_plus": np.einsum("ij,ij->i", plus, plus),
        "casimir_minus": np.einsum("ij,ij->i", minus, minus),
    }


# ---------------------------------------------------------------------------
# Implicit steps


def _midpoint_displacement_raw(derivs, u, p_u, dt, tol=_FP_TOL, max_iter=_FP_MAX_ITER):
    """One implicit-midpoint step, returned as a displacement.

    Iterates the midpoint w = z + (dt/2) f(w) to ``tol``, then performs two
    polishing sweeps so the step is converged to round-off (needed by the
    area-preservation check, which differentiates the displacement).
    Returns (du, dp_u, dv) with dv = dt * dH/dp_v at the midpoint.
    """
    half = 0.5 * dt
    wu, wpu = u, p_u
    for _ in range(max_iter):
        H_u, H_pu, _ = derivs(wu, wpu)
        nu = u + half * H_pu
        npu = p_u - half * H_u
        delta = abs(nu - wu) + abs(npu - wpu)
        wu, wpu = nu, npu
        if delta <= tol:
            break
    else:
        raise StepFailureError(
            f"implicit midpoint failed to converge in {max_iter} iterations at "
            f"(u={u}, p_u={p_u}, dt={dt})"
        )
    for _ in range(2):
        H_u, H_pu, _ = derivs(wu, wpu)
        wu = u + half * H_pu
        wpu = p_u - half * H_u
    H_u, H_pu, H_pv = derivs(wu, wpu)
    return dt * H_pu, -dt * H_u, dt * H_pv


def midpoint_displacement(
    p: ModelParams, st: ReducedState, dt: float
) -> tuple[float, float, float]:
    """Displacement (du, dp_u, dv) of one implicit-midpoint step."""
    derivs = make_reduced_derivs(p)
    return _midpoint_displacement_raw(derivs, st.u, st.p_u, dt)


def midpoint_step(p: ModelParams, st: ReducedState, dt: float) -> ReducedState:
    """One implicit-midpoint step; dt may be negative (the method is
    symmetric, so the negative step is the exact inverse map)."""
    du, dpu, dv = midpoint_displacement(p, st, dt)
    v = st.v + dv if st.v is not None else None
    return ReducedState(u=st.u + du, p_u=st.p_u + dpu, v=v)


def _verlet_displacement_raw(derivs, u, p_u, dt, tol=_FP_TOL, max_iter=_FP_MAX_ITER):
    """Generalized leapfrog step for a non-separable Hamiltonian.

    p_half from an implicit half-kick at u, u_new from an implicit drift
    averaging dH/dp_u at both ends, explicit closing half-kick.  Symmetric,
    symplectic, second order.
    """
    half = 0.5 * dt
    # implicit half-kick: p_half = p_u - half * H_u(u, p_half)
    p_half = p_u
    for _ in range(max_iter):
        H_u, _, _ = derivs(u, p_half)
        npu = p_u - half * H_u
        delta = abs(npu - p_half)
        p_half = npu
        if delta <= tol:
            break
    else:
        raise StepFailureError("leapfrog half-kick failed to converge")
    _, H_pu_0, H_pv_0 = derivs(u, p_half)
    # implicit drift: u_new = u + half * (H_pu(u, p_half) + H_pu(u_new, p_half))
    u_new = u
    for _ in range(max_iter):
        _, H_pu_1, _ = derivs(u_new, p_half)
        nu = u + half * (H_pu_0 + H_pu_1)
        delta = abs(nu - u_new)
        u_new = nu
        if delta <= tol:
            break
    else:
        raise StepFailureError("leapfrog drift failed to converge")
    H_u_1, H_pu_1, H_pv_1 = derivs(u_new, p_half)
    p_new = p_half - half * H_u_1
    dv = half * (H_pv_0 + H_pv_1)
    return u_new - u, p_new - p_u, dv


# ---------------------------------------------------------------------------
# Reduced-system integration


def _sample_times(n_steps: int, dt: float, stride: int) -> list[int]:
    ks = list(range(0, n_steps + 1, stride))
    if ks[-1] != n_steps:
        ks.append(n_steps)
    return ks


def integrate_reduced(
    p: ModelParams, initial: ReducedState, spec: IntegratorSpec
) -> Trajectory:
    """Integrate the reduced canonical system from ``initial``.

    The trajectory rows are (u, p_u, v) with u and v kept unwrapped; v
    starts from ``initial.v`` (0 when absent).  The conserved log holds the
    reduced energy at the stored samples.  Hitting the admissible boundary
    halts the run with status "boundary" at the last valid sample.
    """
    if spec.method == METHOD_ADAPTIVE:
        return _integrate_reduced_adaptive(p, initial, spec)

    derivs = make_reduced_derivs(p)
    energy = make_reduced_energy(p)
    # reject initial states outside the closed admissible interval up front
    energy(initial.u, initial.p_u)

    if spec.method == METHOD_MIDPOINT:
        displacement = _midpoint_displacement_raw
    else:
        displacement = _verlet_displacement_raw

    dt = spec.dt
    n_steps = spec.n_steps
    stride = spec.sample_stride
    u = float(initial.u)
    pu = float(initial.p_u)
    v = float(initial.v) if initial.v is not None else 0.0

    times = [0.0]
    rows = [(u, pu, v)]
    status = "completed"
    last_k = 0
    for k in range(1, n_steps + 1):
        try:
            du, dpu, dv = displacement(derivs, u, pu, dt)
        except InadmissibleMomentumError:
            status = "boundary"
            break
        u += du
        pu += dpu
        v += dv
        last_k = k
        if k % stride == 0 or k == n_steps:
            times.append(k * dt)
            rows.append((u, pu, v))
    if status == "boundary" and last_k > 0 and times[-1] != last_k * dt:
        times.append(last_k * dt)
        rows.append((u, pu, v))

    states = np.array(rows)
    H = np.array([energy(r[0], r[1]) for r in rows])
    return Trajectory(
        kind="reduced",
        columns=("u", "p_u", "v"),
        times=np.array(times),
        states=states,
        conserved={"H": H},
        status=status,
    )


def _integrate_reduced_adaptive(
    p: ModelParams, initial: ReducedState, spec: IntegratorSpec
) -> Trajectory:
    derivs = make_reduced_derivs(p)
    energy = make_reduced_energy(p)
    energy(initial.u, initial.p_u)
    g, h, p_v = p.g, p.h, p.p_v

    def rhs(t, y):
        H_u, H_pu, H_pv = derivs(y[0], y[1])
        return (H_pu, -H_u, H_pv)

    def boundary(t, y):
        sg = 2.0 * g * g - (y[1] + p_v) ** 2
        sh = 2.0 * h * h - (y[1] - p_v) ** 2
        return min(sg, sh) - 1e-12

    boundary.terminal = True
    boundary.direction = -1.0

    ks = _sample_times(spec.n_steps, spec.dt, spec.sample_stride)
    t_eval = np.array([k * spec.dt for k in ks])
    v0 = float(initial.v) if initial.v is not None else 0.0
    sol = solve_ivp(
        rhs,
        (0.0, spec.t_end),
        (float(initial.u), float(initial.p_u), v0),
        method="RK45",
        rtol=spec.rel_tol,
        atol=spec.abs_tol,
        t_eval=t_eval,
        events=boundary,
        dense_output=False,
    )
    if sol.status == -1:
        raise StiffFailureError(sol.message)
    status = "boundary" if sol.status == 1 else "completed"
    times = sol.t
    states = sol.y.T
    if len(times) == 0 or times[0] != 0.0:
        times = np.concatenate([[0.0], times])
        states = np.vstack([[initial.u, initial.p_u, v0], states])
    H = np.array([energy(row[0], row[1]) for row in states])
    return Trajectory(
        kind="reduced",
        columns=("u", "p_u", "v"),
        times=times,
        states=states,
        conserved={"H": H},
        status=status,
    )


# ---------------------------------------------------------------------------
# Full 6-D oracle integration


def integrate_full(p: ModelParams, initial: MLState, spec: IntegratorSpec) -> Trajectory:
    """Integrate the 6-D spin system with an adaptive embedded RK pair.

    Serves as the high-accuracy oracle for the reduction; logs the energy,
    m_z and both Casimirs at every stored sample.
    """
    field = make_full_field(p)
    ks = _sample_times(spec.n_steps, spec.dt, spec.sample_stride)
    t_eval = np.array([k * spec.dt for k in ks])
    y0 = initial.as_vector()
    sol = solve_ivp(
        field,
        (0.0, spec.t_end),
        y0,
        method="RK45",
        rtol=spec.rel_tol,
        atol=spec.abs_tol,
        t_eval=t_eval,
        dense_output=False,
    )
    if not sol.success:
        raise StiffFailureError(sol.message)
    states = sol.y.T
    return Trajectory(
        kind="ml",
        columns=("m_x", "m_y", "m_z", "l_x", "l_y", "l_z"),
        times=sol.t,
        states=states,
        conserved=ml_conserved_log(p, states),
        status="completed",
    )


# ---------------------------------------------------------------------------
# Conservation reporting


@dataclass(frozen=True)
class InvariantDrift:
    """Drift record of one logged invariant along a trajectory."""

    name: str
    initial: float
    max_abs_drift: float
    max_rel_drift: float
    drift: np.ndarray  # per-sample value - initial value

    def max_abs_drift_up_to(self, times: np.ndarray, t: float) -> float:
        mask = times <= t
        if not np.any(mask):
            return 0.0
        return float(np.max(np.abs(self.drift[mask])))


@dataclass(frozen=True)
class ConservationReport:
    """Max absolute/relative drift of every logged invariant plus series."""

    times: np.ndarray
    invariants: dict[str, InvariantDrift]

    def summary(self) -> dict:
        return {
            name: {
                "initial": inv.initial,
                "max_abs_drift": inv.max_abs_drift,
                "max_rel_drift": inv.max_rel_drift,
            }
            for name, inv in sorted(self.invariants.items())
        }


def conservation_report(traj: Trajectory) -> ConservationReport:
    """Measure the drift of each invariant logged along a trajectory."""
    invariants = {}
    for name, series in traj.conserved.items():
        series = np.asarray(series, dtype=float)
        initial = float(series[0])
        drift = series - initial
        max_abs = float(np.max(np.abs(drift)))
        scale = max(abs(initial), 1e-16)
        invariants[name] = InvariantDrift(
            name=name,
            initial=initial,
            max_abs_drift=max_abs,
            max_rel_drift=max_abs / scale,
            drift=drift,
        )
    return ConservationReport(times=traj.times.copy(), invariants=invariants)
