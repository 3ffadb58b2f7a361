"""Self-verification suite: the invariant checks behind ``spinreduce check``.

Each check is independent of the code path it certifies: finite differences
against analytic gradients, the bracket contraction against the closed-form
vector fields, the transform chain against both energies, and the full 6-D
flow against the reduced one.  All randomness is seeded, so the emitted
report is reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import algebra
from .dynamics import (
    IntegratorSpec,
    conservation_report,
    integrate_full,
    integrate_reduced,
)
from .errors import InadmissibleMomentumError
from .model import (
    SQRT2,
    U_PERIOD,
    MLState,
    ModelParams,
    ReducedState,
    energy_ml,
    energy_reduced,
    grad_ml,
    grad_reduced,
    make_reduced_derivs,
    make_reduced_energy,
    vector_field_full,
    vector_field_reduced,
    wrap_delta,
)
from .transforms import lift_point, ml_to_reduced

__all__ = [
    "CheckResult",
    "random_admissible_reduced",
    "random_nonsingular_ml",
    "reduction_equivalence_deviation",
    "run_checks",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"[{tag}] {self.name}: measured={self.measured:.3e} "
            f"threshold={self.threshold:.3e}{' ' + self.detail if self.detail else ''}"
        )


# ---------------------------------------------------------------------------
# Random-state generators (seeded, with singularity margins)


def random_admissible_reduced(
    p: ModelParams, rng: np.random.Generator, margin: float = 0.05
) -> ReducedState:
    """Uniform reduced state strictly inside the admissible interval."""
    r = p.momentum_range
    lo = r.lo + margin * r.width
    hi = r.hi - margin * r.width
    return ReducedState(
        u=float(rng.uniform(0.0, U_PERIOD)),
        p_u=float(rng.uniform(lo, hi)),
        v=float(rng.uniform(0.0, 2.0 * math.pi)),
    )


def random_nonsingular_ml(
    rng: np.random.Generator, transverse_min: float = 1e-2
) -> MLState:
    """Gaussian (m, l) state with both m+l and m-l safely non-singular."""
    while True:
        m = rng.normal(size=3)
        l = rng.normal(size=3)
        tp = math.hypot(m[0] + l[0], m[1] + l[1])
        tm = math.hypot(m[0] - l[0], m[1] - l[1])
        if tp > transverse_min and tm > transverse_min:
            return MLState(m=m, l=l)


def _fd_gradient(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    g = np.empty_like(x)
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


# ---------------------------------------------------------------------------
# Individual checks


def check_bracket_antisymmetry() -> CheckResult:
    defects = 0
    for table in (
        algebra.ml_bracket_table(),
        algebra.gh_bracket_table(),
        algebra.sublattice_bracket_table(),
    ):
        defects += len(table.antisymmetry_defects())
    return CheckResult("bracket-antisymmetry", defects == 0, float(defects), 0.5)


def check_bracket_jacobi() -> CheckResult:
    defects = 0
    for table in (
        algebra.ml_bracket_table(),
        algebra.gh_bracket_table(),
        algebra.sublattice_bracket_table(),
    ):
        defects += len(table.jacobi_defects())
    return CheckResult("bracket-jacobi", defects == 0, float(defects), 0.5)


def check_casimir_invariance(rng: np.random.Generator, n: int = 10_000) -> CheckResult:
    """For random states and random energy gradients, the flow generated by
    any table must leave its declared Casimirs unchanged to first order."""
    worst = 0.0
    for table in (algebra.ml_bracket_table(), algebra.gh_bracket_table()):
        states = rng.normal(size=(n, table.dimension))
        grads = rng.normal(size=(n, table.dimension))
        for k in range(n):
            P = table.poisson_matrix(states[k])
            xdot = P @ grads[k]
            for cas in table.casimirs:
                worst = max(worst, abs(float(cas.gradient(states[k]) @ xdot)))
    return CheckResult("casimir-flow-invariance", worst < 1e-10, worst, 1e-10)


def check_grad_ml_fd(p: ModelParams, rng: np.random.Generator, n: int = 1000) -> CheckResult:
    worst = 0.0
    for _ in range(n):
        st = random_nonsingular_ml(rng)
        gm, gl = grad_ml(p, st)
        analytic = np.concatenate([gm, gl])
        fd = _fd_gradient(
            lambda y: energy_ml(p, MLState(m=y[:3], l=y[3:])), st.as_vector()
        )
        scale = max(float(np.max(np.abs(analytic))), 1.0)
        worst = max(worst, float(np.max(np.abs(analytic - fd))) / scale)
    return CheckResult("ml-gradient-fd", worst < 1e-6, worst, 1e-6)


def check_grad_reduced_fd(
    p: ModelParams, rng: np.random.Generator, n: int = 1000
) -> CheckResult:
    energy = make_reduced_energy(p)
    worst = 0.0
    for _ in range(n):
        st = random_admissible_reduced(p, rng)
        gu, gp = grad_reduced(p, st)
        h = 1e-6
        fd_u = (energy(st.u + h, st.p_u) - energy(st.u - h, st.p_u)) / (2 * h)
        fd_p = (energy(st.u, st.p_u + h) - energy(st.u, st.p_u - h)) / (2 * h)
        scale = max(abs(gu), abs(gp), 1.0)
        worst = max(worst, max(abs(gu - fd_u), abs(gp - fd_p)) / scale)
    return CheckResult("reduced-gradient-fd", worst < 1e-6, worst, 1e-6)


def check_energy_chain(p: ModelParams, rng: np.random.Generator, n: int = 10_000) -> CheckResult:
    """energy_ml == energy_reduced through the transform chain (relative)."""
    worst = 0.0
    for _ in range(n):
        st = random_admissible_reduced(p, rng)
        lifted = lift_point(st, p)
        e_red = energy_reduced(p, st)
        e_ml = energy_ml(p, lifted)
        worst = max(worst, abs(e_red - e_ml) / max(abs(e_ml), 1e-12))
    return CheckResult("energy-chain-consistency", worst < 1e-10, worst, 1e-10)


def check_roundtrip(rng: np.random.Generator, n: int = 10_000) -> CheckResult:
    """ml -> reduced -> ml recovers the state (non-singular inputs)."""
    worst = 0.0
    base = ModelParams(A=1.0, B=0.5, alpha=-0.2, b=0.1, beta=0.15, C=0.05, g=1.0, h=1.0, p_v=0.0)
    for _ in range(n):
        st = random_nonsingular_ml(rng)
        image = ml_to_reduced(st)
        back = lift_point(image.state, image.params_like(base))
        err = max(
            float(np.max(np.abs(back.m - st.m))), float(np.max(np.abs(back.l - st.l)))
        )
        worst = max(worst, err)
    return CheckResult("transform-roundtrip", worst < 1e-10, worst, 1e-10)


def check_field_pushforward(
    p: ModelParams, rng: np.random.Generator, n: int = 300
) -> CheckResult:
    """The chain maps the 6-D field onto the reduced one.

    Pushforward via a finite-difference Jacobian of the (m,l) -> (u, p_u, v)
    chart, compared against the canonical equations.
    """
    worst = 0.0
    h = 1e-6
    for _ in range(n):
        st = random_admissible_reduced(p, rng, margin=0.1)
        lifted = lift_point(st, p)
        mdot, ldot = vector_field_full(p, lifted)
        ydot = np.concatenate([mdot, ldot])
        y = lifted.as_vector()

        def chart(yv: np.ndarray) -> np.ndarray:
            image = ml_to_reduced(MLState(m=yv[:3], l=yv[3:]))
            return np.array([image.state.u, image.state.p_u, image.state.v])

        base_img = chart(y)
        J = np.empty((3, 6))
        for i in range(6):
            yp = y.copy()
            ym = y.copy()
            yp[i] += h
            ym[i] -= h
            d = chart(yp) - chart(ym)
            # angles may wrap across the branch cut
            d[0] = wrap_delta(d[0])
            d[2] = wrap_delta(d[2], 2.0 * math.pi * SQRT2)
            J[:, i] = d / (2.0 * h)
        pushed = J @ ydot
        udot, pudot, vdot = vector_field_reduced(p, st)
        err = float(np.max(np.abs(pushed - np.array([udot, pudot, vdot]))))
        worst = max(worst, err)
    return CheckResult("field-pushforward", worst < 1e-8, worst, 1e-8)


def reduction_equivalence_deviation(
    p: ModelParams,
    initial: ReducedState,
    t_end: float = 100.0,
    dt: float = 1e-3,
    stride: int = 100,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    flip_sign: bool = False,
) -> dict:
    """Max |du|, |dp_u| between the reduced run and the projected 6-D run.

    The same initial condition is integrated once with the symplectic
    reduced integrator and once as a lifted 6-D state with the adaptive
    oracle; the oracle trajectory is projected back through the transform
    chain and compared sample by sample (u modulo its period).
    ``flip_sign`` injects a sign fault into the reduced field (negative
    control for the check machinery).
    """
    from .transforms import ml_to_reduced as project

    spec = IntegratorSpec(
        method="symplectic-midpoint",
        dt=dt,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        t_end=t_end,
        sample_stride=stride,
    )
    initial = replace(initial, v=initial.v if initial.v is not None else 0.0)
    if flip_sign:
        reduced = _integrate_midpoint_flipped(p, initial, spec)
    else:
        reduced = integrate_reduced(p, initial, spec)
    lifted0 = lift_point(initial, p)
    full = integrate_full(p, lifted0, spec)
    n = min(len(reduced), len(full))
    max_du = 0.0
    max_dpu = 0.0
    for k in range(n):
        image = project(MLState(m=full.states[k, :3], l=full.states[k, 3:]))
        du = abs(wrap_delta(image.state.u - reduced.states[k, 0]))
        dpu = abs(image.state.p_u - reduced.states[k, 1])
        max_du = max(max_du, du)
        max_dpu = max(max_dpu, dpu)
    return {"max_du": max_du, "max_dpu": max_dpu, "samples": n}


def _integrate_midpoint_flipped(p, initial, spec):
    """Reduced midpoint run with a deliberately negated dH/du (test hook)."""
    from .dynamics import Trajectory, _midpoint_displacement_raw

    derivs = make_reduced_derivs(p, flip_u_sign=True)
    energy = make_reduced_energy(p)
    u, pu, v = float(initial.u), float(initial.p_u), float(initial.v or 0.0)
    times = [0.0]
    rows = [(u, pu, v)]
    n_steps = spec.n_steps
    for k in range(1, n_steps + 1):
        try:
            du, dpu, dv = _midpoint_displacement_raw(derivs, u, pu, spec.dt)
        except InadmissibleMomentumError:
            break
        u, pu, v = u + du, pu + dpu, v + dv
        if k % spec.sample_stride == 0 or k == n_steps:
            times.append(k * spec.dt)
            rows.append((u, pu, v))
    states = np.array(rows)
    H = np.array([energy(r[0], r[1]) for r in rows])
    return Trajectory(
        kind="reduced",
        columns=("u", "p_u", "v"),
        times=np.array(times),
        states=states,
        conserved={"H": H},
    )


def check_reduction_equivalence(
    p: ModelParams, initial: ReducedState, flip_sign: bool = False
) -> CheckResult:
    dev = reduction_equivalence_deviation(
        p, initial, t_end=20.0, dt=1e-3, stride=100, flip_sign=flip_sign
    )
    measured = max(dev["max_du"], dev["max_dpu"])
    return CheckResult(
        "reduction-equivalence",
        measured < 1e-6,
        measured,
        1e-6,
        detail=f"(samples={dev['samples']})",
    )


def check_symplectic_drift(p: ModelParams, initial: ReducedState) -> CheckResult:
    spec = IntegratorSpec(
        method="symplectic-midpoint", dt=1e-3, t_end=50.0, sample_stride=50
    )
    traj = integrate_reduced(p, initial, spec)
    report = conservation_report(traj)
    measured = report.invariants["H"].max_rel_drift
    return CheckResult("symplectic-energy-drift", measured < 1e-6, measured, 1e-6)


def check_full_conservation(p: ModelParams, initial: ReducedState) -> CheckResult:
    spec = IntegratorSpec(
        method="adaptive-rk", dt=1e-2, rel_tol=1e-10, abs_tol=1e-12, t_end=20.0, sample_stride=10
    )
    traj = integrate_full(p, lift_point(initial, p), spec)
    report = conservation_report(traj)
    measured = max(
        report.invariants["m_z"].max_abs_drift,
        report.invariants["casimir_plus"].max_abs_drift,
        report.invariants["casimir_minus"].max_abs_drift,
    )
    return CheckResult("full-dynamics-conservation", measured < 1e-9, measured, 1e-9)


def run_checks(
    p: ModelParams,
    initial: ReducedState | None = None,
    seed: int = 20250809,
    break_sign: bool = False,
) -> list[CheckResult]:
    """Run the whole invariant suite; deterministic for fixed arguments."""
    rng = np.random.default_rng(seed)
    if initial is None:
        r = p.momentum_range
        initial = ReducedState(u=0.4, p_u=r.lo + 0.37 * r.width, v=0.0)
    results = [
        check_bracket_antisymmetry(),
        check_bracket_jacobi(),
        check_casimir_invariance(rng, n=2000),
        check_grad_ml_fd(p, rng, n=500),
        check_grad_reduced_fd(p, rng, n=500),
        check_energy_chain(p, rng, n=5000),
        check_roundtrip(rng, n=5000),
        check_field_pushforward(p, rng, n=200),
        check_reduction_equivalence(p, initial, flip_sign=break_sign),
        check_symplectic_drift(p, initial),
        check_full_conservation(p, initial),
    ]
    return results
