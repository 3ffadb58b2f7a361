"""Poisson bracket tables for the spin variables.

Every bracket used in this package is Lie-Poisson: the bracket of two phase
variables is a linear combination of phase variables whose structure
coefficients are generated by the Levi-Civita symbol.  The coefficients are
stored as exact integers, so antisymmetry and the Jacobi identity can be
verified symbolically (integer arithmetic, no tolerances).

Sign convention, fixed once for the whole package: time evolution is

    xdot_i = {x_i, H} = sum_j {x_i, x_j} * dH/dx_j.

Every closed-form vector field elsewhere in the package (the cross-product
forms in :mod:`spinreduce.model`) is validated against the contraction
performed here, which is the normative definition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "Casimir",
    "BracketTable",
    "levi_civita",
    "ml_bracket_table",
    "gh_bracket_table",
    "sublattice_bracket_table",
    "bracket_vector_field",
]

_EPSILON = {
    (0, 1, 2): 1,
    (1, 2, 0): 1,
    (2, 0, 1): 1,
    (0, 2, 1): -1,
    (2, 1, 0): -1,
    (1, 0, 2): -1,
}


def levi_civita(a: int, b: int, c: int) -> int:
    """Totally antisymmetric symbol eps_abc over indices {0, 1, 2}."""
    return _EPSILON.get((a, b, c), 0)


@dataclass(frozen=True)
class Casimir:
    """A function whose bracket with every phase variable vanishes.

    ``value`` maps a state vector to a float; ``gradient`` maps a state
    vector to the covector of partial derivatives.
    """

    name: str
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BracketTable:
    """Sparse table of pairwise brackets {x_i, x_j} linear in the state.

    ``entries[(i, j)]`` maps a variable index k to the integer coefficient of
    x_k in {x_i, x_j}.  Both orientations (i, j) and (j, i) are stored; the
    table is immutable after construction and safe for concurrent use.
    """

    names: tuple[str, ...]
    entries: Mapping[tuple[int, int], Mapping[int, int]]
    casimirs: tuple[Casimir, ...] = field(default=())

    @property
    def dimension(self) -> int:
        return len(self.names)

    def entry(self, i: int, j: int) -> dict[int, int]:
        """Structure coefficients of {x_i, x_j} as a map k -> coefficient."""
        return dict(self.entries.get((i, j), {}))

    def bracket_value(self, i: int, j: int, state: np.ndarray) -> float:
        """Evaluate {x_i, x_j} at the given state."""
        combo = self.entries.get((i, j))
        if not combo:
            return 0.0
        return float(sum(c * state[k] for k, c in combo.items()))

    def poisson_matrix(self, state: np.ndarray) -> np.ndarray:
        """Antisymmetric matrix P with P[i, j] = {x_i, x_j}(state)."""
        state = np.asarray(state, dtype=float)
        n = self.dimension
        if state.shape != (n,):
            raise ValueError(
                f"state has shape {state.shape}, table dimension is {n}"
            )
        P = np.zeros((n, n))
        for (i, j), combo in self.entries.items():
            P[i, j] = sum(c * state[k] for k, c in combo.items())
        return P

    def antisymmetry_defects(self) -> list[tuple[int, int]]:
        """Index pairs where entry(i,j) != -entry(j,i) or entry(i,i) != 0.

        Exact integer comparison; an empty list certifies antisymmetry.
        """
        defects = []
        n = self.dimension
        for i in range(n):
            if self.entry(i, i):
                defects.append((i, i))
        for i in range(n):
            for j in range(n):
                a = self.entry(i, j)
                b = self.entry(j, i)
                keys = set(a) | set(b)
                if any(a.get(k, 0) != -b.get(k, 0) for k in keys):
                    defects.append((i, j))
        return defects

    def jacobi_defects(self) -> list[tuple[int, int, int, dict[int, int]]]:
        """Triples (i, j, k) where the cyclic double bracket does not vanish.

        For linear brackets {x_i, x_j} = c_ij^m x_m the Jacobi identity is a
        polynomial identity in the structure coefficients; it is contracted
        here exactly.  An empty list certifies the identity.
        """
        defects = []
        n = self.dimension

        def combo(a: int, b: int) -> Mapping[int, int]:
            return self.entries.get((a, b), {})

        for i, j, k in itertools.product(range(n), repeat=3):
            acc: dict[int, int] = {}
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                for m, cm in combo(a, b).items():
                    for t, ct in combo(m, c).items():
                        acc[t] = acc.get(t, 0) + cm * ct
            bad = {t: v for t, v in acc.items() if v != 0}
            if bad:
                defects.append((i, j, k, bad))
        return defects


def _add_so3_block(
    entries: dict[tuple[int, int], dict[int, int]],
    src_a: int,
    src_b: int,
    dst: int,
) -> None:
    # {x_(src_a+a), x_(src_b+b)} = eps_abc * x_(dst+c)
    for a in range(3):
        for b in range(3):
            combo: dict[int, int] = {}
            for c in range(3):
                e = levi_civita(a, b, c)
                if e:
                    combo[dst + c] = e
            if combo:
                entries[(src_a + a, src_b + b)] = combo


def _ml_casimir_plus_value(x: np.ndarray) -> float:
    s = x[:3] + x[3:]
    return float(s @ s)


def _ml_casimir_plus_grad(x: np.ndarray) -> np.ndarray:
    s = 2.0 * (x[:3] + x[3:])
    return np.concatenate([s, s])


def _ml_casimir_minus_value(x: np.ndarray) -> float:
    d = x[:3] - x[3:]
    return float(d @ d)


def _ml_casimir_minus_grad(x: np.ndarray) -> np.ndarray:
    d = 2.0 * (x[:3] - x[3:])
    return np.concatenate([d, -d])


def ml_bracket_table() -> BracketTable:
    """Bracket table for the six variables (m_x, m_y, m_z, l_x, l_y, l_z).

    {m_a, m_b} = eps_abc m_c,  {m_a, l_b} = eps_abc l_c,
    {l_a, l_b} = eps_abc m_c.

    The Casimirs of this structure are (m + l)^2 and (m - l)^2.
    """
    entries: dict[tuple[int, int], dict[int, int]] = {}
    _add_so3_block(entries, 0, 0, 0)  # {m, m} -> m
    _add_so3_block(entries, 0, 3, 3)  # {m, l} -> l
    _add_so3_block(entries, 3, 0, 3)  # {l, m} -> l
    _add_so3_block(entries, 3, 3, 0)  # {l, l} -> m
    casimirs = (
        Casimir("(m+l)^2", _ml_casimir_plus_value, _ml_casimir_plus_grad),
        Casimir("(m-l)^2", _ml_casimir_minus_value, _ml_casimir_minus_grad),
    )
    names = ("m_x", "m_y", "m_z", "l_x", "l_y", "l_z")
    return BracketTable(names=names, entries=entries, casimirs=casimirs)


def _gh_casimir(base: int, name: str) -> Casimir:
    def value(x: np.ndarray) -> float:
        v = x[base : base + 3]
        return float(v @ v)

    def gradient(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[base : base + 3] = 2.0 * x[base : base + 3]
        return out

    return Casimir(name, value, gradient)


def gh_bracket_table() -> BracketTable:
    """Bracket table for (g_x, g_y, g_z, h_x, h_y, h_z).

    Each of g = (m + l)/2 and h = (m - l)/2 carries its own angular-momentum
    bracket, {g_a, g_b} = eps_abc g_c and {h_a, h_b} = eps_abc h_c, and every
    mixed g-h bracket vanishes.  Casimirs: g^2 and h^2.
    """
    entries: dict[tuple[int, int], dict[int, int]] = {}
    _add_so3_block(entries, 0, 0, 0)
    _add_so3_block(entries, 3, 3, 3)
    names = ("g_x", "g_y", "g_z", "h_x", "h_y", "h_z")
    casimirs = (_gh_casimir(0, "g^2"), _gh_casimir(3, "h^2"))
    return BracketTable(names=names, entries=entries, casimirs=casimirs)


def sublattice_bracket_table() -> BracketTable:
    """Bracket table for four independent sublattice moments s_1..s_4.

    Twelve variables (s1_x, ..., s4_z); each moment is an independent
    angular-momentum triple, brackets across different moments vanish.
    Casimirs: s_i^2 for i = 1..4.  No dynamics are run on this table; it
    backs the axial-symmetry test of the four-sublattice energy.
    """
    entries: dict[tuple[int, int], dict[int, int]] = {}
    for i in range(4):
        _add_so3_block(entries, 3 * i, 3 * i, 3 * i)
    names = tuple(f"s{i+1}_{ax}" for i in range(4) for ax in ("x", "y", "z"))
    casimirs = tuple(_gh_casimir(3 * i, f"s{i+1}^2") for i in range(4))
    return BracketTable(names=names, entries=entries, casimirs=casimirs)


def bracket_vector_field(
    table: BracketTable,
    hamiltonian_gradient: Callable[[np.ndarray], np.ndarray],
    state: np.ndarray,
) -> np.ndarray:
    """Contract a bracket table with an energy gradient: xdot = {x, H}.

    Parameters
    ----------
    table
        Bracket table defining the Poisson structure.
    hamiltonian_gradient
        Callable returning dH/dx at a state vector.
    state
        Point of evaluation; length must equal the table dimension.

    Returns
    -------
    ndarray
        xdot with components xdot_i = sum_j {x_i, x_j}(state) * dH/dx_j.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (table.dimension,):
        raise ValueError(
            f"state has shape {state.shape}, table dimension is {table.dimension}"
        )
    grad = np.asarray(hamiltonian_gradient(state), dtype=float)
    if grad.shape != (table.dimension,):
        raise ValueError(
            f"gradient has shape {grad.shape}, table dimension is {table.dimension}"
        )
    return table.poisson_matrix(state) @ grad
