"""spinreduce: sublattice-magnetization dynamics via Hamiltonian reduction.

A toolkit for the nonlinear dynamics of the (m, l) order-parameter pair of
an axially symmetric antiferromagnet: the 6-D angular-momentum-type system
is reduced to one canonical degree of freedom (u, p_u), analyzed through
phase portraits (fixed points, separatrices, level sets) and lifted back to
spin space for 3-D trajectory curves.
"""

from .algebra import (
    BracketTable,
    Casimir,
    bracket_vector_field,
    gh_bracket_table,
    levi_civita,
    ml_bracket_table,
    sublattice_bracket_table,
)
from .dynamics import (
    ConservationReport,
    IntegratorSpec,
    Trajectory,
    conservation_report,
    integrate_full,
    integrate_reduced,
    midpoint_displacement,
    midpoint_step,
)
from .errors import (
    ConfigError,
    InadmissibleMomentumError,
    InadmissibleParameterError,
    SingularConfigurationError,
    SpinreduceError,
    StepFailureError,
    StiffFailureError,
)
from .model import (
    MLState,
    ModelParams,
    MomentumRange,
    ReducedState,
    SQRT2,
    SublatticeParams,
    U_PERIOD,
    admissible_momentum_range,
    canonical_u,
    energy_cylindrical,
    energy_ml,
    energy_reduced,
    energy_sublattice,
    grad_ml,
    grad_reduced,
    reduced_energy_grid,
    vector_field_full,
    vector_field_reduced,
    wrap_delta,
)
from .portrait import (
    Branch,
    FixedPoint,
    Separatrix,
    classify,
    find_fixed_points,
    level_set,
    render_portrait,
    trace_separatrices,
)
from .transforms import (
    CylState,
    ReductionResult,
    canonical_to_cyl,
    cyl_to_canonical,
    cyl_to_gh,
    gh_to_cyl,
    gh_to_ml,
    lift_point,
    lift_trajectory,
    ml_to_gh,
    ml_to_reduced,
)

__version__ = "0.1.0"
