"""Liouville-space generators of open quantum systems and their pure stationary states."""

from .catastrophe import (
    CanonicalPotential,
    critical_points,
    fold_analyze,
    normal_form_shift,
    potential_of,
    potentiality_check,
    sweep,
)
from .estimators import Propagator, StationaryStateFinder
from .evolution import propagate, trajectory
from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    NumericalBreakdownError,
    ParameterDomainError,
)
from .generators import (
    BuiltGenerator,
    GeneratorSpec,
    brownian_hamiltonian,
    build_closed,
    build_cosine,
    build_fold,
    build_general,
    build_lindblad_poly_h,
    build_nonlinear_friction_canonical,
    build_nonlinear_friction_literal,
    n_eigenvalue,
)
from .hilbert import (
    FockBasis,
    canonical_operators,
    devectorize,
    hamiltonian,
    hs_inner,
    ladder_operators,
    make_basis,
    trace_functional,
    vectorize,
)
from .stationary import (
    analyze,
    classify_state,
    condition_sc_roots,
    fock_scan,
    null_space,
    state_energy,
    verify_eigenprojector,
)
from .superops import (
    SuperOperator,
    algebra_check,
    jordan_mult,
    left_mult,
    lie_mult,
    right_mult,
    spectral_function,
)

__version__ = "0.1.0"
