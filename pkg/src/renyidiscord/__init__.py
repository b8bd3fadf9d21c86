"""Rényi quantum discord of two-qubit states and of two dimers dephasing in
Ising-correlated spin baths."""
from .matfun import (
    InvalidOperatorError,
    NotPSDError,
    eig_hermitian,
    mat_pow_psd,
    partial_trace,
    tensor,
    unitary_exp,
)
from .entropy import (
    NumericalFailure,
    renyi_cmi,
    renyi_entropy,
    vn_cmi,
    von_neumann_entropy,
)
from .discord import (
    DiscordResult,
    OptimizerSettings,
    ProjectiveMeasurement,
    isometry_apply,
    povm_elements,
    renyi_discord,
    vn_discord,
)
from .states import (
    CIStateParams,
    StateConstraintError,
    XStateParams,
    bell_diagonal_state,
    ci_state,
    sci_state,
    validate_density_matrix,
    x_state,
)
from .dynamics import (
    BathParams,
    BathSector,
    DimerParams,
    bath_degeneracy,
    bath_sectors,
    evolve,
    evolve_bruteforce,
    evolve_series,
    partition_function,
    sector_hamiltonian,
)

__version__ = "0.1.0"
