"""Quantum Fisher information for field estimation in a non-Hermitian KSEA-XY chain.

The chain maps onto independent 2x2 momentum blocks; :mod:`iksea.model`
holds the block structure and phase diagram, :mod:`iksea.ground` the
ground-state QFI closed forms, :mod:`iksea.dynamics` the non-unitary
evolution, :mod:`iksea.oracle` an independent dense-spin-space cross-check,
:mod:`iksea.scaling` the log-log fits and sweeps, and :mod:`iksea.cli` the
command-line front end.
"""

__version__ = "0.1.0"

from .errors import (
    IkseaError,
    ParameterError,
    DomainError,
    BranchError,
    ExceptionalModeError,
    EvolutionOverflowError,
    CapacityError,
    LevelCrossingError,
    OutOfWindowError,
    InsufficientDataError,
    NumericalConsistencyError,
    CalibrationError,
    ConfigError,
    NearSingularWarning,
)
from .model import (
    ChainParams,
    PhaseInfo,
    momentum_grid,
    block_matrix,
    block_elements,
    dispersion,
    gamma_eff,
    critical_field,
    exceptional_field,
    zero_crossings,
    classify_phase,
)
from .ground import (
    BlockGroundState,
    ModeContribution,
    QfiRecord,
    block_ground_state,
    block_qfi_real,
    block_qfi_imag,
    ground_qfi,
    asymptotic_qfi,
)
from .dynamics import (
    BlockPropagator,
    EvolvedBlockState,
    DynQfiSeries,
    block_propagator,
    propagator_derivative,
    evolve_block,
    dynamical_qfi,
    qfi_time_series,
)
from .scaling import (
    ScalingFit,
    SweepResult,
    power_law_fit,
    geometric_size_grid,
    size_exponent,
    exponent_vs_offset,
    kappa_sweep,
    time_exponent,
)
from .config import RunConfig

__all__ = [name for name in dir() if not name.startswith("_")]
