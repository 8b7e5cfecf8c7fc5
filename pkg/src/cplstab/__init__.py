"""Stability analysis of interface coupling schemes for two-domain diffusion."""

from .errors import (
    DecayFloorWarning,
    KappaPoleWarning,
    MarginalModeWarning,
    ParameterDomainError,
    SchemeError,
    SingularMatrixError,
    SingularityError,
    SolveResidualWarning,
    SpectrumError,
    UnconfirmedRootWarning,
)
from .params import (
    DimensionlessParams,
    GridSpec,
    PhysicalParams,
    bulk_coefficient,
    derive_dimensionless,
    load_config,
)
from .assembly import (
    SCHEMES,
    Layout,
    SchemeSpec,
    UpdatePair,
    assemble,
    assemble_bulk,
    assemble_dn_explicit,
    assemble_dn_implicit,
    assemble_one_way,
    scheme_name,
    write_dense_csv,
)
from .spectral import Spectrum, StabilityClass, classify, eigen_spectrum, update_matrix
from .normalmode import (
    ModeSolution,
    ScanSettings,
    beljaars_bound,
    dispersion_residual,
    gks_scan,
    kappa_root,
    normal_mode_verdict,
    one_way_explicit_bound,
    one_way_explicit_roots,
    one_way_implicit_mode,
)
from .stepper import (
    State,
    Trajectory,
    growth_rate,
    pack_state,
    power_growth_rate,
    random_state,
    run_monolithic,
    run_partitioned,
    state_norm,
    step_monolithic,
    step_partitioned,
    tridiagonal_solve,
    unpack_state,
)
from .sweep import (
    Axis,
    StabilityField,
    SweepSpec,
    default_axis,
    preset_sweep,
    run_sweep,
    write_csv,
    write_pgm,
)

__version__ = "0.1.0"
