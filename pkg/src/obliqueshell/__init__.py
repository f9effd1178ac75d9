"""Spectra, eigenfunctions, and resolvents of two-dimensional Schrodinger
operators with oblique transmission conditions on a smooth closed curve,
plus their non-relativistic limit from Dirac shell operators."""

__version__ = "1.0.0"

from .bie import (
    BoundaryOperatorMatrix,
    FieldSamples,
    VolumeGrid,
    apply_Psi_star,
    assemble_M3CM3,
    assemble_S,
    default_volume_grid,
    eval_Psi,
    eval_SL,
    jump_traces,
    make_volume_grid,
)
from .dirac import (
    DiracResolventBlocks,
    LimitStudyResult,
    correction_convergence,
    dirac_correction,
    limit_gaps,
    nonrel_limit_study,
    sqrt_shift_bounds,
)
from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    NumericalInstabilityError,
    ObliqueShellError,
    ParameterError,
    PoleProximityError,
    ResolutionError,
    SingularityError,
)
from .geometry import Curve, QuadratureGrid, curve_from_config, grid, make_curve
from .kernels import (
    DiracParameter,
    SpectralParameter,
    branch_sqrt,
    kernel_G,
    kernel_L,
    kernel_U,
)
from .specfun import bessel_ik_int, bessel_k
from .spectral import (
    DispersionSample,
    EigenfunctionField,
    EigenvalueEntry,
    KreinResult,
    SpectrumResult,
    circle_oracle_mu,
    delta_spectrum,
    dispersion,
    eigenfunction,
    enumerate_spectrum,
    find_eigenvalue,
    krein_apply,
    krein_transmission_residual,
    oblique_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
