"""Transition rates of an Unruh-DeWitt detector with quantised mass-energy."""

from .errors import (
    AsymptoteError,
    DomainError,
    GrazingRoot,
    InvalidConvention,
    InvalidParameters,
    NoSignChange,
    QuadratureFailure,
    ResolutionError,
    RootFindingError,
    UDWError,
    UnstableEstimate,
)
from .model import (
    DetectorParams,
    Flag,
    GaussianCoM,
    MassConvention,
    Process,
    RateResult,
    Scaling,
    ValidationReport,
    apply_scaling,
    derived_excited_mass,
    gaussian_momentum_density,
    validate_process,
)
from .rates import (
    Method,
    RateRequest,
    compute_rate,
    rate_absorption_closed,
    rate_emission_classical,
    rate_emission_closed,
    rate_infinite_mass_limit_check,
    rate_leading_order,
    rate_quadrature,
)
from .template import (
    radicand_boundary,
    template_absorption,
    template_emission,
    template_emission_expanded,
    template_small_p_limit,
)

__version__ = "0.1.0"
