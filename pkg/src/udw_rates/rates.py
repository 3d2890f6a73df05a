"""Emission and absorption rates: closed forms and momentum quadrature.

Closed forms assume the Gaussian packet of :class:`GaussianCoM` and the
second-order (in p / m c) templates. The quadrature path averages the exact
template over any radial momentum density.

The ``*_semirel`` / ``*_nonrel`` helpers are plain float functions without
parameter validation; they accept E < 0 and ``L = inf`` so that series
coefficients can be probed around E = 0 and the L -> inf limit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Union

import numpy as np

from .errors import AsymptoteError, DomainError, InvalidParameters
from .model import (
    NEAR_ASYMPTOTE_FRACTION,
    DetectorParams,
    Flag,
    GaussianCoM,
    MassConvention,
    Process,
    RateResult,
    Scaling,
    apply_scaling,
    convention_masses,
    gaussian_momentum_density,
    validate_process,
)
from .numerics import integrate_radial
from .template import (
    radicand_boundary,
    template_absorption,
    template_absorption_expanded,
    template_emission,
    template_emission_expanded,
)

__all__ = [
    "Method",
    "RateRequest",
    "N_SIGMA",
    "emission_rate_classical",
    "emission_rate_semirel",
    "emission_rate_nonrel",
    "absorption_rate_semirel",
    "absorption_rate_nonrel",
    "rate_emission_classical",
    "rate_emission_closed",
    "rate_absorption_closed",
    "rate_closed",
    "rate_quadrature",
    "compute_rate",
    "rate_leading_order",
    "leading_order_coefficients",
    "rate_infinite_mass_limit_check",
]

# Gaussian quadrature is truncated at N_SIGMA / L; the neglected mass is < 1e-21.
N_SIGMA = 10.0

TWO_PI = 2.0 * math.pi


class Method(str, enum.Enum):
    CLOSED_FORM = "closed"
    QUADRATURE = "quadrature"


# -- closed forms on plain floats -------------------------------------------------

def emission_rate_classical(E, lam=1.0):
    return lam**2 * E / TWO_PI


def emission_rate_semirel(m_g, m_e, E, c=1.0, lam=1.0, L=math.inf):
    x = 1.0 + 2.0 * E / (m_g * c * c)
    correction = 3.0 * (c * c * (m_g - m_e) + 2.0 * E) / (
        2.0 * L * L * c**4 * m_g * m_g * m_e * x**2.5
    )
    return lam**2 * c * c * m_g / TWO_PI * (1.0 - 1.0 / math.sqrt(x) + correction)


def emission_rate_nonrel(M, E, c=1.0, lam=1.0, L=math.inf):
    x = 1.0 + 2.0 * E / (M * c * c)
    correction = 3.0 * E / (L * L * c**4 * M**3 * x**2.5)
    return lam**2 * c * c * M / TWO_PI * (1.0 - 1.0 / math.sqrt(x) + correction)


def absorption_rate_semirel(m_g, m_e, E, c=1.0, lam=1.0, L=math.inf):
    y = 1.0 - 2.0 * E / (m_e * c * c)
    if y <= 0:
        raise AsymptoteError(f"absorption rate non-real: 2E={2 * E} >= m_e c^2={m_e * c * c}")
    correction = 3.0 * (c * c * (m_g - m_e) + 2.0 * E) / (
        2.0 * L * L * c**4 * m_e * m_e * m_g * y**2.5
    )
    return lam**2 * c * c * m_e / math.pi * (1.0 / math.sqrt(y) + correction)


def absorption_rate_nonrel(M, E, c=1.0, lam=1.0, L=math.inf):
    y = 1.0 - 2.0 * E / (M * c * c)
    if y <= 0:
        raise AsymptoteError(f"absorption rate non-real: 2E={2 * E} >= M c^2={M * c * c}")
    correction = 3.0 * E / (L * L * c**4 * M**3 * y**2.5)
    return lam**2 * c * c * M / math.pi * (1.0 / math.sqrt(y) + correction)


# -- RateResult wrappers ----------------------------------------------------------

def _finish(value, error, flags, scaling, params):
    scaling = Scaling(scaling)
    if scaling is not Scaling.RAW:
        factor = apply_scaling(1.0, scaling, params)
        value = apply_scaling(value, scaling, params)
        error = error * factor
    return RateResult(value, error, scaling, frozenset(flags))


def rate_emission_classical(params: DetectorParams, scaling: Scaling = Scaling.RAW) -> RateResult:
    """Emission rate of a detector on a fixed trajectory, lam^2 E / 2 pi."""
    return _finish(emission_rate_classical(params.E, params.lam), 0.0, (), scaling, params)


def rate_emission_closed(
    params: DetectorParams,
    L: float,
    convention: MassConvention = MassConvention.SEMIREL,
    scaling: Scaling = Scaling.RAW,
) -> RateResult:
    """Gaussian-packet emission rate to second order in the momentum spread.

    A packet narrower than the Compton wavelength is computed anyway and
    flagged ``ComptonViolation``.
    """
    convention = MassConvention(convention)
    if convention is MassConvention.CLASSICAL:
        return rate_emission_classical(params, scaling)
    flags = validate_process(params, Process.EMISSION, GaussianCoM(L), convention=convention).violations
    m_g, c, E, lam = params.m_g, params.c, params.E, params.lam
    if convention is MassConvention.SEMIREL:
        value = emission_rate_semirel(m_g, params.m_e, E, c, lam, L)
    else:
        M, _ = convention_masses(params, convention)
        value = emission_rate_nonrel(M, E, c, lam, L)
    return _finish(value, 0.0, flags, scaling, params)


def rate_absorption_closed(
    params: DetectorParams,
    L: float,
    convention: MassConvention = MassConvention.SEMIREL,
    scaling: Scaling = Scaling.RAW,
) -> RateResult:
    """Gaussian-packet absorption rate to second order in the momentum spread.

    Raises:
        AsymptoteError: classical convention (the large-mass limit diverges) or
            2E >= M c^2 where the closed form is non-real.
    """
    convention = MassConvention(convention)
    if convention is MassConvention.CLASSICAL:
        raise AsymptoteError("classical absorption rate undefined")
    report = validate_process(params, Process.ABSORPTION, GaussianCoM(L), convention=convention)
    if Flag.BEYOND_ASYMPTOTE in report:
        raise AsymptoteError(f"2E >= M c^2 for convention {convention.value}")
    m_g, c, E, lam = params.m_g, params.c, params.E, params.lam
    if convention is MassConvention.SEMIREL:
        value = absorption_rate_semirel(m_g, params.m_e, E, c, lam, L)
    else:
        M, _ = convention_masses(params, convention)
        value = absorption_rate_nonrel(M, E, c, lam, L)
    return _finish(value, 0.0, report.violations, scaling, params)


def rate_closed(process, params, L, convention=MassConvention.SEMIREL, scaling=Scaling.RAW):
    if Process(process) is Process.EMISSION:
        return rate_emission_closed(params, L, convention, scaling)
    return rate_absorption_closed(params, L, convention, scaling)


# -- quadrature -------------------------------------------------------------------

RadialDensity = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RateRequest:
    """Everything needed to evaluate one rate.

    ``dist`` is a :class:`GaussianCoM` or a callable radial density ``rho(p)``
    normalised so that ``int 4 pi p^2 rho dp = 1``. Closed forms need the
    Gaussian. ``cutoff`` is the momentum cutoff K; absorption quadrature
    defaults to K = L_p = 1/L. ``expanded`` swaps the exact template for its
    second-order expansion (quadrature only).
    """

    params: DetectorParams
    convention: MassConvention = MassConvention.SEMIREL
    process: Process = Process.EMISSION
    dist: Union[GaussianCoM, RadialDensity, None] = None
    method: Method = Method.CLOSED_FORM
    cutoff: Optional[float] = None
    expanded: bool = False
    scaling: Scaling = Scaling.RAW
    rtol: float = 1e-9
    atol: float = 1e-15

    def __post_init__(self):
        object.__setattr__(self, "convention", MassConvention(self.convention))
        object.__setattr__(self, "process", Process(self.process))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        if self.method is Method.CLOSED_FORM and not isinstance(self.dist, GaussianCoM):
            if self.convention is not MassConvention.CLASSICAL:
                raise InvalidParameters("closed-form rates need a GaussianCoM distribution")
        if self.cutoff is not None and not self.cutoff > 0:
            raise InvalidParameters(f"cutoff must be positive, got {self.cutoff}")


def rate_quadrature(request: RateRequest) -> RateResult:
    """Average the template over the momentum density by adaptive quadrature.

    Emission: ``lam^2 c^2 m_g / 4 pi * int 4 pi p^2 rho(p) T_em(p) dp``.
    Absorption: ``lam^2 c^2 m_e / 2 pi * int 4 pi p^2 rho(p) T_abs(p) dp``.
    The upper limit is ``min(K, radicand boundary, 10 / L)``; ``CutoffClamped``
    is set when the radicand boundary is the binding limit.

    With the default absorption cutoff K = L_p the integral only covers
    p < 1/L, i.e. part of the Gaussian; pass ``cutoff`` to widen it.

    Raises:
        AsymptoteError: classical absorption.
        DomainError: empty integration domain.
        QuadratureFailure: tolerance not reached.
    """
    params, process, convention = request.params, request.process, request.convention
    if convention is MassConvention.CLASSICAL:
        if process is Process.ABSORPTION:
            raise AsymptoteError("classical absorption rate undefined")
        return rate_emission_classical(params, request.scaling)

    m_lo, m_hi = convention_masses(params, convention)
    E, c, lam = params.E, params.c, params.lam
    dist = request.dist
    if dist is None:
        raise InvalidParameters("quadrature needs a momentum distribution")
    if isinstance(dist, GaussianCoM):
        density = lambda p: gaussian_momentum_density(dist, p)  # noqa: E731
        tail = N_SIGMA / dist.L
    else:
        density = dist
        tail = math.inf

    cutoff = request.cutoff
    if process is Process.ABSORPTION and cutoff is None:
        if not isinstance(dist, GaussianCoM):
            raise InvalidParameters("absorption quadrature needs a cutoff for a custom density")
        cutoff = dist.L_p

    flags = set()
    if isinstance(dist, GaussianCoM):
        flags |= validate_process(params, process, dist, convention=convention, cutoff=cutoff).violations
        flags.discard(Flag.BEYOND_ASYMPTOTE)
        flags.discard(Flag.NEAR_ASYMPTOTE)

    if process is Process.EMISSION:
        template = template_emission_expanded if request.expanded else template_emission
        prefactor = lam**2 * c * c * m_lo / (4.0 * math.pi)
    else:
        template = template_absorption_expanded if request.expanded else template_absorption
        prefactor = lam**2 * c * c * m_hi / TWO_PI
        if 2.0 * E > NEAR_ASYMPTOTE_FRACTION * m_hi * c * c:
            flags.add(Flag.NEAR_ASYMPTOTE)

    limits = [x for x in (cutoff, tail) if x is not None]
    upper = min(limits)
    boundary = None if request.expanded else radicand_boundary(process, m_lo, m_hi, E, c)
    if boundary is not None and boundary < upper:
        upper = boundary
        flags.add(Flag.CUTOFF_CLAMPED)
    if not upper > 0:
        raise DomainError("empty momentum integration domain")

    def integrand(p):
        return 4.0 * math.pi * p * p * density(p) * template(p, m_lo, m_hi, E, c)

    if math.isinf(upper):
        outcome = integrate_radial(integrand, 0.0, math.inf, rtol=request.rtol, atol=request.atol)
    else:
        outcome = integrate_radial(integrand, 0.0, upper, rtol=request.rtol, atol=request.atol)
    return _finish(
        prefactor * outcome.value, prefactor * outcome.abs_error, flags, request.scaling, params
    )


def compute_rate(request: RateRequest) -> RateResult:
    """Dispatch a request to the closed form or to quadrature."""
    if request.method is Method.QUADRATURE:
        return rate_quadrature(request)
    if request.convention is MassConvention.CLASSICAL:
        if request.process is Process.ABSORPTION:
            raise AsymptoteError("classical absorption rate undefined")
        return rate_emission_classical(request.params, request.scaling)
    return rate_closed(
        request.process, request.params, request.dist.L, request.convention, request.scaling
    )


# -- limits -----------------------------------------------------------------------

def leading_order_coefficients(process, convention) -> tuple:
    """Coefficients ``(a, b)`` of the lowest-order forms in eps = E / m_g c^2.

    Emission: ``R ~ (lam^2 E / 2 pi) (1 + b / (L m_g c)^2)`` with ``a = 1``.
    Absorption: ``R ~ (lam^2 c^2 m_g / pi) (1 + a eps (1 + b / (L m_g c)^2))``.
    """
    process, convention = Process(process), MassConvention(convention)
    if process is Process.EMISSION:
        if convention is MassConvention.CLASSICAL:
            return 1.0, 0.0
        return (1.0, 1.5) if convention is MassConvention.SEMIREL else (1.0, 3.0)
    table = {
        MassConvention.SEMIREL: (2.0, 0.75),
        MassConvention.NONREL_ME: (2.0, 1.5),
        MassConvention.NONREL_MG: (1.0, 3.0),
    }
    if convention not in table:
        raise AsymptoteError("classical absorption rate undefined")
    return table[convention]


def rate_leading_order(process, convention, params: DetectorParams, L: float) -> float:
    """Rate to first order in E / m_g c^2 (valid for E << m_g c^2).

    The absorption forms use the overall scale ``lam^2 c^2 m_g / pi``; with
    that scale the lowest-order coefficients agree with a direct expansion
    of the closed forms.
    """
    a, b = leading_order_coefficients(process, convention)
    m_g, c, E, lam = params.m_g, params.c, params.E, params.lam
    spread = b / (L * m_g * c) ** 2
    if Process(process) is Process.EMISSION:
        return lam**2 * E / TWO_PI * (1.0 + spread)
    eps = E / (m_g * c * c)
    return lam**2 * c * c * m_g / math.pi * (1.0 + a * eps * (1.0 + spread))


def rate_infinite_mass_limit_check(
    params: DetectorParams,
    L: float,
    mass_multipliers: Iterable[float],
    convention: MassConvention = MassConvention.SEMIREL,
) -> List[RateResult]:
    """Semirelativistic emission rates with m_g scaled by each multiplier.

    The sequence approaches the classical rate lam^2 E / 2 pi as the
    multiplier grows. Absorption has no such limit (its rate grows with m_e).
    """
    return [
        rate_emission_closed(params.with_mass(params.m_g * s), L, convention)
        for s in mass_multipliers
    ]
