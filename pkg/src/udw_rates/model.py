"""Domain types, parameter validation and unit conventions.

Natural units with hbar = 1 are used throughout; the speed of light ``c`` is
kept explicit so that relativistic corrections can be tracked.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidConvention, InvalidParameters

__all__ = [
    "DetectorParams",
    "MassConvention",
    "Process",
    "Scaling",
    "Flag",
    "GaussianCoM",
    "RateResult",
    "ValidationReport",
    "derived_excited_mass",
    "convention_masses",
    "validate_process",
    "gaussian_momentum_density",
    "apply_scaling",
    "NEAR_ASYMPTOTE_FRACTION",
]

# 2E above this fraction of M c^2 is flagged as close to the absorption pole.
NEAR_ASYMPTOTE_FRACTION = 0.95


class Process(str, enum.Enum):
    EMISSION = "emission"
    ABSORPTION = "absorption"


class MassConvention(str, enum.Enum):
    """Which model of the centre of mass is used.

    ``SEMIREL`` carries distinct ground/excited masses, the two ``NONREL``
    variants use a single mass M (M = m_g or M = m_e) and ``CLASSICAL`` drops
    the centre of mass entirely (fixed trajectory).
    """

    SEMIREL = "semirel"
    NONREL_MG = "nonrel-mg"
    NONREL_ME = "nonrel-me"
    CLASSICAL = "classical"


class Scaling(str, enum.Enum):
    RAW = "raw"
    CLASSICAL_UNIT = "classical"
    COMPTON_UNIT = "compton"


class Flag(str, enum.Enum):
    CUTOFF_CLAMPED = "CutoffClamped"
    NEAR_ASYMPTOTE = "NearAsymptote"
    BEYOND_ASYMPTOTE = "BeyondAsymptote"
    COMPTON_VIOLATION = "ComptonViolation"
    CUTOFF_VIOLATION = "CutoffViolation"


@dataclass(frozen=True)
class DetectorParams:
    """Two-level detector with mass-energy equivalence.

    Attributes:
        m_g: Rest mass of the ground state.
        E: Internal energy gap.
        c: Speed of light.
        lam: Dimensionless coupling strength.
    """

    m_g: float
    E: float
    c: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        for name in ("m_g", "E", "c", "lam"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameters(f"{name} must be finite, got {value}")
        if self.m_g <= 0:
            raise InvalidParameters(f"m_g must be positive, got {self.m_g}")
        if self.E < 0:
            raise InvalidParameters(f"E must be non-negative, got {self.E}")
        if self.c <= 0:
            raise InvalidParameters(f"c must be positive, got {self.c}")
        if self.lam <= 0:
            raise InvalidParameters(f"lam must be positive, got {self.lam}")

    @property
    def m_e(self) -> float:
        return derived_excited_mass(self)

    def with_mass(self, m_g: float) -> "DetectorParams":
        return replace(self, m_g=m_g)


@dataclass(frozen=True)
class GaussianCoM:
    """Isotropic Gaussian centre-of-mass packet of spatial width ``L``.

    ``x0`` is kept for completeness; only ``|psi0(p)|^2`` enters the rates,
    so the packet centre never influences a result.
    """

    L: float
    x0: Tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParameters(f"L must be positive and finite, got {self.L}")

    @property
    def L_p(self) -> float:
        return 1.0 / self.L

    def density(self, p):
        return gaussian_momentum_density(self, p)


@dataclass(frozen=True)
class RateResult:
    value: float
    abs_error_estimate: float = 0.0
    scaling: Scaling = Scaling.RAW
    validity_flags: frozenset = frozenset()

    @property
    def flag_string(self) -> str:
        return ";".join(sorted(f.value for f in self.validity_flags))


@dataclass(frozen=True)
class ValidationReport:
    violations: frozenset = frozenset()

    @property
    def ok(self) -> bool:
        blocking = self.violations - {Flag.NEAR_ASYMPTOTE}
        return not blocking

    def __contains__(self, flag) -> bool:
        return flag in self.violations


def derived_excited_mass(params: DetectorParams) -> float:
    """Excited-state rest mass ``m_g + E / c**2``."""
    return params.m_g + params.E / params.c**2


def convention_masses(params: DetectorParams, convention: MassConvention) -> Tuple[float, float]:
    """Return the (ground, excited) kinetic masses used by a convention."""
    convention = MassConvention(convention)
    if convention is MassConvention.SEMIREL:
        return params.m_g, params.m_e
    if convention is MassConvention.NONREL_MG:
        return params.m_g, params.m_g
    if convention is MassConvention.NONREL_ME:
        m_e = params.m_e
        return m_e, m_e
    raise InvalidConvention("the classical convention has no centre-of-mass masses")


def validate_process(
    params: DetectorParams,
    process: Process,
    dist: Optional[GaussianCoM] = None,
    *,
    convention: MassConvention = MassConvention.SEMIREL,
    cutoff: Optional[float] = None,
) -> ValidationReport:
    """Collect violated validity bounds without raising.

    The same parameters may be fine for emission and unusable for absorption,
    so callers decide what to do with the report.
    """
    process = Process(process)
    convention = MassConvention(convention)
    m_g, c, E = params.m_g, params.c, params.E
    found = set()

    if dist is not None and convention is not MassConvention.CLASSICAL:
        if dist.L <= 1.0 / (m_g * c):
            found.add(Flag.COMPTON_VIOLATION)

    if process is Process.ABSORPTION and convention is not MassConvention.CLASSICAL:
        M = params.m_g if convention is MassConvention.NONREL_MG else params.m_e
        if 2 * E >= M * c**2:
            found.add(Flag.BEYOND_ASYMPTOTE)
        elif 2 * E > NEAR_ASYMPTOTE_FRACTION * M * c**2:
            found.add(Flag.NEAR_ASYMPTOTE)
        K = cutoff if cutoff is not None else (dist.L_p if dist is not None else None)
        if K is not None and E / (m_g * c**2) >= (K / (m_g * c) - 1.0) ** 2:
            found.add(Flag.CUTOFF_VIOLATION)

    return ValidationReport(frozenset(found))


def gaussian_momentum_density(dist: GaussianCoM, p, params: Optional[DetectorParams] = None):
    """Momentum-space probability density ``|psi0(p)|^2`` of the Gaussian packet.

    Uses the unitary Fourier convention, so ``int 4 pi p^2 density dp = 1`` and
    ``<p^2> = 3 / L^2``. ``params`` is accepted for interface symmetry and is
    not needed by the Gaussian.
    """
    L = dist.L
    p = np.asarray(p, dtype=float)
    out = (L * L / (2.0 * np.pi)) ** 1.5 * np.exp(-0.5 * (p * L) ** 2)
    return out if out.ndim else float(out)


def apply_scaling(value: float, scaling: Scaling, params: DetectorParams) -> float:
    """Convert a raw rate to a figure unit system.

    ``CLASSICAL_UNIT`` expresses the rate in units of the gap E and divides by
    lam^2 / 2 pi, so the classical emission rate becomes exactly 1.
    ``COMPTON_UNIT`` expresses the rate in units of m_g c^2.
    """
    scaling = Scaling(scaling)
    if scaling is Scaling.RAW:
        return value
    if scaling is Scaling.CLASSICAL_UNIT:
        if params.E == 0:
            raise InvalidParameters("classical-unit scaling needs a non-zero gap E")
        return value / (params.lam**2 * params.E / (2.0 * math.pi))
    return value / (params.m_g * params.c**2)
