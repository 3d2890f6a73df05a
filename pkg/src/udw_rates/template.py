"""Template functions for emission and absorption.

A template is the per-momentum factor that, averaged over the initial
centre-of-mass momentum distribution, gives the transition rate. The masses
are independent arguments: the nonrelativistic baseline uses equal masses
with a non-zero gap, and the emission/absorption mapping needs E < 0.

The difference of square roots ``(sqrt(A) - sqrt(B)) / p`` is evaluated as
``(A - B) / (p (sqrt(A) + sqrt(B)))``; ``A - B`` is exactly linear in ``p``,
so the ratio has no cancellation at small momentum.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import DomainError
from .model import Process

__all__ = [
    "SMALL_P_FRACTION",
    "template_emission",
    "template_absorption",
    "template_emission_expanded",
    "template_absorption_expanded",
    "template_small_p_limit",
    "radicand_boundary",
    "emission_radicands",
    "absorption_radicands",
]

# below SMALL_P_FRACTION * m c the exact templates return their p -> 0 limit
SMALL_P_FRACTION = 1e-6


def _as_array(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(~np.isfinite(p)):
        raise DomainError("momentum must be finite and non-negative")
    return p


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def emission_radicands(p, m_g, m_e, E, c=1.0):
    """Square-root arguments of the emission template (plus, minus branch)."""
    common = p * p * m_g / m_e + m_g * m_g * c * c + 2.0 * E * m_g
    lin = 2.0 * p * m_g * c
    return common + lin, common - lin


def absorption_radicands(p, m_g, m_e, E, c=1.0):
    """Square-root arguments of the absorption template (plus, minus branch)."""
    common = p * p * m_e / m_g + m_e * m_e * c * c - 2.0 * m_e * E
    lin = 2.0 * p * m_e * c
    return common + lin, common - lin


def _root_ratio(plus, minus, mass, c, what):
    if np.any(plus < 0) or np.any(minus < 0):
        raise DomainError(f"negative radicand in the {what} template")
    # (sqrt(plus) - sqrt(minus)) / p with plus - minus = 4 p mass c
    return 4.0 * mass * c / (np.sqrt(plus) + np.sqrt(minus))


def template_emission(p, m_g, m_e, E, c=1.0):
    """Emission template for initial momentum magnitude ``p``.

    ``2 - (sqrt(R+) - sqrt(R-)) / p`` with
    ``R+- = p^2 m_g/m_e +- 2 p m_g c + m_g^2 c^2 + 2 E m_g``.
    Vectorised over ``p``.

    Raises:
        DomainError: p < 0 or a radicand is negative.
    """
    p = _as_array(p)
    plus, minus = emission_radicands(p, m_g, m_e, E, c)
    value = 2.0 - _root_ratio(plus, minus, m_g, c, "emission")
    small = p < SMALL_P_FRACTION * m_g * c
    if np.any(small):
        value = np.where(small, template_small_p_limit(Process.EMISSION, m_g, m_e, E, c), value)
    return _scalar_or_array(value)


def template_absorption(p, m_g, m_e, E, c=1.0):
    """Absorption template ``(sqrt(Q+) - sqrt(Q-)) / p``.

    ``Q+- = p^2 m_e/m_g +- 2 p m_e c + m_e^2 c^2 - 2 m_e E``. A negative
    ``Q-`` means ``p`` lies beyond :func:`radicand_boundary`.

    Raises:
        DomainError: p < 0 or a radicand is negative.
    """
    p = _as_array(p)
    plus, minus = absorption_radicands(p, m_g, m_e, E, c)
    value = _root_ratio(plus, minus, m_e, c, "absorption")
    small = p < SMALL_P_FRACTION * m_g * c
    if np.any(small):
        value = np.where(small, template_small_p_limit(Process.ABSORPTION, m_g, m_e, E, c), value)
    return _scalar_or_array(value)


def template_emission_expanded(p, m_g, m_e, E, c=1.0):
    """Emission template to second order in p / (m_g c)."""
    p = np.asarray(p, dtype=float)
    x = 1.0 + 2.0 * E / (m_g * c * c)
    curvature = (c * c * (m_g - m_e) + 2.0 * E) / (c**4 * m_g * m_g * m_e * x**2.5)
    return _scalar_or_array(2.0 - 2.0 / math.sqrt(x) + p * p * curvature)


def template_absorption_expanded(p, m_g, m_e, E, c=1.0):
    """Absorption template to second order in p.

    Raises:
        DomainError: 2E >= m_e c^2.
    """
    p = np.asarray(p, dtype=float)
    y = 1.0 - 2.0 * E / (m_e * c * c)
    if y <= 0:
        raise DomainError("absorption expansion needs 2E < m_e c^2")
    curvature = (c * c * (m_g - m_e) + 2.0 * E) / (c**4 * m_e * m_e * m_g * y**2.5)
    return _scalar_or_array(2.0 / math.sqrt(y) + p * p * curvature)


def template_small_p_limit(process, m_g, m_e, E, c=1.0) -> float:
    """Value of a template at p -> 0.

    Raises:
        DomainError: absorption with 2E >= m_e c^2.
    """
    if Process(process) is Process.EMISSION:
        x = 1.0 + 2.0 * E / (m_g * c * c)
        if x <= 0:
            raise DomainError("emission limit needs 1 + 2E/(m_g c^2) > 0")
        return 2.0 - 2.0 / math.sqrt(x)
    y = 1.0 - 2.0 * E / (m_e * c * c)
    if y <= 0:
        raise DomainError("absorption limit needs 2E < m_e c^2")
    return 2.0 / math.sqrt(y)


def _smallest_positive_root(a, b, c0) -> Optional[float]:
    """Smallest p > 0 with a p^2 + b p + c0 = 0 (a > 0), or None."""
    disc = b * b - 4.0 * a * c0
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [q / a]
    if q != 0:
        roots.append(c0 / q)
    positive = [r for r in roots if r > 0]
    return min(positive) if positive else None


def radicand_boundary(process, m_g, m_e, E, c=1.0) -> Optional[float]:
    """Smallest positive momentum at which a template radicand reaches zero.

    Returns ``0.0`` if a radicand is already negative at p = 0 (empty
    domain) and ``None`` if no radicand vanishes for p > 0. Tangential
    zeros (perfect squares) count as boundaries.
    """
    if Process(process) is Process.EMISSION:
        a = m_g / m_e
        lin = 2.0 * m_g * c
        c0 = m_g * m_g * c * c + 2.0 * E * m_g
    else:
        a = m_e / m_g
        lin = 2.0 * m_e * c
        c0 = m_e * m_e * c * c - 2.0 * m_e * E
    if c0 < 0:
        return 0.0
    candidates = [
        r for r in (_smallest_positive_root(a, -lin, c0), _smallest_positive_root(a, lin, c0))
        if r is not None
    ]
    return min(candidates) if candidates else None
