"""Golden-rule oracle for the template functions.

Works only from the energy mismatch of the first-order amplitudes:

    emission:   Delta = |p - k|^2 / 2 m_g - p^2 / 2 m_e - E + c k
    absorption: Delta = |p + k|^2 / 2 m_e - p^2 / 2 m_g + E - c k

``p`` is the initial centre-of-mass momentum, ``k`` the field quantum and
``cos_theta`` the cosine of the angle between them. Summing over final
states with the delta function ``delta(Delta)`` gives the shape

    S(p) = int_{-1}^{1} dcos_theta  sum_{k* > 0} k* / (2 |dDelta/dk|(k*)),

computed here by root finding plus quadrature, without the template module.
For p -> 0 the emission root is k* = m_g c (sqrt(1 + 2E/m_g c^2) - 1) and
``|dDelta/dk| = k*/m_g + c``, so ``S(0) = m_g k* / (k* + m_g c)``; this is
m_g/2 times the emission template at p = 0. Exchanging the order of the
angle and momentum integrals shows the ratio S/T is m_g/2 for emission and
m_e for absorption at every p inside the template domain, matching the
ratio of the two rate prefactors.

:func:`finite_time_rate` replaces the delta function by the finite-time
kernel ``[sin(Delta t/2) / (Delta/2)]^2 / (2 pi t)``, whose large-t limit is
``delta(Delta)``; its value therefore converges to S(p) itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import sici

from .errors import DomainError, GrazingRoot, InvalidConvention, ResolutionError
from .model import DetectorParams, MassConvention, Process, convention_masses
from .numerics import find_root_bracketed, integrate_radial

__all__ = [
    "Mismatch",
    "ShapeOutcome",
    "KGridSpec",
    "FiniteTimeOutcome",
    "mismatch",
    "k_quadratic",
    "energy_roots",
    "delta_weight",
    "golden_rule_shape",
    "shape_at_rest",
    "finite_time_rate",
]

GRAZING_FRACTION = 1e-8


def _masses(params, convention):
    convention = MassConvention(convention)
    if convention is MassConvention.CLASSICAL:
        raise InvalidConvention("the oracle needs a dynamical centre of mass")
    return convention_masses(params, convention)


def mismatch(process, p, k, cos_theta, params: DetectorParams,
             convention: MassConvention = MassConvention.SEMIREL):
    """Final minus initial energy for a one-quantum transition (vectorised)."""
    m_g, m_e = _masses(params, convention)
    E, c = params.E, params.c
    if Process(process) is Process.EMISSION:
        return (p * p + k * k - 2.0 * p * k * cos_theta) / (2.0 * m_g) - p * p / (2.0 * m_e) - E + c * k
    return (p * p + k * k + 2.0 * p * k * cos_theta) / (2.0 * m_e) - p * p / (2.0 * m_g) + E - c * k


@dataclass(frozen=True)
class Mismatch:
    process: Process
    params: DetectorParams
    convention: MassConvention = MassConvention.SEMIREL

    def __call__(self, p, k, cos_theta):
        return mismatch(self.process, p, k, cos_theta, self.params, self.convention)


def k_quadratic(process, p, cos_theta, params, convention=MassConvention.SEMIREL):
    """Coefficients (a, b, c0) with ``Delta(k) = a k^2 + b k + c0``."""
    m_g, m_e = _masses(params, convention)
    E, c = params.E, params.c
    # p^2/2m_g - p^2/2m_e written without cancellation
    recoil = p * p * (m_e - m_g) / (2.0 * m_g * m_e)
    if Process(process) is Process.EMISSION:
        return 1.0 / (2.0 * m_g), c - p * cos_theta / m_g, recoil - E
    return 1.0 / (2.0 * m_e), p * cos_theta / m_e - c, E - recoil


def energy_roots(process, p, cos_theta, params, convention=MassConvention.SEMIREL,
                 polish=True) -> List[Tuple[float, float]]:
    """Non-negative roots k* of Delta(k) at fixed angle, with |dDelta/dk| there.

    Roots come from the sign-aware quadratic formula and are optionally
    refined by bracketed root finding on :func:`mismatch` itself.
    """
    a, b, c0 = k_quadratic(process, p, cos_theta, params, convention)
    disc = b * b - 4.0 * a * c0
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    candidates = [q / a] + ([c0 / q] if q != 0 else [])
    if disc == 0:
        candidates = candidates[:1]
    out = []
    f = lambda k: mismatch(process, p, k, cos_theta, params, convention)  # noqa: E731
    for k in candidates:
        if k < 0:
            continue
        if polish and k > 0:
            k = _polish(f, k)
        out.append((k, abs(2.0 * a * k + b)))
    return out


def _polish(f, k):
    width = 1e-9 * k + 1e-300
    lo, hi = max(k - width, 0.0), k + width
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        return k
    return find_root_bracketed(f, lo, hi, xtol=4e-16 * k).root


def delta_weight(process, p, cos_theta, params, convention=MassConvention.SEMIREL,
                 grazing_tol: Optional[float] = None, polish=True) -> float:
    """Sum over positive roots of ``k* / (2 |dDelta/dk|)`` at one angle.

    Raises:
        GrazingRoot: a positive root with ``|dDelta/dk| < grazing_tol``
            (default 1e-8 c).
    """
    if grazing_tol is None:
        grazing_tol = GRAZING_FRACTION * params.c
    total = 0.0
    for k, slope in energy_roots(process, p, cos_theta, params, convention, polish):
        if k == 0.0:
            continue
        if slope < grazing_tol:
            raise GrazingRoot(f"tangential root k={k} at cos_theta={cos_theta}")
        total += k / (2.0 * slope)
    return total


@dataclass(frozen=True)
class ShapeOutcome:
    value: float
    abs_error: float
    grazing_excluded: int


def shape_at_rest(process, params, convention=MassConvention.SEMIREL) -> float:
    """Analytic S(0): the mismatch is angle independent at p = 0."""
    m_g, m_e = _masses(params, convention)
    E, c = params.E, params.c
    if Process(process) is Process.EMISSION:
        k = m_g * c * (math.sqrt(1.0 + 2.0 * E / (m_g * c * c)) - 1.0)
        return m_g * k / (k + m_g * c)
    disc = 1.0 - 2.0 * E / (m_e * c * c)
    if disc < 0:
        raise DomainError("absorption forbidden at rest: 2E > m_e c^2")
    # k^2/2m_e - c k + E = 0: roots m_e c (1 +- sqrt(disc)), both with slope c sqrt(disc)
    return 2.0 * m_e / math.sqrt(disc)


def _angle_breaks(process, p, params, convention):
    """Angles where the k-discriminant or the linear coefficient vanish."""
    a, b0, c0 = k_quadratic(process, p, 0.0, params, convention)
    _, b1, _ = k_quadratic(process, p, 1.0, params, convention)
    slope = b1 - b0
    if slope == 0:
        return [], []
    disc_zeros = []
    if 4.0 * a * c0 >= 0:
        r = math.sqrt(4.0 * a * c0)
        disc_zeros = [u for u in ((r - b0) / slope, (-r - b0) / slope) if -1.0 < u < 1.0]
    lin_zero = [u for u in (-b0 / slope,) if -1.0 < u < 1.0]
    return disc_zeros, lin_zero


def golden_rule_shape(process, p, params, convention=MassConvention.SEMIREL,
                      rtol=1e-11, polish=True) -> ShapeOutcome:
    """Golden-rule shape S(p) by angular quadrature over energy-conserving roots.

    Discriminant zeros inside (-1, 1) are tangential (grazing) roots where
    the integrand has an inverse square-root singularity; panels ending there
    are mapped with ``u = u_g +- s^2`` before integration. Nodes that still land
    within the grazing tolerance are dropped and counted.

    Raises:
        DomainError: no non-negative root at any angle (process forbidden).
    """
    process = Process(process)
    if p < 0:
        raise DomainError("p must be non-negative")
    if p == 0.0:
        return ShapeOutcome(shape_at_rest(process, params, convention), 0.0, 0)

    disc_zeros, lin_zero = _angle_breaks(process, p, params, convention)
    edges = sorted({-1.0, 1.0, *disc_zeros, *lin_zero})
    singular = set(disc_zeros)
    excluded = [0]

    def weight(u):
        try:
            return delta_weight(process, p, u, params, convention, polish=polish)
        except GrazingRoot:
            excluded[0] += 1
            return 0.0

    any_root = False
    total = 0.0
    error = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        if energy_roots(process, p, mid, params, convention, polish=False):
            any_root = True
        pieces = _singular_pieces(lo, hi, lo in singular, hi in singular)
        for u_of_s, jac in pieces:
            def integrand(s, u_of_s=u_of_s, jac=jac):
                s = np.atleast_1d(s)
                return np.array([weight(u_of_s(x)) * jac(x) for x in s])

            out = integrate_radial(integrand, 0.0, 1.0, rtol=rtol, atol=1e-300)
            total += out.value
            error += out.abs_error
    if not any_root:
        raise DomainError(f"{process.value} kinematically forbidden at p={p}")
    return ShapeOutcome(total, error, excluded[0])


def _singular_pieces(lo, hi, left_singular, right_singular):
    """Maps s in [0, 1] onto [lo, hi], squaring near singular endpoints."""
    if left_singular and right_singular:
        mid = 0.5 * (lo + hi)
        return _singular_pieces(lo, mid, True, False) + _singular_pieces(mid, hi, False, True)
    w = hi - lo
    if left_singular:
        return [(lambda s: lo + w * s * s, lambda s: 2.0 * w * s)]
    if right_singular:
        return [(lambda s: hi - w * s * s, lambda s: 2.0 * w * s)]
    return [(lambda s: lo + w * s, lambda s: w)]


# -- finite-time kernel --------------------------------------------------------------

@dataclass(frozen=True)
class KGridSpec:
    """Momentum grid for the finite-time estimator.

    Attributes:
        k_max: Upper momentum limit; default ``200 (m c + p)``.
        edge_spacing: Uniform panel width in the oscillatory zone; default an
            eighth of the local sinc period. Must not exceed ``pi / (2 t |dDelta/dk|)``
            at a window edge.
        far_periods: Beyond this many sinc periods past the last edge the
            ``sin^2`` factor is replaced by its mean 1/2.
        nodes_per_panel: Gauss-Legendre nodes per uniform panel.
        rtol: Relative tolerance of the adaptive far-zone integral.
    """

    k_max: Optional[float] = None
    edge_spacing: Optional[float] = None
    far_periods: float = 2000.0
    nodes_per_panel: int = 8
    rtol: float = 1e-10


@dataclass(frozen=True)
class FiniteTimeOutcome:
    value: float
    abs_error: float
    edges: Tuple[float, ...]


_GL8 = np.polynomial.legendre.leggauss(8)


def _kernel_angle_integral(A, B, t):
    """int_{-1}^{1} du 4 sin^2((A + B u) t / 2) / (A + B u)^2, vectorised in A, B."""
    A = np.asarray(A, dtype=float)
    B = np.abs(np.asarray(B, dtype=float))
    A, B = np.broadcast_arrays(A, B)
    out = np.empty(A.shape)
    small = B * t < 0.5
    if np.any(small):
        x, w = _GL8
        d = A[small, None] + B[small, None] * x[None, :]
        vals = t * t * np.sinc(d * t / (2.0 * math.pi)) ** 2
        out[small] = vals @ w
    big = ~small
    if np.any(big):
        out[big] = (_antiderivative(A[big] + B[big], t) - _antiderivative(A[big] - B[big], t)) / B[big]
    return out


def _antiderivative(x, t):
    # d/dx [2 t Si(x t) - 4 sin^2(x t / 2) / x] = 4 sin^2(x t / 2) / x^2
    si, _ = sici(x * t)
    half = 0.5 * x * t
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(x == 0.0, 0.0, 4.0 * np.sin(half) ** 2 / np.where(x == 0.0, 1.0, x))
    return 2.0 * t * si - tail


def _edge_roots(process, p, params, convention):
    """Positive k where Delta(k, u = +-1) = 0, with the k-slope there."""
    edges = []
    for u in (-1.0, 1.0):
        for k, slope in energy_roots(process, p, u, params, convention, polish=True):
            if k > 0:
                edges.append((k, slope))
    return sorted(edges)


def _largest_root_at_level(a, b, c0, level):
    """Largest real k with a k^2 + b k + c0 = level (a > 0)."""
    disc = b * b - 4.0 * a * (c0 - level)
    return (-b + math.sqrt(max(disc, 0.0))) / (2.0 * a)


def _uniform_gl(f, lo, hi, h, x, w):
    n = max(1, int(math.ceil((hi - lo) / h)))
    total = 0.0
    chunk = 4096
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        left = lo + (hi - lo) * np.arange(start, stop) / n
        right = lo + (hi - lo) * np.arange(start + 1, stop + 1) / n
        mids = 0.5 * (left + right)
        halves = 0.5 * (right - left)
        nodes = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
        vals = f(nodes).reshape(stop - start, -1)
        total += math.fsum((vals @ w) * halves)
    return total


def finite_time_rate(process, p, t, params, k_grid: KGridSpec = KGridSpec(),
                     convention=MassConvention.SEMIREL) -> FiniteTimeOutcome:
    """Transition probability per unit time after an interaction time ``t``.

    ``(1 / 2 pi t) int dk (k / 2) int dcos_theta [sin(Delta t/2) / (Delta/2)]^2``.
    The angular integral is closed form through the sine integral (Delta is
    linear in cos_theta). In k, uniform Gauss-Legendre panels cover everything
    up to ``far_periods`` sinc periods past the last window edge; beyond that
    the oscillating part averages out and ``sin^2 -> 1/2`` is integrated
    adaptively. As t grows the value tends to S(p) with an O(1/t) error; the
    sharp switching leaves a ``log(k_max) / t`` piece, so ``k_max`` is finite.

    Raises:
        ResolutionError: ``k_grid.edge_spacing`` exceeds
            ``pi / (2 t |dDelta/dk|)`` at a window edge.
    """
    process = Process(process)
    m_g, m_e = _masses(params, convention)
    c = params.c
    if t <= 0:
        raise ValueError("interaction time must be positive")
    m_final = m_g if process is Process.EMISSION else m_e
    k_max = k_grid.k_max if k_grid.k_max is not None else 200.0 * (m_final * c + p)

    def exact(k):
        k = np.asarray(k, dtype=float)
        A = mismatch(process, p, k, 0.0, params, convention)
        return 0.5 * k * _kernel_angle_integral(A, p * k / m_final, t)

    def averaged(k):
        k = np.asarray(k, dtype=float)
        A = mismatch(process, p, k, 0.0, params, convention)
        B = p * k / m_final
        return 0.5 * k * 4.0 / ((A - B) * (A + B))

    edges = _edge_roots(process, p, params, convention)
    for k_edge, slope in edges:
        limit = math.pi / (2.0 * t * max(slope, 1e-8 * c))
        if k_grid.edge_spacing is not None and k_grid.edge_spacing > limit:
            raise ResolutionError(
                f"edge spacing {k_grid.edge_spacing} exceeds pi/(2 t |dDelta/dk|) = {limit} at k={k_edge}"
            )

    # end of the oscillatory zone: |Delta| t >= 2 pi N for both u = +-1
    level = 2.0 * math.pi * k_grid.far_periods / t
    k_hi = 0.0
    slope_max = 0.0
    for u in (-1.0, 1.0):
        a, b, c0 = k_quadratic(process, p, u, params, convention)
        k_hi = max(k_hi, _largest_root_at_level(a, b, c0, level))
    k_hi = min(max(k_hi, 0.0), k_max)
    for u in (-1.0, 1.0):
        a, b, _ = k_quadratic(process, p, u, params, convention)
        slope_max = max(slope_max, abs(b), abs(2.0 * a * k_hi + b))
    h = k_grid.edge_spacing
    if h is None:
        h = math.pi / (4.0 * t * max(slope_max, 1e-8 * c))

    total = 0.0
    error = 0.0
    if k_hi > 0.0:
        x8, w8 = np.polynomial.legendre.leggauss(k_grid.nodes_per_panel)
        xs, ws = np.polynomial.legendre.leggauss(max(2, k_grid.nodes_per_panel // 2))
        fine = _uniform_gl(exact, 0.0, k_hi, h, x8, w8)
        coarse = _uniform_gl(exact, 0.0, k_hi, h, xs, ws)
        total += fine
        error += abs(fine - coarse)
    if k_hi < k_max:
        out = integrate_radial(averaged, k_hi, k_max, rtol=k_grid.rtol, atol=1e-300)
        total += out.value
        error += out.abs_error
    scale = 1.0 / (2.0 * math.pi * t)
    return FiniteTimeOutcome(total * scale, error * scale, tuple(k for k, _ in edges))
