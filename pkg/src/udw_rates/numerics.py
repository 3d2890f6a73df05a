"""Numerical kernels: adaptive quadrature, bracketed roots, Taylor coefficients."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NoSignChange, QuadratureFailure, RootFindingError, UnstableEstimate

__all__ = [
    "QuadratureOutcome",
    "RootOutcome",
    "CoefficientEstimate",
    "integrate_radial",
    "find_root_bracketed",
    "series_coefficient_estimate",
]

# 21-point Kronrod extension of the 10-point Gauss-Legendre rule (QUADPACK qk21).
# Only the non-negative half is listed; the rule is symmetric.
_XK = np.array([
    0.9956571630258081, 0.9739065285171717, 0.9301574913557082,
    0.8650633666889845, 0.7808177265864169, 0.6794095682990244,
    0.5627571346686047, 0.4333953941292472, 0.2943928627014602,
    0.14887433898163122, 0.0,
])
_WK = np.array([
    0.011694638867371874, 0.032558162307964725, 0.054755896574351995,
    0.07503967481091996, 0.0931254545836976, 0.10938715880229764,
    0.12349197626206584, 0.13470921731147334, 0.14277593857706009,
    0.14773910490133849, 0.1494455540029169,
])
# Gauss weights on the odd-indexed Kronrod nodes (the 10-point Gauss nodes).
_WG = np.array([
    0.06667134430868807, 0.14945134915058036, 0.219086362515982,
    0.2692667193099965, 0.295524224714753,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GWEIGHTS = np.zeros(21)
_GWEIGHTS[[1, 3, 5, 7, 9]] = _WG
_GWEIGHTS[[19, 17, 15, 13, 11]] = _WG


@dataclass(frozen=True)
class QuadratureOutcome:
    value: float
    abs_error: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class RootOutcome:
    root: float
    residual: float
    bracket_width: float


@dataclass(frozen=True)
class CoefficientEstimate:
    value: float
    uncertainty: float
    levels: int


def _gk21(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    if fx.shape != _NODES.shape:
        fx = np.broadcast_to(fx, _NODES.shape)
    if not np.all(np.isfinite(fx)):
        raise QuadratureFailure(f"non-finite integrand on [{a}, {b}]")
    kron = half * float(np.dot(_KWEIGHTS, fx))
    gauss = half * float(np.dot(_GWEIGHTS, fx))
    return kron, abs(kron - gauss)


def integrate_radial(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    max_evals: int = 10**6,
    breakpoints: Optional[Sequence[float]] = None,
) -> QuadratureOutcome:
    """Adaptive Gauss-Kronrod (10/21) integral of a vectorised ``f`` over [lo, hi].

    Nodes never touch a panel endpoint, so integrands with an integrable or
    removable singularity at ``lo`` (e.g. 1/p structure times p^2) are fine.
    ``hi`` may be ``inf``; the tail is then mapped onto a finite interval with
    ``x = lo + t / (1 - t)``.

    The per-panel error is |K21 - G10|, which overstates the error of the
    Kronrod value for smooth integrands.

    Raises:
        QuadratureFailure: budget exhausted before the tolerance was met.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")

    if math.isinf(hi):
        if math.isinf(lo):
            raise ValueError("lower limit must be finite")

        def g(t):
            return f(lo + t / (1.0 - t)) / (1.0 - t) ** 2

        cuts = [] if breakpoints is None else [b / (1.0 + b - lo) for b in breakpoints]
        return _adaptive(g, 0.0, 1.0, rtol, atol, max_evals, cuts)

    cuts = [] if breakpoints is None else [b for b in breakpoints if lo < b < hi]
    return _adaptive(f, lo, hi, rtol, atol, max_evals, cuts)


def _adaptive(f, lo, hi, rtol, atol, max_evals, cuts):
    edges = [lo] + sorted(set(cuts)) + [hi]
    heap = []
    total = 0.0
    err = 0.0
    evals = 0
    for a, b in zip(edges[:-1], edges[1:]):
        val, e = _gk21(f, a, b)
        evals += 21
        total += val
        err += e
        heapq.heappush(heap, (-e, a, b, val))

    while err > max(atol, rtol * abs(total)):
        if evals + 42 > max_evals:
            raise QuadratureFailure(
                f"unconverged after {evals} evaluations: value={total!r}, error={err!r}"
            )
        neg_e, a, b, val = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not (a < m < b):
            # panel cannot be split further in floating point
            heapq.heappush(heap, (neg_e, a, b, val))
            raise QuadratureFailure(
                f"panel [{a}, {b}] at float resolution: value={total!r}, error={err!r}"
            )
        v1, e1 = _gk21(f, a, m)
        v2, e2 = _gk21(f, m, b)
        evals += 42
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        if len(heap) % 64 == 0:
            # refresh running sums to stop drift from repeated add/subtract
            total = math.fsum(item[3] for item in heap)
            err = math.fsum(-item[0] for item in heap)

    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadratureOutcome(total, err, evals, True)


def find_root_bracketed(
    f: Callable[[float], float],
    a: float,
    b: float,
    xtol: float = 1e-14,
    ftol: float = 0.0,
    maxiter: int = 500,
) -> RootOutcome:
    """Brent's method: inverse quadratic / secant steps guarded by bisection.

    Iterates until the bracket is narrower than ``xtol`` and the residual is
    at most ``ftol`` (``ftol=0`` only asks for the bracket criterion).

    Raises:
        NoSignChange: f(a) and f(b) have the same strict sign.
        RootFindingError: ``ftol`` unreachable before the bracket collapses.
    """
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return RootOutcome(a, 0.0, 0.0)
    if fb == 0.0:
        return RootOutcome(b, 0.0, 0.0)
    if fa * fb > 0:
        raise NoSignChange(f"f({a})={fa} and f({b})={fb} have the same sign")

    c, fc = a, fa
    d = e = b - a
    for _ in range(maxiter):
        if fb * fc > 0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol = 2.0 * np.finfo(float).eps * abs(b) + 0.5 * xtol
        m = 0.5 * (c - b)
        residual_ok = ftol <= 0.0 or abs(fb) <= ftol
        if fb == 0.0 or (abs(m) <= tol and residual_ok):
            return RootOutcome(b, fb, abs(c - b))
        if abs(m) <= tol:
            # bracket at resolution but residual still too large: bisect to the limit
            nxt = b + m
            if nxt == b or nxt == c:
                raise RootFindingError(
                    f"|f| = {abs(fb)} > ftol = {ftol} at float resolution near {b}"
                )
            d = e = m
        elif abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        if abs(d) > tol:
            b = b + d
        else:
            b = b + (tol if m > 0 else -tol)
        fb = f(b)
    raise RootFindingError(f"no convergence after {maxiter} iterations")


def _richardson_table(values, ratio):
    """Neville-style table for an error series in even powers of the step."""
    rows = [list(values)]
    for j in range(1, len(values)):
        factor = ratio ** (2 * j)
        prev = rows[-1]
        rows.append([(factor * prev[k + 1] - prev[k]) / (factor - 1.0) for k in range(len(prev) - 1)])
    return rows


def series_coefficient_estimate(
    f: Callable[[float], float],
    x0: float,
    order: int,
    scale: float,
    levels: int = 5,
    rtol: float = 1e-4,
) -> CoefficientEstimate:
    """Taylor coefficient ``f^(order)(x0) / order!`` from central differences.

    Steps ``scale, scale/2, ...`` feed a Richardson table in h^2; the
    uncertainty is the spread between the last two diagonal entries.

    Raises:
        UnstableEstimate: the last two diagonal entries differ by more than
            ``rtol`` relative (with an absolute floor tied to the data scale).
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if order == 0:
        return CoefficientEstimate(float(f(x0)), 0.0, 0)

    f0 = float(f(x0)) if order == 2 else 0.0
    base = []
    magnitude = abs(f0)
    for i in range(levels):
        h = scale / 2.0**i
        fp, fm = float(f(x0 + h)), float(f(x0 - h))
        magnitude = max(magnitude, abs(fp), abs(fm))
        if order == 1:
            base.append((fp - fm) / (2.0 * h))
        else:
            base.append((fp - 2.0 * f0 + fm) / (2.0 * h * h))
    rows = _richardson_table(base, 2.0)
    diag = [row[-1] for row in rows]
    best = diag[-1]
    spread = abs(diag[-1] - diag[-2])
    h_min = scale / 2.0 ** (levels - 1)
    # rounding noise of the finest stencil, amplified by the extrapolation
    noise = 64.0 * np.finfo(float).eps * magnitude / h_min**order
    if spread > rtol * abs(best) + noise:
        raise UnstableEstimate(f"Richardson levels disagree: {diag}")
    return CoefficientEstimate(best, max(spread, noise), levels)
