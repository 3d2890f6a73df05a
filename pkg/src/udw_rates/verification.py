"""Self-check suites run by ``udw-rates verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .model import DetectorParams, GaussianCoM, MassConvention, Process
from .oracle import golden_rule_shape
from .rates import Method, RateRequest, compute_rate, emission_rate_semirel, rate_emission_closed
from .template import radicand_boundary, template_absorption, template_emission

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail} (measured {self.measured:.3e}, tolerance {self.tolerance:.1e})"


def suite_identity() -> SuiteResult:
    m_g, c = 1.0, 1.0
    worst = 0.0
    for E in np.linspace(0.0, 0.3, 50):
        m_e = m_g + E / c**2
        bound = radicand_boundary(Process.ABSORPTION, m_g, m_e, E, c)
        p_hi = 0.3 * m_g * c if bound is None else min(0.3 * m_g * c, 0.99 * bound)
        p = np.linspace(1e-4, p_hi, 50)
        lhs = template_absorption(p, m_g, m_e, E, c)
        rhs = 2.0 - template_emission(p, m_e, m_g, -E, c)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    tol = 1e-12
    return SuiteResult("identity", worst <= tol, worst, tol, "absorption vs mapped emission template, 50x50 grid")


def suite_oracle() -> SuiteResult:
    params = DetectorParams(1.0, 0.1)
    m_g, m_e, E, c = params.m_g, params.m_e, params.E, params.c
    spreads = []
    for process, template in ((Process.EMISSION, template_emission), (Process.ABSORPTION, template_absorption)):
        ratios = []
        for p in np.linspace(0.01, 0.29, 8):
            s = golden_rule_shape(process, float(p), params).value
            ratios.append(s / float(template(p, m_g, m_e, E, c)))
        ratios = np.array(ratios)
        spreads.append(float(np.ptp(ratios) / np.mean(ratios)))
    worst = max(spreads)
    tol = 1e-3
    return SuiteResult("oracle", worst <= tol, worst, tol, "golden-rule shape / template ratio spread")


def _quad(params, L, expanded):
    req = RateRequest(params, MassConvention.SEMIREL, Process.EMISSION, GaussianCoM(L),
                      Method.QUADRATURE, expanded=expanded, rtol=1e-13)
    return compute_rate(req).value


def suite_quadrature() -> SuiteResult:
    params = DetectorParams(1.0, 0.1)
    L = 10.0
    closed = rate_emission_closed(params, L).value
    rel = abs(_quad(params, L, True) - closed) / closed
    residuals = [_quad(params, L_, False) - rate_emission_closed(params, L_).value for L_ in (10.0, 20.0)]
    ratio = residuals[0] / residuals[1]
    ok = rel <= 1e-12 and abs(ratio - 16.0) <= 0.2 * 16.0
    return SuiteResult(
        "quadrature", ok, rel, 1e-12,
        f"expanded quadrature vs closed form; exact-template residual ratio under L_p halving {ratio:.3f}",
    )


def suite_limits() -> SuiteResult:
    E = 1.0
    devs = []
    for ratio in (1e2, 1e3, 1e4):
        # L E = 1 with the classical rate lam^2 E / 2 pi scaled to one
        value = emission_rate_semirel(ratio * E, ratio * E + E, E, 1.0, 1.0, 1.0 / E)
        devs.append(abs(value / (E / (2.0 * math.pi)) - 1.0))
    monotone = all(a > b for a, b in zip(devs, devs[1:]))
    tol = 1e-2
    return SuiteResult("limits", monotone and devs[-1] < tol, devs[-1], tol,
                       "semirel emission approaches the classical rate as m_g/E grows")


SUITES: Dict[str, Callable[[], SuiteResult]] = {
    "identity": suite_identity,
    "oracle": suite_oracle,
    "quadrature": suite_quadrature,
    "limits": suite_limits,
}


def run_suite(name: str) -> SuiteResult:
    try:
        return SUITES[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}") from None


def run_all() -> List[SuiteResult]:
    return [fn() for fn in SUITES.values()]
