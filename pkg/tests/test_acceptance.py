"""Acceptance criteria 1-9, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary."""

import csv
import math
import time

import numpy as np
import pytest

from udw_rates import (
    DetectorParams,
    GaussianCoM,
    MassConvention,
    Process,
    RateRequest,
    Scaling,
    compute_rate,
    rate_emission_classical,
    rate_emission_closed,
    template_absorption,
    template_emission,
)
from udw_rates.numerics import series_coefficient_estimate
from udw_rates.oracle import finite_time_rate, golden_rule_shape
from udw_rates.rates import (
    Method,
    absorption_rate_nonrel,
    absorption_rate_semirel,
    emission_rate_nonrel,
    emission_rate_semirel,
)
from udw_rates.sweep import FigureRecipe, write_figure
from udw_rates.template import radicand_boundary


def _report(record, number, passed, detail):
    record(number, passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, detail


def test_criterion_1_classical_unit(acceptance_record):
    rng = np.random.default_rng(1)
    worst = 0.0
    for lam, E in zip(rng.uniform(0.01, 10.0, 200), rng.uniform(1e-6, 1e3, 200)):
        value = rate_emission_classical(DetectorParams(1.0, E, lam=lam), Scaling.CLASSICAL_UNIT).value
        worst = max(worst, abs(value - 1.0))
    params = DetectorParams(1.0, 0.3, lam=2.0)
    n = 2000
    start = time.perf_counter()
    for _ in range(n):
        rate_emission_classical(params, Scaling.CLASSICAL_UNIT)
    per_call = (time.perf_counter() - start) / n
    passed = worst <= 1e-15 and per_call < 1e-3
    _report(acceptance_record, 1, passed, f"max |scaled - 1| = {worst:.1e}, {per_call * 1e6:.1f} us per call")


def test_criterion_2_equal_mass_reduction(acceptance_record):
    rng = np.random.default_rng(2)
    n = 10_000
    m = rng.uniform(0.1, 10.0, n)
    c = rng.uniform(0.5, 2.0, n)
    E = rng.uniform(0.0, 0.45, n) * m * c * c
    lam = rng.uniform(0.1, 3.0, n)
    L = rng.uniform(1.01, 100.0, n) / (m * c)
    worst = 0.0
    for i in range(n):
        args = (E[i], c[i], lam[i], L[i])
        pairs = (
            (emission_rate_semirel(m[i], m[i], *args), emission_rate_nonrel(m[i], *args)),
            (absorption_rate_semirel(m[i], m[i], *args), absorption_rate_nonrel(m[i], *args)),
        )
        for semi, nonrel in pairs:
            if nonrel != 0.0:
                worst = max(worst, abs(semi - nonrel) / abs(nonrel))
            else:
                worst = max(worst, abs(semi))
    _report(acceptance_record, 2, worst <= 1e-14, f"max relative deviation {worst:.1e} over {n} draws")


def test_criterion_3_mapping_identity(acceptance_record):
    m_g, c = 1.0, 1.0
    start = time.perf_counter()
    worst = 0.0
    for E in np.linspace(0.0, 0.45, 50):
        m_e = m_g + E
        bound = radicand_boundary(Process.ABSORPTION, m_g, m_e, E, c)
        p = np.linspace(0.0, 0.99 * min(bound, 0.9), 50)
        lhs = template_absorption(p, m_g, m_e, E, c)
        rhs = 2.0 - template_emission(p, m_e, m_g, -E, c)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    elapsed = time.perf_counter() - start
    passed = worst <= 1e-12 and elapsed < 1.0
    _report(acceptance_record, 3, passed, f"max deviation {worst:.1e}, {elapsed:.3f} s")


def test_criterion_4_oracle_shape(acceptance_record):
    params = DetectorParams(1.0, 0.1)
    m_g, m_e, E, c = params.m_g, params.m_e, params.E, params.c
    start = time.perf_counter()
    spreads = {}
    for process, template in ((Process.EMISSION, template_emission), (Process.ABSORPTION, template_absorption)):
        bound = radicand_boundary(process, m_g, m_e, E, c)
        p_hi = 0.3 * m_g * c if bound is None else min(0.3 * m_g * c, bound)
        ps = np.linspace(p_hi / 9, p_hi * 8 / 9, 8)
        ratios = np.array([golden_rule_shape(process, p, params).value / template(p, m_g, m_e, E, c) for p in ps])
        spreads[process.value] = float(np.ptp(ratios) / np.mean(ratios))
    p0 = 1e-6
    at_zero = golden_rule_shape(Process.EMISSION, p0, params).value / template_emission(p0, m_g, m_e, E, c)
    elapsed = time.perf_counter() - start
    passed = max(spreads.values()) <= 1e-3 and abs(at_zero - m_g / 2) <= 1e-6 and elapsed < 30
    _report(
        acceptance_record, 4, passed,
        f"spreads {spreads['emission']:.1e} (em) {spreads['absorption']:.1e} (abs), "
        f"p->0 ratio {at_zero:.12f}, {elapsed:.2f} s",
    )


def test_criterion_5_quadrature_consistency(acceptance_record):
    params = DetectorParams(1.0, 0.1)
    start = time.perf_counter()

    def quad(L, expanded):
        req = RateRequest(params, MassConvention.SEMIREL, Process.EMISSION, GaussianCoM(L),
                          Method.QUADRATURE, expanded=expanded, rtol=1e-13)
        return compute_rate(req).value

    L = 10.0
    closed = rate_emission_closed(params, L).value
    rel = abs(quad(L, True) - closed) / closed
    residual = [quad(Lx, False) - rate_emission_closed(params, Lx).value for Lx in (L, 2 * L)]
    ratio = residual[0] / residual[1]
    elapsed = time.perf_counter() - start
    passed = rel <= 1e-12 and abs(ratio - 16.0) <= 0.2 * 16.0 and elapsed < 10
    _report(acceptance_record, 5, passed,
            f"expanded rel diff {rel:.1e}, residual ratio {ratio:.3f}, {elapsed:.3f} s")


def test_criterion_6_infinite_mass(acceptance_record):
    E = 1.0
    start = time.perf_counter()
    devs = []
    for ratio in (1e2, 1e3, 1e4):
        params = DetectorParams(ratio * E, E)
        value = rate_emission_closed(params, 1.0 / E, MassConvention.SEMIREL, Scaling.CLASSICAL_UNIT).value
        devs.append(abs(value - 1.0))
    elapsed = time.perf_counter() - start
    monotone = devs[0] > devs[1] > devs[2]
    passed = monotone and devs[-1] < 1e-2 and elapsed < 1.0
    _report(acceptance_record, 6, passed, "deviations " + ", ".join(f"{d:.2e}" for d in devs))


def test_criterion_7_lowest_order_coefficients(acceptance_record):
    m_g, c, lam = 1.0, 1.0, 1.0
    eps = 1e-4
    E = eps * m_g * c * c
    classical = lam**2 * E / (2 * math.pi)
    s0 = 0.01 / (m_g * c) ** 2

    emission = {
        "semirel": lambda L: emission_rate_semirel(m_g, m_g + E / c**2, E, c, lam, L),
        "nonrel-mg": lambda L: emission_rate_nonrel(m_g, E, c, lam, L),
        "nonrel-me": lambda L: emission_rate_nonrel(m_g + E / c**2, E, c, lam, L),
    }
    expected = {"semirel": 1.5, "nonrel-mg": 3.0, "nonrel-me": 3.0}
    measured = {}
    for name, rate in emission.items():
        est = series_coefficient_estimate(lambda s: rate(1.0 / math.sqrt(s)) / classical, s0, 1, s0 / 2)
        measured[name] = est.value * (m_g * c) ** 2
    em_dev = max(abs(measured[k] / expected[k] - 1.0) for k in expected)

    # absorption: R / (lam^2 c^2 m_g / pi) ~ 1 + a eps (1 + b / (L m_g c)^2)
    scale = lam**2 * c * c * m_g / math.pi
    absorption = {
        "semirel": lambda e, L: absorption_rate_semirel(m_g, m_g + e / c**2, e, c, lam, L),
        "nonrel-me": lambda e, L: absorption_rate_nonrel(m_g + e / c**2, e, c, lam, L),
        "nonrel-mg": lambda e, L: absorption_rate_nonrel(m_g, e, c, lam, L),
    }
    stated = {"semirel": (2.0, 0.75), "nonrel-me": (2.0, 1.5), "nonrel-mg": (1.0, 3.0)}
    abs_dev = 0.0
    notes = []
    L0 = 1.0 / math.sqrt(s0)
    for name, rate in absorption.items():
        a = series_coefficient_estimate(lambda e: rate(e * m_g * c * c, math.inf) / scale, 0.0, 1, 1e-3).value
        ab = series_coefficient_estimate(
            lambda e: (rate(e * m_g * c * c, L0) - rate(e * m_g * c * c, math.inf)) / (scale * s0), 0.0, 1, 1e-3
        ).value * (m_g * c) ** 2
        b = ab / a
        a_ref, b_ref = stated[name]
        abs_dev = max(abs_dev, abs(a / a_ref - 1.0), abs(b / b_ref - 1.0))
        notes.append(f"{name} a={a:.6f} b={b:.6f}")
    passed = em_dev <= 1e-3 and abs_dev <= 1e-3
    detail = (
        "emission " + ", ".join(f"{k}={v:.6f}" for k, v in measured.items())
        + f" (max rel dev {em_dev:.1e}); absorption " + ", ".join(notes)
        + f" (max rel dev vs stated {abs_dev:.1e})"
    )
    _report(acceptance_record, 7, passed, detail)


def _read_panel(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    axis = next(iter(rows[0]))
    curves = {}
    for row in rows:
        value = float(row["rate"]) if row["rate"] else None
        curves.setdefault(row["convention"], []).append((float(row[axis]), value, row))
    return curves


def test_criterion_8_figure_ordering(acceptance_record, tmp_path):
    start = time.perf_counter()
    em_dir = tmp_path / "em"
    ab_dir = tmp_path / "ab"
    write_figure(FigureRecipe.EMISSION_GRID, em_dir)
    write_figure(FigureRecipe.ABSORPTION_GRID, ab_dir)

    violations = 0
    for name in ("emission_lp_Mg", "emission_lp_Me", "emission_E_Mg", "emission_E_Me"):
        curves = _read_panel(em_dir / f"{name}.csv")
        nonrel = next(k for k in curves if k.startswith("nonrel"))
        for (x1, semi, _), (x2, other, _) in zip(curves["semirel"], curves[nonrel]):
            assert x1 == x2
            if not semi <= other:
                violations += 1

    growth = []
    monotone = True
    for name in ("absorption_E_Mg", "absorption_E_Me"):
        curves = _read_panel(ab_dir / f"{name}.csv")
        for conv, points in curves.items():
            row0 = points[0][2]
            pole = float(row0["marker_asymptote_semirel" if conv == "semirel" else "marker_asymptote_nonrel"])
            below = [(x, v) for x, v, _ in points if x < pole and v is not None]
            values = [v for _, v in below]
            monotone &= all(b > a for a, b in zip(values, values[1:]))
            near = [v for x, v in below if pole - x <= 0.02]
            growth.append(max(near) / values[0] if near else 0.0)
    elapsed = time.perf_counter() - start
    passed = violations == 0 and monotone and min(growth) > 10.0 and elapsed < 60
    _report(
        acceptance_record, 8, passed,
        f"emission ordering violations {violations}, absorption monotone {monotone}, "
        f"min growth near pole {min(growth):.1f}x, {elapsed:.2f} s",
    )


def test_criterion_9_finite_time(acceptance_record):
    params = DetectorParams(1.0, 0.1)
    c = params.c
    k_star = params.m_g * c * (math.sqrt(1.0 + 2.0 * params.E / (params.m_g * c * c)) - 1.0)
    t1 = 200.0 / (c * k_star)
    p, p0 = 0.3, 0.05
    start = time.perf_counter()
    ratios = []
    for t in (t1, 2 * t1, 4 * t1):
        a = finite_time_rate(Process.EMISSION, p, t, params).value
        b = finite_time_rate(Process.EMISSION, p0, t, params).value
        ratios.append(a / b)
    elapsed = time.perf_counter() - start
    d1 = abs(ratios[1] - ratios[0]) / abs(ratios[0])
    d2 = abs(ratios[2] - ratios[1]) / abs(ratios[1])
    halving = d2 / d1
    golden = golden_rule_shape(Process.EMISSION, p, params).value / golden_rule_shape(Process.EMISSION, p0, params).value
    passed = d1 <= 0.02 and 0.35 <= halving <= 0.65 and elapsed < 120
    _report(
        acceptance_record, 9, passed,
        f"drift t->2t {d1:.2e}, drift ratio {halving:.3f}, ratio at 4t {ratios[2]:.6f} "
        f"vs golden rule {golden:.6f}, {elapsed:.2f} s",
    )
