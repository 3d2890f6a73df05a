"""Parameter sweeps and figure-data recipes.

Figures are compositions of :func:`run_sweep`; nothing here computes a rate
directly.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import UDWError
from .model import DetectorParams, GaussianCoM, MassConvention, Process, Scaling
from .rates import Method, RateRequest, compute_rate

__all__ = [
    "Axis",
    "Spacing",
    "Grid",
    "SweepSpec",
    "SweepRow",
    "FigureRecipe",
    "THREADS_ENV",
    "thread_count",
    "run_sweep",
    "format_float",
    "format_rows",
    "figure_recipe",
    "write_figure",
]

THREADS_ENV = "UDW_RATES_THREADS"


class Axis(str, enum.Enum):
    MASS = "mass"
    MOMENTUM_SPREAD = "lp"
    ENERGY_GAP = "E"


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


_AXIS_COLUMN = {Axis.MASS: "m_g", Axis.MOMENTUM_SPREAD: "L_p", Axis.ENERGY_GAP: "E"}


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    count: int
    spacing: Spacing = Spacing.LINEAR

    def __post_init__(self):
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        if not self.lo < self.hi:
            raise ValueError(f"grid needs min < max, got [{self.lo}, {self.hi}]")
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if self.spacing is Spacing.LOG and self.lo <= 0:
            raise ValueError("log spacing needs min > 0")

    def points(self) -> np.ndarray:
        if self.spacing is Spacing.LOG:
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """One axis varied, everything else fixed.

    ``fixed`` holds ``m_g, E, c, lam`` and the packet width as ``L``. On the
    mass axis ``L_times_E`` (if set) ties ``L`` to the gap instead.
    """

    axis: Axis
    grid: Grid
    process: Process = Process.EMISSION
    conventions: Tuple[MassConvention, ...] = (MassConvention.SEMIREL,)
    method: Method = Method.CLOSED_FORM
    scaling: Scaling = Scaling.RAW
    fixed: Dict[str, float] = field(default_factory=lambda: {"m_g": 1.0, "E": 0.1, "c": 1.0, "lam": 1.0, "L": 10.0})
    cutoff: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "process", Process(self.process))
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "scaling", Scaling(self.scaling))
        object.__setattr__(self, "conventions", tuple(MassConvention(c) for c in self.conventions))
        if not self.conventions:
            raise ValueError("at least one convention is required")

    @property
    def column(self) -> str:
        return _AXIS_COLUMN[self.axis]

    def point_inputs(self, x: float) -> Tuple[DetectorParams, float]:
        values = dict(self.fixed)
        if self.axis is Axis.MASS:
            values["m_g"] = x
        elif self.axis is Axis.ENERGY_GAP:
            values["E"] = x
        else:
            values["L"] = 1.0 / x
        if "L_times_E" in values:
            values["L"] = values.pop("L_times_E") / values["E"]
        params = DetectorParams(values["m_g"], values["E"], values.get("c", 1.0), values.get("lam", 1.0))
        return params, values["L"]


@dataclass(frozen=True)
class SweepRow:
    x: float
    convention: MassConvention
    process: Process
    method: Method
    value: Optional[float]
    error: Optional[float]
    flags: str


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def _evaluate(spec: SweepSpec, x: float, convention: MassConvention) -> SweepRow:
    try:
        params, L = spec.point_inputs(x)
        request = RateRequest(
            params=params,
            convention=convention,
            process=spec.process,
            dist=GaussianCoM(L),
            method=spec.method,
            cutoff=spec.cutoff,
            scaling=spec.scaling,
        )
        result = compute_rate(request)
    except (UDWError, ValueError, ArithmeticError) as exc:
        return SweepRow(x, convention, spec.process, spec.method, None, None, type(exc).__name__)
    return SweepRow(
        x, convention, spec.process, spec.method, result.value, result.abs_error_estimate, result.flag_string
    )


def run_sweep(spec: SweepSpec, threads: Optional[int] = None) -> List[SweepRow]:
    """Rows in ascending axis order, conventions in declared order.

    Failed points become rows with ``value=None`` and the exception name as flag.
    """
    jobs = [(x, conv) for x in spec.grid.points() for conv in spec.conventions]
    n = threads if threads is not None else thread_count()
    if n <= 1:
        return [_evaluate(spec, float(x), conv) for x, conv in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: _evaluate(spec, float(job[0]), job[1]), jobs))


def format_float(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".17g")


def format_rows(spec: SweepSpec, rows: Sequence[SweepRow], extra: Optional[Dict[str, float]] = None) -> str:
    extra = extra or {}
    header = [spec.column, "convention", "process", "method", "rate", "error", "flags", *extra]
    lines = [",".join(header)]
    tail = [format_float(v) for v in extra.values()]
    for r in rows:
        cells = [
            format_float(r.x), r.convention.value, r.process.value, r.method.value,
            format_float(r.value), format_float(r.error), r.flags, *tail,
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# -- figure recipes ---------------------------------------------------------------

class FigureRecipe(str, enum.Enum):
    MASS_SWEEP = "mass"
    EMISSION_GRID = "emission"
    ABSORPTION_GRID = "absorption"


@dataclass(frozen=True)
class Panel:
    name: str
    spec: SweepSpec
    markers: Dict[str, float]


# repo choices; none of these fixed values is taken from figure captions
GRID_POINTS = 200
LP_RANGE = (0.01, 1.2)
EMISSION_E_RANGE = (1e-3, 0.45)
ABSORPTION_E_RANGE = (0.005, 0.995)
FIXED_E = 0.1
FIXED_LP = 0.1
MASS_RANGE = (1.0, 1e4)


def _panels(recipe: FigureRecipe, points: int) -> List[Panel]:
    recipe = FigureRecipe(recipe)
    if recipe is FigureRecipe.MASS_SWEEP:
        fixed = {"m_g": 1.0, "E": 1.0, "c": 1.0, "lam": 1.0, "L_times_E": 1.0}
        grid = Grid(*MASS_RANGE, points, Spacing.LOG)
        out = []
        for tag, nonrel in (("Mg", MassConvention.NONREL_MG), ("Me", MassConvention.NONREL_ME)):
            spec = SweepSpec(
                Axis.MASS, grid, Process.EMISSION,
                (MassConvention.CLASSICAL, MassConvention.SEMIREL, nonrel),
                scaling=Scaling.CLASSICAL_UNIT, fixed=fixed,
            )
            out.append(Panel(f"mass_{tag}", spec, {}))
        return out

    process = Process.EMISSION if recipe is FigureRecipe.EMISSION_GRID else Process.ABSORPTION
    e_range = EMISSION_E_RANGE if process is Process.EMISSION else ABSORPTION_E_RANGE
    m_g, c = 1.0, 1.0
    out = []
    for tag, nonrel in (("Mg", MassConvention.NONREL_MG), ("Me", MassConvention.NONREL_ME)):
        conventions = (MassConvention.SEMIREL, nonrel)
        lp_spec = SweepSpec(
            Axis.MOMENTUM_SPREAD, Grid(*LP_RANGE, points), process, conventions,
            scaling=Scaling.COMPTON_UNIT, fixed={"m_g": m_g, "E": FIXED_E, "c": c, "lam": 1.0, "L": 1.0},
        )
        e_spec = SweepSpec(
            Axis.ENERGY_GAP, Grid(*e_range, points), process, conventions,
            scaling=Scaling.COMPTON_UNIT, fixed={"m_g": m_g, "E": FIXED_E, "c": c, "lam": 1.0, "L": 1.0 / FIXED_LP},
        )
        lp_markers = {"marker_lp_compton": m_g * c}
        e_markers: Dict[str, float] = {}
        if process is Process.ABSORPTION:
            # 2E = m_e c^2 with m_e = m_g + E/c^2 gives E = m_g c^2
            e_markers["marker_asymptote_semirel"] = m_g * c * c
            # nonrel M = m_g: E = m_g c^2 / 2; M = m_e: same pole as semirel
            e_markers["marker_asymptote_nonrel"] = (
                0.5 * m_g * c * c if nonrel is MassConvention.NONREL_MG else m_g * c * c
            )
        out.append(Panel(f"{process.value}_lp_{tag}", lp_spec, lp_markers))
        out.append(Panel(f"{process.value}_E_{tag}", e_spec, e_markers))
    return out


def figure_recipe(recipe: FigureRecipe, points: int = GRID_POINTS) -> List[Panel]:
    return _panels(recipe, points)


def _manifest(recipe: FigureRecipe, panels: Sequence[Panel]) -> str:
    lines = [
        f"# figure recipe: {FigureRecipe(recipe).value}",
        "# all fixed values below are repository defaults, not values read from figure captions",
    ]
    for panel in panels:
        s = panel.spec
        fixed = ";".join(f"{k}={format_float(v)}" for k, v in s.fixed.items())
        lines.append(
            f"{panel.name}.csv,axis={s.column},range=[{format_float(s.grid.lo)};{format_float(s.grid.hi)}],"
            f"points={s.grid.count},spacing={s.grid.spacing.value},scaling={s.scaling.value},{fixed}"
        )
    return "\n".join(lines) + "\n"


def write_figure(recipe: FigureRecipe, outdir, points: int = GRID_POINTS,
                 threads: Optional[int] = None) -> List[Path]:
    """Write one CSV per panel plus ``manifest.txt``; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    panels = figure_recipe(recipe, points)
    paths = []
    for panel in panels:
        rows = run_sweep(panel.spec, threads)
        path = outdir / f"{panel.name}.csv"
        path.write_text(format_rows(panel.spec, rows, panel.markers), encoding="utf-8")
        paths.append(path)
    manifest = outdir / "manifest.txt"
    manifest.write_text(_manifest(recipe, panels), encoding="utf-8")
    paths.append(manifest)
    return paths
