"""Command-line front end: ``rate``, ``sweep``, ``figure`` and ``verify``.

Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence

from .errors import AsymptoteError, InvalidConvention, InvalidParameters, UDWError
from .model import (
    DetectorParams,
    GaussianCoM,
    MassConvention,
    Process,
    Scaling,
    validate_process,
)
from .rates import Method, RateRequest, compute_rate
from .sweep import Axis, FigureRecipe, Grid, Spacing, SweepSpec, format_float, format_rows, run_sweep, write_figure
from .verification import SUITES, run_all, run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

# config keys per command and the type each parses to
_RATE_KEYS = {
    "process": str, "convention": str, "E": float, "mg": float, "c": float,
    "lambda": float, "L": float, "cutoff": float, "method": str, "scale": str,
}
_SWEEP_KEYS = {
    "process": str, "conventions": str, "axis": str, "min": float, "max": float,
    "count": int, "spacing": str, "E": float, "mg": float, "c": float, "lambda": float,
    "L": float, "cutoff": float, "method": str, "scale": str, "output": str,
}
_DEFAULTS = {
    "process": "emission", "convention": "semirel", "conventions": "semirel",
    "E": 0.1, "mg": 1.0, "c": 1.0, "lambda": 1.0, "L": 10.0, "cutoff": None,
    "method": "closed", "scale": "raw", "spacing": "linear", "count": 50, "output": None,
}


class UsageError(Exception):
    pass


def read_config(path, allowed: Dict[str, type]) -> Dict[str, object]:
    """Parse ``key=value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in allowed:
            raise UsageError(f"{path}:{number}: unknown key {key!r}")
        try:
            out[key] = allowed[key](value)
        except ValueError:
            raise UsageError(f"{path}:{number}: bad value for {key}: {value!r}") from None
    return out


def _resolve(args: argparse.Namespace, allowed: Dict[str, type]) -> Dict[str, object]:
    """Merge flags over config over defaults."""
    merged = {k: _DEFAULTS.get(k) for k in allowed}
    if args.config:
        merged.update(read_config(args.config, allowed))
    for key in allowed:
        value = getattr(args, _dest(key), None)
        if value is not None:
            merged[key] = value
    return merged


def _dest(key: str) -> str:
    return {"lambda": "lam", "min": "lo", "max": "hi"}.get(key, key)


def _add_physics_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--process", choices=[x.value for x in Process])
    p.add_argument("--E", type=float, help="energy gap")
    p.add_argument("--mg", type=float, help="ground-state mass")
    p.add_argument("--c", type=float, help="speed of light")
    p.add_argument("--lambda", dest="lam", type=float, help="coupling")
    p.add_argument("--L", type=float, help="packet width")
    p.add_argument("--cutoff", type=float, help="momentum cutoff K (quadrature)")
    p.add_argument("--method", choices=[x.value for x in Method])
    p.add_argument("--scale", choices=[x.value for x in Scaling])
    p.add_argument("--config", help="key=value file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udw-rates", description="Detector transition rates with quantised mass-energy.")
    sub = parser.add_subparsers(dest="command", required=True)

    rate = sub.add_parser("rate", help="single rate as CSV")
    _add_physics_flags(rate)
    rate.add_argument("--convention", choices=[x.value for x in MassConvention])
    rate.add_argument("--force", action="store_true", help="compute despite validity violations")

    sweep = sub.add_parser("sweep", help="one-axis parameter sweep as CSV")
    _add_physics_flags(sweep)
    sweep.add_argument("--axis", choices=[x.value for x in Axis])
    sweep.add_argument("--conventions", help="comma-separated list")
    sweep.add_argument("--min", dest="lo", type=float)
    sweep.add_argument("--max", dest="hi", type=float)
    sweep.add_argument("--count", type=int)
    sweep.add_argument("--spacing", choices=[x.value for x in Spacing])
    sweep.add_argument("--output", help="CSV path (default stdout)")

    fig = sub.add_parser("figure", help="figure data files")
    fig.add_argument("recipe", choices=[x.value for x in FigureRecipe])
    fig.add_argument("--outdir", default=".")
    fig.add_argument("--points", type=int, default=200)

    ver = sub.add_parser("verify", help="run self-check suites")
    ver.add_argument("--suite", default="all", choices=["all", *SUITES])
    return parser


def _params(cfg) -> DetectorParams:
    return DetectorParams(cfg["mg"], cfg["E"], cfg["c"], cfg["lambda"])


def cmd_rate(args, out) -> int:
    cfg = _resolve(args, _RATE_KEYS)
    params = _params(cfg)
    process = Process(cfg["process"])
    convention = MassConvention(cfg["convention"])
    if process is Process.ABSORPTION and convention is MassConvention.CLASSICAL:
        raise AsymptoteError("classical absorption rate undefined")
    dist = GaussianCoM(cfg["L"])
    report = validate_process(params, process, dist, convention=convention, cutoff=cfg["cutoff"])
    if not report.ok and not args.force:
        names = ";".join(sorted(f.value for f in report.violations))
        raise InvalidParameters(f"validity check failed: {names} (use --force to compute anyway)")
    request = RateRequest(params, convention, process, dist, Method(cfg["method"]),
                          cfg["cutoff"], scaling=Scaling(cfg["scale"]))
    result = compute_rate(request)
    header = "process,convention,method,m_g,E,c,lambda,L,cutoff,scale,rate,error,flags"
    record = [
        process.value, convention.value, request.method.value,
        format_float(params.m_g), format_float(params.E), format_float(params.c),
        format_float(params.lam), format_float(dist.L), format_float(cfg["cutoff"]),
        request.scaling.value, format_float(result.value), format_float(result.abs_error_estimate),
        result.flag_string,
    ]
    out.write(header + "\n" + ",".join(record) + "\n")
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    cfg = _resolve(args, _SWEEP_KEYS)
    for key in ("axis", "min", "max"):
        if cfg.get(key) is None:
            raise UsageError(f"sweep needs --{key}")
    conventions = tuple(MassConvention(s.strip()) for s in str(cfg["conventions"]).split(",") if s.strip())
    spec = SweepSpec(
        Axis(cfg["axis"]),
        Grid(cfg["min"], cfg["max"], cfg["count"], Spacing(cfg["spacing"])),
        Process(cfg["process"]),
        conventions,
        Method(cfg["method"]),
        Scaling(cfg["scale"]),
        fixed={"m_g": cfg["mg"], "E": cfg["E"], "c": cfg["c"], "lam": cfg["lambda"], "L": cfg["L"]},
        cutoff=cfg["cutoff"],
    )
    text = format_rows(spec, run_sweep(spec))
    if cfg["output"]:
        Path(cfg["output"]).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_figure(args, out) -> int:
    for path in write_figure(FigureRecipe(args.recipe), args.outdir, args.points):
        out.write(f"{path}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    results = run_all() if args.suite == "all" else [run_suite(args.suite)]
    for r in results:
        out.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


_COMMANDS = {"rate": cmd_rate, "sweep": cmd_sweep, "figure": cmd_figure, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args, out)
    except (UsageError, InvalidParameters, InvalidConvention, AsymptoteError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    except (UDWError, ArithmeticError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
