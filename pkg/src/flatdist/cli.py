"""Command-line front end: one JSON document per run on standard output."""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from .closed_form import fm_dirac_vs_probability, fm_weighted_dirac_vs_positive
from .convex_engine import fm_distance_molecular_to_density, fm_distance_molecular_to_molecular
from .envelope import in_ball
from .errors import FlatDistError, MetricError, NumericalError
from .lp import bl_norm_molecular, fm_norm_molecular, fm_norm_molecular_reduced
from .measures import (
    DensityMeasure1D,
    MolecularMeasure,
    density_from_json,
    molecular_from_json,
    total_variation,
)
from .metric import FiniteMetricSpace, validate_metric
from .oracle import grid_norm
from .polytope import MEMBERSHIP_TOL

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64
SIGNIFICANT_DIGITS = 10

COMMANDS = ("fm-norm", "bl-norm", "distance", "closed-form", "validate-metric", "oracle")


class InputError(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def format_number(x: float):
    """Round to 10 significant digits; integral values become ints, non-finite ones strings."""
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    r = float(f"{x:.{SIGNIFICANT_DIGITS}g}")
    if r == int(r) and abs(r) < 1e15:
        return int(r)
    return r


def _plain(obj: Any):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return format_number(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_plain(doc), separators=(",", ":"), ensure_ascii=False)


def _load(path: str) -> Any:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _space(path: str | None) -> FiniteMetricSpace | None:
    if path is None:
        return None
    obj = _load(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a metric-space object")
    return FiniteMetricSpace.from_json(obj)


def _measure(path: str, space: FiniteMetricSpace | None):
    obj = _load(path)
    if isinstance(obj, dict) and "family" in obj:
        return density_from_json(obj)
    return molecular_from_json(obj, space)


def _molecular(path: str, space) -> MolecularMeasure:
    m = _measure(path, space)
    if not isinstance(m, MolecularMeasure):
        raise InputError(f"{path}: expected a molecular measure")
    return m


def _check_maximizer(tau: MolecularMeasure, f: np.ndarray, value: float, kind: str) -> dict:
    feasible = in_ball(f, tau.space, tau.indices, kind)
    objective = math.fsum(tau.weights * f)
    ok = feasible and abs(objective - value) <= 1e-9 * max(1.0, abs(value))
    if not ok:
        raise CheckFailed(f"maximizer check failed: feasible={feasible}, objective={objective!r}, value={value!r}")
    return {"feasible": True, "objective": objective, "tolerance": MEMBERSHIP_TOL}


def cmd_fm_norm(args) -> dict:
    tau = _molecular(args.measure, _space(args.space))
    if args.reduced:
        if tau.is_zero or np.all(tau.weights > 0) or np.all(tau.weights < 0):
            sign = 1.0 if tau.is_zero or tau.weights[0] > 0 else -1.0
            res_value, f, method, iters = total_variation(tau), np.full(len(tau), sign), "total_variation", 0
        else:
            res = fm_norm_molecular_reduced(tau)
            res_value, f, method, iters = res.value, res.maximizer, res.method, res.iterations
    else:
        res = fm_norm_molecular(tau)
        res_value, f, method, iters = res.value, res.maximizer, res.method, res.iterations
    out = {"value": res_value, "maximizer": f, "method": method, "iterations": iters}
    if args.check:
        out["check"] = _check_maximizer(tau, f, res_value, "FM")
    return out


def cmd_bl_norm(args) -> dict:
    tau = _molecular(args.measure, _space(args.space))
    res = bl_norm_molecular(tau)
    out = {"value": res.value, "maximizer": res.maximizer, "method": res.method, "iterations": res.iterations}
    if args.check and not tau.is_zero:
        out["check"] = _check_maximizer(tau, res.maximizer, res.value, "BL")
    return out


def cmd_distance(args) -> dict:
    space = _space(args.space)
    nu = _molecular(args.nu, space)
    mu = _measure(args.mu, space if space is not None else nu.space)
    if isinstance(mu, DensityMeasure1D):
        res = fm_distance_molecular_to_density(nu, mu, tol=args.tol, rule=args.rule)
        return {"value": res.value, "maximizer": res.maximizer, "method": res.method, "gap": res.gap,
                "theta": res.theta, "refinements": res.refinements}
    res = fm_distance_molecular_to_molecular(nu, mu)
    theta = res.theta if res.theta is not None else []
    return {"value": res.value, "maximizer": res.maximizer, "method": res.method, "gap": res.gap,
            "theta": theta, "refinements": 0}


def _point(raw: str):
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def cmd_closed_form(args) -> dict:
    mu = _measure(args.mu, _space(args.space))
    x = _point(args.x)
    if isinstance(mu, DensityMeasure1D):
        if not isinstance(x, (int, float)):
            raise InputError("--x must be a coordinate for a density measure")
        x = float(x)
    if args.probability:
        if args.alpha != 1.0:
            raise InputError("--probability uses a unit Dirac; drop --alpha")
        res = fm_dirac_vs_probability(x, mu)
        return {"value": res.value, "theta0": 1.0, "method": res.method}
    res = fm_weighted_dirac_vs_positive(args.alpha, x, mu)
    return {"value": res.value, "theta0": res.theta0, "method": res.method}


def cmd_validate_metric(args) -> dict:
    obj = _load(args.file)
    if isinstance(obj, dict) and "metric" in obj:
        metric = obj["metric"]
        if metric.get("type") == "euclidean":
            # a Euclidean space is a metric as soon as its points are distinct
            FiniteMetricSpace.from_json(obj)
            return {"ok": True}
        d = metric.get("d")
    elif isinstance(obj, dict):
        d = obj.get("d")
    else:
        d = obj
    if d is None:
        raise InputError("no distance matrix found (expected a matrix, {\"d\": ...} or a space JSON)")
    report = validate_metric(d)
    if not report.ok:
        raise InputError("invalid metric", report.to_dict())
    return report.to_dict()


def cmd_oracle(args) -> dict:
    space = _space(args.space)
    if args.measure is not None:
        bound = grid_norm(_molecular(args.measure, space), args.grid_step)
    else:
        if args.nu is None or args.mu is None:
            raise InputError("oracle needs --measure, or --nu together with --mu")
        nu = _molecular(args.nu, space)
        mu = _measure(args.mu, space if space is not None else nu.space)
        bound = grid_norm(nu, args.grid_step, mu=mu)
    return {"value": bound.lower, "maximizer": bound.argmax, "method": "grid", "lower": bound.lower,
            "upper": bound.upper, "grid_step": bound.step, "evaluations": bound.evaluations}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flatdist", description="Fortet-Mourier and bounded-Lipschitz distances.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fm-norm", help="FM norm of a signed molecular measure")
    p.add_argument("measure", help="molecular measure JSON")
    p.add_argument("--space", help="metric space JSON (if not embedded in the measure)")
    p.add_argument("--reduced", action="store_true", help="use the epigraph LP over the smaller Jordan part")
    p.add_argument("--check", action="store_true", help="re-verify feasibility and objective of the maximizer")
    p.set_defaults(func=cmd_fm_norm)

    p = sub.add_parser("bl-norm", help="dual bounded-Lipschitz norm of a signed molecular measure")
    p.add_argument("measure")
    p.add_argument("--space")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_bl_norm)

    p = sub.add_parser("distance", help="FM distance between a positive molecular measure and another measure")
    p.add_argument("--nu", required=True, help="positive molecular measure JSON")
    p.add_argument("--mu", required=True, help="positive molecular or density measure JSON")
    p.add_argument("--space")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--rule", choices=("midpoint", "gauss"), default="midpoint")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("closed-form", help="distance from a weighted Dirac to a positive measure")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--x", required=True, help="point index or label (molecular) or coordinate (density)")
    p.add_argument("--mu", required=True)
    p.add_argument("--space")
    p.add_argument("--probability", action="store_true", help="use the unit-Dirac probability formula")
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("validate-metric", help="check a distance matrix")
    p.add_argument("file", help="matrix JSON, {\"d\": matrix}, or a metric-space JSON")
    p.set_defaults(func=cmd_validate_metric)

    p = sub.add_parser("oracle", help="grid-search bounds for the FM norm")
    p.add_argument("measure", nargs="?")
    p.add_argument("--nu")
    p.add_argument("--mu")
    p.add_argument("--space")
    p.add_argument("--grid-step", type=float, default=1 / 128)
    p.set_defaults(func=cmd_oracle)
    return parser


def _error_doc(kind: str, message: str, report: dict | None = None) -> dict:
    err: dict = {"type": kind, "message": message}
    if report is not None:
        err["report"] = report
    return {"error": err}


def run(argv=None, stdout=None) -> int:
    """Parse ``argv``, run the subcommand and write one JSON document; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    if not argv or (argv[0] not in COMMANDS and argv[0] not in ("-h", "--help")):
        name = argv[0] if argv else ""
        stdout.write(dumps(_error_doc("usage", f"unknown subcommand {name!r}; expected one of {list(COMMANDS)}")) + "\n")
        return EXIT_USAGE
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    except InputError as exc:
        stdout.write(dumps(_error_doc("usage", str(exc))) + "\n")
        return EXIT_INPUT
    try:
        doc = args.func(args)
        code = EXIT_OK
    except InputError as exc:
        doc, code = _error_doc("input", str(exc), exc.report), EXIT_INPUT
    except MetricError as exc:
        report = exc.report.to_dict() if exc.report is not None else None
        doc, code = _error_doc("metric", str(exc), report), EXIT_INPUT
    except (NumericalError, CheckFailed, ArithmeticError) as exc:
        doc, code = _error_doc("numerical", str(exc)), EXIT_NUMERICAL
    except (FlatDistError, ValueError, TypeError, KeyError) as exc:
        doc, code = _error_doc("input", str(exc)), EXIT_INPUT
    stdout.write(dumps(doc) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
