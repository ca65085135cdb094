"""Command-line interface: ``discrimkit <command> [source] [options]``.

Angles are given in degrees and converted to radians internally. Exit codes:
0 success, 2 invalid input (bad flags, malformed ensemble JSON, failed
validation), 3 an optimizer did not converge (output is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DiscriminationError, StateEnsemble, Tolerances
from .ensembles import builtin, load_ensemble
from .maxconf import ZeroProbabilityOutcome, confidence, max_confidence_pom
from .minerror import (
    IncompleteMeasurementWarning,
    OptimizerConfig,
    helstrom_error,
    helstrom_two_pure,
    optimize_min_error,
    square_root_measurement,
    two_mixed_optimal,
)
from .mutualinfo import (
    UnsupportedEnsembleError,
    accessible_info_search,
    best_projective_qubit,
    elimination_measurement,
    mutual_information,
)
from .simulator import empirical_figures, sample_outcomes
from .unambiguous import (
    coherent_overlap_demo,
    indistinguishable_result,
    max_equal_success,
    mixed_unamb_feasibility,
    unamb_two_pure,
    unamb_two_pure_states,
)
from .verify import verify_suite

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 2, 3

# parameter -> (lower, upper) in CLI units
SWEEP_DOMAINS = {
    "theta": (0.0, 90.0),
    "latitude": (0.0, 90.0),
    "p0": (0.0, 1.0),
    "alpha": (0.0, 10.0),
}


class UsageError(Exception):
    """Invalid command-line input; reported with exit code 2."""


def fmt(value):
    """Round to 12 significant digits so CSV and JSON carry the same numbers."""
    if value is None:
        return None
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return x if not np.isfinite(x) else float(f"{x:.12g}")
    return value


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render(rows: list[dict], fmt_name: str, command: str, meta: dict | None = None) -> str:
    rows = [{k: fmt(v) for k, v in row.items()} for row in rows]
    if fmt_name == "json":
        return json.dumps({"command": command, **(meta or {}), "rows": rows}, indent=2) + "\n"
    out = io.StringIO()
    for key, value in (meta or {}).items():
        out.write(f"# {key}={value}\n")
    columns = list(dict.fromkeys(k for row in rows for k in row))
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return out.getvalue()


def emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


@dataclass(frozen=True)
class Point:
    """One scenario point: the ensemble plus the parameters that produced it (CLI units)."""

    ensemble: StateEnsemble
    source: str
    params: dict


def parse_sweep(text: str) -> tuple[str, np.ndarray]:
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--sweep expects PARAM:START:STOP:STEPS, got {text!r}")
    name, start, stop, steps = parts
    if name not in SWEEP_DOMAINS:
        raise UsageError(f"cannot sweep {name!r}; choose from {', '.join(SWEEP_DOMAINS)}")
    try:
        start_f, stop_f, n = float(start), float(stop), int(steps)
    except ValueError:
        raise UsageError(f"--sweep bounds must be numbers and STEPS an integer, got {text!r}") from None
    if n < 1:
        raise UsageError("--sweep STEPS must be at least 1")
    lo, hi = SWEEP_DOMAINS[name]
    if not (lo <= min(start_f, stop_f) and max(start_f, stop_f) <= hi):
        raise UsageError(f"--sweep {name} range [{start_f}, {stop_f}] leaves its domain [{lo}, {hi}]")
    return name, np.linspace(start_f, stop_f, n)


def _source(args) -> str:
    for name in ("two_pure", "trine", "tetrad", "coherent"):
        if getattr(args, name, False):
            return name.replace("_", "-")
    if args.ensemble:
        return "file"
    raise UsageError("choose an ensemble: --ensemble PATH, --two-pure, --trine, --tetrad or --coherent")


def build_points(args) -> list[Point]:
    source = _source(args)
    sweep = args.sweep
    if args.theta_sweep:
        if sweep:
            raise UsageError("use either --sweep or --theta-sweep")
        sweep = "theta:" + args.theta_sweep
    base = {"theta": args.theta, "latitude": args.latitude, "p0": args.p0, "alpha": args.alpha}
    if source == "trine" and base["latitude"] is None:
        base["latitude"] = base["theta"]
    values = [None]
    name = None
    if sweep:
        name, values = parse_sweep(sweep)
        if source == "trine" and name == "theta":
            name = "latitude"
    if not 0.0 <= base["p0"] <= 1.0:
        raise UsageError(f"--p0 must lie in [0, 1], got {base['p0']}")
    if source == "file":
        if name is not None:
            raise UsageError("sweeps need a built-in ensemble")
        return [Point(load_ensemble(args.ensemble), "file", {})]
    points = []
    for v in values:
        params = dict(base)
        if name is not None:
            params[name] = float(v)
        if source == "two-pure":
            theta = 15.0 if params["theta"] is None else params["theta"]
            ens = builtin("two-pure", np.radians(theta), params["p0"])
            shown = {"theta": theta, "p0": params["p0"]}
        elif source == "trine":
            lat = params["latitude"]
            ens = builtin("trine", None if lat is None else np.radians(lat))
            shown = {"theta": lat}
        elif source == "tetrad":
            ens = builtin("tetrad")
            shown = {}
        else:
            ens = builtin("coherent", p0=params["p0"], alpha=params["alpha"])
            shown = {"alpha": params["alpha"], "p0": params["p0"]}
        points.append(Point(ens, source, shown))
    return points


def cmd_minerr(args, tol: Tolerances) -> int:
    rows, code = [], EXIT_OK
    for point in build_points(args):
        e = point.ensemble
        res = _min_error_pom(e, args.seed, tol)
        converged = res.converged
        row = dict(point.params)
        reference = None
        if e.is_pure and len(e) == 2:
            reference = helstrom_error(abs(np.vdot(e.kets[0], e.kets[1])), float(e.priors[0]))
        row.update(
            p_error=res.p_error,
            p_correct=res.p_correct,
            helstrom_reference=reference,
            residual_hel1=res.residual_hel1,
            residual_hel2=res.residual_hel2,
            converged=converged,
        )
        rows.append(row)
        if not converged:
            code = EXIT_NOT_CONVERGED
    emit(render(rows, args.format, "minerr"), args.out)
    return code


def _unamb_row(point: Point, tol: Tolerances) -> dict:
    e = point.ensemble
    row = dict(point.params)
    if point.source == "two-pure":
        res = unamb_two_pure(np.radians(point.params["theta"]), point.params["p0"], tol)
    elif point.source == "coherent" and point.params["alpha"] == 0:
        # |α| = 0 is a degenerate return, not an error: both states are the vacuum
        res = indistinguishable_result(2, e.dim)
    elif e.is_pure and len(e) == 2:
        res = unamb_two_pure_states(e.kets[0], e.kets[1], float(e.priors[0]), tol)
    elif e.is_pure:
        res = max_equal_success(e.kets, e.priors, tol)
    elif len(e) == 2:
        feas = mixed_unamb_feasibility(e.states[0], e.states[1], tol)
        row.update(identifiable=str(list(feas.identifiable)))
        return row
    else:
        raise UsageError("unambiguous discrimination of more than two mixed states is not supported")
    row.update(
        regime=res.regime.value if res.regime is not None else None,
        p_inconclusive=res.p_inconclusive,
    )
    for i, p in enumerate(res.per_state_success):
        row[f"p_success_{i}"] = p
    row["residual_zero_error"] = res.residual_zero_error
    if point.source == "coherent":
        row["beam_splitter_p_inconclusive"] = coherent_overlap_demo(point.params["alpha"])
    return row


def cmd_unamb(args, tol: Tolerances) -> int:
    rows = [_unamb_row(p, tol) for p in build_points(args)]
    emit(render(rows, args.format, "unamb"), args.out)
    return EXIT_OK


def _min_error_pom(e: StateEnsemble, seed, tol: Tolerances):
    if len(e) == 2:
        p0 = float(e.priors[0])
        if e.is_pure:
            return helstrom_two_pure(e.kets[0], e.kets[1], p0, tol)
        return two_mixed_optimal(e.states[0], e.states[1], p0, tol)
    return optimize_min_error(e, OptimizerConfig(seed=seed), tol)


def cmd_maxconf(args, tol: Tolerances) -> int:
    rows, code = [], EXIT_OK
    for point in build_points(args):
        e = point.ensemble
        res = max_confidence_pom(e, tol)
        me = None
        if args.compare_minerr:
            me = _min_error_pom(e, args.seed, tol)
            if not me.converged:
                code = EXIT_NOT_CONVERGED
        for i in range(len(e)):
            row = dict(point.params)
            row.update(outcome=i, confidence_mc=res.per_outcome_confidence[i], max_confidence=res.max_confidence[i])
            if me is not None:
                try:
                    row["confidence_me"] = confidence(e, me.pom, i)
                except ZeroProbabilityOutcome:
                    row["confidence_me"] = None
            row["p_inconclusive"] = res.p_inconclusive
            rows.append(row)
    emit(render(rows, args.format, "maxconf"), args.out)
    return code


# (ensemble, strategy, theoretical reference, experimental value shown for context)
MI_TABLE = (
    ("trine", "elimination", 0.585, 0.491),
    ("trine", "best-projective", 0.459, None),
    ("tetrad", "elimination", 0.415, 0.363),
    ("tetrad", "best-projective", 0.311, None),
    ("two-pure(15deg)", "helstrom", 0.189, 0.196),
)


def mi_table_rows() -> list[dict]:
    ensembles = {
        "trine": builtin("trine"),
        "tetrad": builtin("tetrad"),
        "two-pure(15deg)": builtin("two-pure", np.radians(15)),
    }
    rows = []
    for name, strategy, reference, experimental in MI_TABLE:
        e = ensembles[name]
        if strategy == "elimination":
            bits = mutual_information(e, elimination_measurement(e))
        elif strategy == "best-projective":
            bits = best_projective_qubit(e)[1]
        else:
            bits = mutual_information(e, helstrom_two_pure(e.kets[0], e.kets[1], 0.5).pom)
        rows.append(
            {
                "ensemble": name,
                "strategy": strategy,
                "mi_bits": bits,
                "reference": reference,
                "deviation": abs(bits - reference),
                "experimental": experimental,
            }
        )
    return rows


def cmd_mutinfo(args, tol: Tolerances) -> int:
    if args.table:
        emit(render(mi_table_rows(), args.format, "mutinfo"), args.out)
        return EXIT_OK
    rows, code = [], EXIT_OK
    for point in build_points(args):
        e = point.ensemble
        results = []
        me = _min_error_pom(e, args.seed, tol)
        results.append(("min-error", mutual_information(e, me.pom, tol)))
        try:
            results.append(("elimination", mutual_information(e, elimination_measurement(e, tol), tol)))
        except UnsupportedEnsembleError:
            pass
        if e.dim == 2:
            results.append(("best-projective", best_projective_qubit(e)[1]))
        if args.search_outcomes:
            found = accessible_info_search(e, args.search_outcomes, restarts=args.restarts, seed=args.seed)
            results.append(("search", found.bits))
            if not found.converged:
                code = EXIT_NOT_CONVERGED
        for strategy, bits in results:
            row = dict(point.params)
            row.update(strategy=strategy, mi_bits=bits)
            rows.append(row)
    emit(render(rows, args.format, "mutinfo"), args.out)
    return code


def _strategy_pom(strategy: str, point: Point, seed, tol: Tolerances):
    e = point.ensemble
    if strategy == "min-error":
        return _min_error_pom(e, seed, tol).pom
    if strategy == "max-confidence":
        return max_confidence_pom(e, tol).pom
    if strategy == "srm":
        return square_root_measurement(e, tol)
    if point.source == "two-pure":
        return unamb_two_pure(np.radians(point.params["theta"]), point.params["p0"], tol).pom
    if e.is_pure and len(e) == 2:
        return unamb_two_pure_states(e.kets[0], e.kets[1], float(e.priors[0]), tol).pom
    if e.is_pure:
        return max_equal_success(e.kets, e.priors, tol).pom
    raise UsageError("unambiguous simulation needs a pure-state ensemble")


def cmd_simulate(args, tol: Tolerances) -> int:
    if args.sweep or args.theta_sweep:
        raise UsageError("simulate runs a single scenario; drop --sweep")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    (point,) = build_points(args)
    seed = 0 if args.seed is None else args.seed
    pom = _strategy_pom(args.strategy, point, seed, tol)
    counts = sample_outcomes(point.ensemble, pom, args.trials, seed=seed, workers=args.workers, tol=tol)
    figures = empirical_figures(counts, point.ensemble)
    if args.format == "json":
        payload = {
            "command": "simulate",
            "strategy": args.strategy,
            **counts.to_dict(),
            "figures": {k: fmt(v) if not isinstance(v, dict) else {kk: fmt(vv) for kk, vv in v.items()}
                        for k, v in figures.to_dict().items()},
        }
        emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        emit(counts.to_csv(), args.out)
    return EXIT_OK


def cmd_verify(args, tol: Tolerances) -> int:
    checks = verify_suite(tol)
    if args.json:
        payload = {"passed": all(c.passed for c in checks), "checks": [
            {k: fmt(v) for k, v in c.to_dict().items()} for c in checks
        ]}
        emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = []
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"{status}  {c.name}: value={c.value:.12g} reference={c.reference:.12g} "
                f"deviation={c.deviation:.3g} tolerance={c.tolerance:.3g}"
            )
        passed = sum(c.passed for c in checks)
        lines.append(f"{passed}/{len(checks)} checks passed")
        emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(c.passed for c in checks) else 1


def _add_source_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--ensemble", metavar="PATH", help="JSON ensemble file")
    src.add_argument("--two-pure", action="store_true", help="cosθ|0> ± sinθ|1>")
    src.add_argument("--trine", action="store_true", help="equiprobable trine (--theta/--latitude for the latitude family)")
    src.add_argument("--tetrad", action="store_true", help="equiprobable tetrad")
    src.add_argument("--coherent", action="store_true", help="coherent states |α>, |-α>")
    p.add_argument("--theta", type=float, default=None, metavar="DEG", help="angle θ in degrees")
    p.add_argument("--latitude", type=float, default=None, metavar="DEG", help="trine latitude θ in degrees")
    p.add_argument("--p0", type=float, default=0.5, help="prior of state 0 (two-state ensembles)")
    p.add_argument("--alpha", type=float, default=1.0, help="coherent amplitude")
    p.add_argument("--sweep", metavar="PARAM:START:STOP:STEPS", help="inclusive linear sweep")
    p.add_argument("--theta-sweep", metavar="START:STOP:STEPS", help="shorthand for --sweep theta:...")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrimkit", description="Quantum state discrimination toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minerr", help="minimum-error discrimination")
    _add_source_options(p)
    p.set_defaults(func=cmd_minerr)

    p = sub.add_parser("unamb", help="unambiguous discrimination")
    _add_source_options(p)
    p.set_defaults(func=cmd_unamb)

    p = sub.add_parser("maxconf", help="maximum-confidence discrimination")
    _add_source_options(p)
    p.add_argument(
        "--compare-minerr",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="add the minimum-error confidence per outcome (default on)",
    )
    p.set_defaults(func=cmd_maxconf)

    p = sub.add_parser("mutinfo", help="mutual information")
    _add_source_options(p)
    p.add_argument("--table", action="store_true", help="reference table for trine, tetrad and two states")
    p.add_argument("--search-outcomes", type=int, default=0, metavar="K", help="also run a K-outcome search")
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=cmd_mutinfo)

    p = sub.add_parser("simulate", help="Monte Carlo outcome counts")
    _add_source_options(p)
    p.add_argument(
        "--strategy", choices=("min-error", "unambiguous", "max-confidence", "srm"), default="min-error"
    )
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the reference-value checks")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerances.from_env()
    except ValueError as exc:
        print(f"error: DISCRIMKIT_TOL: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IncompleteMeasurementWarning)
            return args.func(args, tol)
    except json.JSONDecodeError as exc:
        print(f"error: {getattr(args, 'ensemble', '')}: line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
    except (UsageError, DiscriminationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
