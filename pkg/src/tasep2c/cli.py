"""Command line front end: exact formulas, Monte Carlo, identity suites.

Every command prints a machine-readable JSON record on stdout (sweeps print
CSV with the fixed column schema ``x,value,method,t,n``).  Records carry the
command, all effective parameters, the method, values, an error estimate
and the library version; elapsed wall time is included only under
``--timing`` so that default outputs are byte-identical across runs with
the same seed and parameters.

Monte Carlo runs fan out over a process pool when the TASEP2C_WORKERS
environment variable is above 1; estimates are bit-identical for any
worker count because every run owns its own seeded substream.

Exit codes: 0 success, 1 usage error, 2 accuracy/agreement failure,
3 identity verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from . import __version__, formulas, identities, simulate
from .contour import QuadratureSpec
from .errors import AccuracyError
from .formulas import Configuration, head_word, step_configuration

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ACCURACY = 2
EXIT_VERIFY = 3

CSV_HEADER = "x,value,method,t,n"
_HELP_FMT = argparse.ArgumentDefaultsHelpFormatter


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _dump(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


def _workers() -> int:
    raw = os.environ.get("TASEP2C_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise _UsageError(f"TASEP2C_WORKERS must be an integer, got {raw!r}") from None


def _parse_positions(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise _UsageError(f"bad position list {text!r}: {exc}") from None


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise _UsageError(f"bad range {text!r}, expected like 2..5") from None
    if hi < lo:
        raise _UsageError(f"empty range {text!r}")
    return lo, hi


def _quad_spec(args) -> QuadratureSpec:
    try:
        return QuadratureSpec(radius=args.radius, points=args.quad_points, tolerance=args.tol)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _initial_configuration(args) -> tuple[Configuration, int | None]:
    """Initial state from --initial or --step-l; returns (config, shift or None)."""
    if args.initial is not None and args.step_l is not None:
        raise _UsageError("give either --initial or --step-l, not both")
    if args.initial is not None:
        positions = _parse_positions(args.initial)
        if len(positions) != args.n:
            raise _UsageError(f"--initial lists {len(positions)} positions but --n is {args.n}")
        try:
            return Configuration(positions, head_word(args.n)), None
        except ValueError as exc:
            raise _UsageError(str(exc)) from None
    shift = args.step_l if args.step_l is not None else 0
    if shift < 0:
        raise _UsageError("--step-l must be nonnegative")
    return step_configuration(args.n, shift), shift


def _leftmost_value(args, x: int) -> float:
    initial, shift = _initial_configuration(args)
    quad = _quad_spec(args)
    if args.method == "determinant":
        if shift is None and initial.positions != tuple(range(1, args.n + 1)):
            raise _UsageError("the determinant evaluator needs the step initial condition")
        if shift not in (None, 0):
            raise _UsageError("the determinant evaluator needs --step-l 0")
        return formulas.leftmost_probability_step_det(args.n, x, args.time)
    if shift is not None and shift > 0:
        return formulas.leftmost_probability_shifted_step(
            shift, args.n, x, args.time, method=args.method, quad=quad
        )
    return formulas.leftmost_probability(initial, x, args.time, method=args.method, quad=quad)


def _record(command: str, args, extra: dict, stochastic_seed: int | None = None) -> dict:
    parameters = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command", "subcommand") and value is not None
    }
    record = {
        "command": command,
        "parameters": parameters,
        "version": __version__,
    }
    if stochastic_seed is not None:
        record["seed"] = stochastic_seed
    record.update(extra)
    return record


def _cmd_exact_leftmost(args) -> int:
    if (args.position is None) == (args.sweep is None):
        raise _UsageError("give exactly one of --position or --sweep")
    started = time.perf_counter()
    err = None if args.method in ("residue", "determinant") else args.tol
    if args.sweep is not None:
        lo, hi = _parse_range(args.sweep)
        rows = [(x, _leftmost_value(args, x)) for x in range(lo, hi + 1)]
        lines = [CSV_HEADER] + [
            f"{x},{value!r},{args.method},{args.time!r},{args.n}" for x, value in rows
        ]
        if args.csv:
            with open(args.csv, "w") as handle:
                handle.write("\n".join(lines) + "\n")
            extra = {
                "method": args.method,
                "csv": args.csv,
                "rows": len(rows),
                "error_estimate": err,
            }
            if args.timing:
                extra["runtime"] = time.perf_counter() - started
            _dump(_record("exact leftmost", args, extra))
        else:
            print("\n".join(lines))
        return EXIT_OK
    value = _leftmost_value(args, args.position)
    extra = {"method": args.method, "value": value, "error_estimate": err}
    if args.timing:
        extra["runtime"] = time.perf_counter() - started
    _dump(_record("exact leftmost", args, extra))
    return EXIT_OK


def _final_configuration(args) -> Configuration:
    positions = _parse_positions(args.final)
    species = args.final_species or args.species or head_word(args.n)
    try:
        return Configuration(positions, species)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _transition_pair(args) -> tuple[Configuration, Configuration]:
    base, _ = _initial_configuration(args)
    species = args.species or head_word(args.n)
    try:
        initial = Configuration(base.positions, species)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    return initial, _final_configuration(args)


def _cmd_exact_transition(args) -> int:
    started = time.perf_counter()
    initial, final = _transition_pair(args)
    try:
        value = formulas.transition_probability(
            initial, final, args.time, method=args.method, quad=_quad_spec(args)
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    err = None if args.method == "residue" else args.tol
    extra = {"method": args.method, "value": value, "error_estimate": err}
    if args.timing:
        extra["runtime"] = time.perf_counter() - started
    _dump(_record("exact transition", args, extra))
    return EXIT_OK


def _sim_initial(args) -> Configuration:
    """Initial state for simulation, honoring --species when given."""
    base, _ = _initial_configuration(args)
    species = getattr(args, "species", None) or head_word(args.n)
    try:
        return Configuration(base.positions, species)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _check_leftmost_species(args) -> None:
    if getattr(args, "species", None) not in (None, head_word(args.n)):
        raise _UsageError("the leftmost event requires the species word 21...1")


def _event_probe(args):
    """(exact value, predicate) for the selected event."""
    if args.event == "leftmost":
        if args.position is None:
            raise _UsageError("leftmost event needs --position")
        _check_leftmost_species(args)
        exact = _leftmost_value(args, args.position)
        return exact, simulate.leftmost_event(args.position)
    if args.final is None:
        raise _UsageError("transition event needs --final")
    initial, final = _transition_pair(args)
    try:
        exact = formulas.transition_probability(initial, final, args.time)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    return exact, simulate.transition_event(final)


def _cmd_simulate(args) -> int:
    if args.runs < 1:
        raise _UsageError("--runs must be at least 1")
    initial = _sim_initial(args)
    if args.event == "leftmost":
        if args.position is None:
            raise _UsageError("leftmost event needs --position")
        _check_leftmost_species(args)
        predicate = simulate.leftmost_event(args.position)
    else:
        if args.final is None:
            raise _UsageError("transition event needs --final")
        predicate = simulate.transition_event(_final_configuration(args))
    estimate = simulate.estimate_event(
        initial, predicate, args.time, args.runs, args.seed, processes=_workers()
    )
    extra = {
        "method": "monte-carlo",
        "value": estimate.estimate,
        "error_estimate": estimate.std_error,
        "runs": estimate.runs,
    }
    if args.timing:
        extra["runtime"] = estimate.elapsed
    _dump(_record("simulate", args, extra, stochastic_seed=args.seed))
    return EXIT_OK


def _cmd_compare(args) -> int:
    if args.runs < 1:
        raise _UsageError("--runs must be at least 1")
    started = time.perf_counter()
    exact, predicate = _event_probe(args)
    initial = _sim_initial(args)
    estimate = simulate.estimate_event(
        initial, predicate, args.time, args.runs, args.seed, processes=_workers()
    )
    # null-model standard error from the exact probability; exact indicator
    # events (t = 0 or impossible transitions) compare for strict equality
    se = math.sqrt(exact * (1.0 - exact) / args.runs)
    if se > 0:
        z = (estimate.estimate - exact) / se
    else:
        z = 0.0 if estimate.estimate == exact else math.inf
    agree = abs(z) <= args.sigma
    extra = {
        "method": args.method,
        "exact": exact,
        "estimate": estimate.estimate,
        "std_error": se,
        "z": z,
        "sigma": args.sigma,
        "agree": agree,
        "runs": args.runs,
    }
    if args.timing:
        extra["runtime"] = time.perf_counter() - started
    _dump(_record("compare", args, extra, stochastic_seed=args.seed))
    return EXIT_OK if agree else EXIT_ACCURACY


_VERIFY_BUCKETS = {
    "main": ("main",),
    "equivA": ("equiv_a",),
    "equivB": ("equiv_b", "substitution"),
    "tasep": ("tasep_a", "tasep_b"),
    "vandermonde": ("vandermonde",),
    "detcollapse": ("det_collapse",),
    "amplitude": ("closed_form",),
    "braid": ("braid",),
    "all": identities.SUITE_IDENTITIES,
}


def _cmd_verify(args) -> int:
    lo, hi = _parse_range(args.n_range)
    if lo < 2:
        raise _UsageError("identities are stated for N >= 2")
    records = identities.run_identity_suite(
        n_values=range(lo, hi + 1),
        points=args.points,
        seed=args.seed,
        identities=_VERIFY_BUCKETS[args.identity],
    )
    all_passed = True
    for record in records:
        record["version"] = __version__
        all_passed = all_passed and record["passed"]
        print(json.dumps(record, sort_keys=True))
    return EXIT_OK if all_passed else EXIT_VERIFY


def _add_quadrature_flags(parser) -> None:
    parser.add_argument("--tol", type=float, default=1e-12, help="quadrature tolerance")
    parser.add_argument("--radius", type=float, default=0.5, help="contour radius in (0,1)")
    parser.add_argument(
        "--quad-points", type=int, default=16, help="starting quadrature points (power of 2)"
    )


def _add_model_flags(parser) -> None:
    parser.add_argument("--n", type=int, required=True, help="number of particles")
    parser.add_argument("--time", "-t", type=float, required=True, help="evolution time")
    parser.add_argument("--initial", help="comma-separated initial positions")
    parser.add_argument("--step-l", type=int, default=None, help="step-like initial shift l")
    parser.add_argument("--timing", action="store_true", help="include wall time in the record")


def build_parser() -> _Parser:
    parser = _Parser(prog="tasep2c", description=__doc__, formatter_class=_HELP_FMT)
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    exact = commands.add_parser("exact", help="evaluate exact formulas")
    subcommands = exact.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    leftmost = subcommands.add_parser(
        "leftmost", help="leftmost first-class-particle event", formatter_class=_HELP_FMT
    )
    _add_model_flags(leftmost)
    leftmost.add_argument("--position", type=int, help="event position x")
    leftmost.add_argument("--sweep", help="position range like 1..8 (CSV output)")
    leftmost.add_argument(
        "--method",
        choices=("residue", "quadrature", "determinant"),
        default="residue",
        help="evaluation route",
    )
    leftmost.add_argument("--csv", help="write sweep CSV to this path")
    _add_quadrature_flags(leftmost)
    leftmost.set_defaults(func=_cmd_exact_leftmost)

    transition = subcommands.add_parser(
        "transition", help="state-to-state probability", formatter_class=_HELP_FMT
    )
    _add_model_flags(transition)
    transition.add_argument("--final", required=True, help="comma-separated final positions")
    transition.add_argument("--species", help="initial species word, e.g. 21")
    transition.add_argument("--final-species", help="final species word")
    transition.add_argument(
        "--method", choices=("residue", "quadrature"), default="residue", help="evaluation route"
    )
    _add_quadrature_flags(transition)
    transition.set_defaults(func=_cmd_exact_transition)

    sim = commands.add_parser(
        "simulate", help="seeded Monte Carlo estimate", formatter_class=_HELP_FMT
    )
    _add_model_flags(sim)
    sim.add_argument("--event", choices=("leftmost", "transition"), required=True)
    sim.add_argument("--position", type=int, help="leftmost event position")
    sim.add_argument("--final", help="transition event final positions")
    sim.add_argument("--species", help="initial species word")
    sim.add_argument("--final-species", help="final species word")
    sim.add_argument("--runs", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=_cmd_simulate, method="monte-carlo")

    compare = commands.add_parser(
        "compare", help="exact value against Monte Carlo", formatter_class=_HELP_FMT
    )
    _add_model_flags(compare)
    compare.add_argument("--event", choices=("leftmost", "transition"), default="leftmost")
    compare.add_argument("--position", type=int)
    compare.add_argument("--final")
    compare.add_argument("--species")
    compare.add_argument("--final-species")
    compare.add_argument(
        "--method",
        choices=("residue", "quadrature", "determinant"),
        default="residue",
        help="exact evaluation route",
    )
    compare.add_argument("--runs", type=int, required=True)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--sigma", type=float, default=4.0, help="agreement band width")
    _add_quadrature_flags(compare)
    compare.set_defaults(func=_cmd_compare)

    verify = commands.add_parser(
        "verify", help="exact identity suites", formatter_class=_HELP_FMT
    )
    verify.add_argument(
        "--identity", choices=sorted(_VERIFY_BUCKETS), required=True, help="identity bucket"
    )
    verify.add_argument("--n-range", default="2..5", help="range of sizes, like 2..5")
    verify.add_argument("--points", type=int, default=100)
    verify.add_argument("--seed", type=int, default=2024)
    verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # library-level validation (bad times, size caps, species words)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())
