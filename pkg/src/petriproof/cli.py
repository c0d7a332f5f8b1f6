"""
Command-line entry point.

Exit codes: 0 on success, 1 on usage errors, 2 when an analysis fails (a
golden-table mismatch, a deadlock, a verdict other than the expected one).
Results go to stdout, diagnostics to stderr.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from .catalog import COMPOSITES, MODEL_NAMES, parse_model_id
from .client import PetriProof
from .cpn.monitors import stats_to_csv
from .cpn.pnet import load_model, print_model
from .defaults import RUN_DEFAULTS
from .exceptions import PetriProofError, UnknownModelError, UnknownPropertyError, UnknownRuleError
from .models.cpn import CpnModel
from .smtgen import property_names, render_script, resolve_property
from .solver import SOLVER_ENV, verdicts_to_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _client(args: argparse.Namespace) -> PetriProof:
    return PetriProof(
        data_dir=args.data_dir,
        solver_path=getattr(args, "solver", None),
        smt_timeout=getattr(args, "smt_timeout", RUN_DEFAULTS['smt_timeout']),
        seed=args.seed,
        profile=args.profile,
    )


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_list(args: argparse.Namespace) -> int:
    for model_id in _client(args).list_models(include_composites=args.composites):
        _emit(str(model_id))
    return EXIT_OK


def cmd_show(args: argparse.Namespace) -> int:
    client = _client(args)
    model_id = parse_model_id(args.model)
    if model_id.name in COMPOSITES:
        _emit(print_model(client.load(model_id)))
    else:
        _emit(client.source(model_id))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.model)
    if path.is_file():
        model = load_model(path)
    else:
        model = _client(args).load(args.model)
    layer = "cpn" if isinstance(model, CpnModel) else "hlpn"
    _emit(f"ok {model.name} ({layer}): {len(model.places)} places, "
          f"{len(model.transitions)} transitions, {len(model.arcs)} arcs")
    return EXIT_OK


def cmd_incidence(args: argparse.Namespace) -> int:
    client = _client(args)
    matrices = client.incidence(args.model)
    _emit(matrices.to_csv() if args.format == "csv" else matrices.model_dump_json(indent=2))
    if args.check:
        mismatches = client.check_incidence(args.model)
        for mismatch in mismatches:
            print(f"mismatch: {mismatch}", file=sys.stderr)
        if mismatches:
            return EXIT_FAILURE
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    report = _client(args).simulate(
        args.model,
        firings=args.firings,
        replications=args.replications,
        alpha=args.alpha,
        source_budget=args.source_budget,
    )
    _emit(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    result = _client(args).explore(args.model, max_states=args.max_states, scenario=args.scenario)
    _emit(result.model_dump_json(indent=2))
    if result.deadlocks:
        print(f"{len(result.deadlocks)} deadlocked markings in {args.model}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_cpn_run(args: argparse.Namespace) -> int:
    result = _client(args).run_cpn(args.model, timed=args.timed, steps=args.steps, kind=args.kind)
    _emit(stats_to_csv(result.stats) if args.format == "csv" else result.model_dump_json(indent=2))
    return EXIT_OK


def _selected_properties(args: argparse.Namespace) -> List[str]:
    if args.all and args.properties:
        raise UsageError("give property names or --all, not both")
    if not args.all and not args.properties:
        raise UsageError("give at least one property name, or --all")
    return property_names() if args.all else [resolve_property(p) for p in args.properties]


def cmd_smt_emit(args: argparse.Namespace) -> int:
    client = _client(args)
    names = property_names() if args.all else args.properties
    if args.all and args.properties:
        raise UsageError("give property or rule names, or --all, not both")
    if not names:
        raise UsageError("give at least one property or rule name, or --all")
    for name in names:
        if args.out:
            _emit(str(client.write_script(name, with_bindings=not args.no_bindings, out_dir=Path(args.out))))
        else:
            _emit(render_script(client.emit(name, with_bindings=not args.no_bindings)))
    return EXIT_OK


def cmd_smt_check(args: argparse.Namespace) -> int:
    names = _selected_properties(args)
    with_bindings = not args.no_bindings
    rows = asyncio.run(_client(args).verify_all(names, with_bindings=with_bindings))
    _emit(verdicts_to_csv(rows).rstrip("\n"))
    expected = "unsat" if with_bindings else "sat"
    failed = [row.property for row in rows if row.verdict != expected]
    if failed:
        print(f"expected {expected}, not obtained for {failed}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    """Write the reproducible bundle for the requested models."""
    models = list(MODEL_NAMES) if args.all else args.models
    if not models:
        raise UsageError("give at least one model name, or --all")
    for name in models:
        if name not in MODEL_NAMES:
            raise UnknownModelError(f"Invalid report model: {name}. Must be one of {list(MODEL_NAMES)}")

    client = _client(args)
    out = Path(args.out)
    for sub in ("incidence", "simulation", "cpn", "smt"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    properties = []
    for name in models:
        (out / "incidence" / f"{name}.csv").write_text(client.incidence(name).to_csv(), encoding="utf-8")
        report = client.simulate(name, firings=args.firings, replications=args.replications, alpha=args.alpha)
        (out / "simulation" / f"{name}.json").write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        for timed in (False, True):
            result = client.run_cpn(name, timed=timed, steps=args.steps)
            timing = "timed" if timed else "untimed"
            (out / "cpn" / f"{name}-{timing}.csv").write_text(stats_to_csv(result.stats), encoding="utf-8")
        prop = resolve_property(name)
        client.write_script(prop, out_dir=out / "smt")
        properties.append(prop)

    if client.solver_path:
        rows = asyncio.run(client.verify_all(properties))
        (out / "smt" / "verdicts.csv").write_text(verdicts_to_csv(rows), encoding="utf-8")
    else:
        logger.info("No solver given; %s/smt holds scripts only", out)
    _emit(str(out))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "list": cmd_list,
    "show": cmd_show,
    "validate": cmd_validate,
    "incidence": cmd_incidence,
    "simulate": cmd_simulate,
    "explore": cmd_explore,
    "cpn-run": cmd_cpn_run,
    "smt-emit": cmd_smt_emit,
    "smt-check": cmd_smt_check,
    "report": cmd_report,
}


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--firings", type=int, default=RUN_DEFAULTS['firings'], help="firings per trace")
    parser.add_argument("--replications", type=int, default=RUN_DEFAULTS['replications'], help="independent traces")
    parser.add_argument("--alpha", type=float, default=RUN_DEFAULTS['alpha'], help="confidence level is 1 - alpha")


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", default=None, help=f"SMT-LIB2 solver binary [default: ${SOLVER_ENV}, then z3]")
    parser.add_argument("--smt-timeout", type=float, default=RUN_DEFAULTS['smt_timeout'], help="seconds per script")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="petriproof", description="Petri-net models of ECDSA* and location proofs.")
    parser.add_argument("--seed", type=int, default=0, help="seed of every random choice [default: 0]")
    parser.add_argument("--profile", choices=("toy", "standard"), default="toy", help="curve profile of the scheme")
    parser.add_argument("--data-dir", default=None, help="working directory [default: ~/petriproof]")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    sub = commands.add_parser("list", help="list the built-in models")
    sub.add_argument("--composites", action="store_true", help="include ecdsa-full and lps-full")

    sub = commands.add_parser("show", help="print a model's .pnet source")
    sub.add_argument("model")

    sub = commands.add_parser("validate", help="parse and check a model id or .pnet file")
    sub.add_argument("model")

    sub = commands.add_parser("incidence", help="incidence matrices of a model")
    sub.add_argument("model")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--check", action="store_true", help="compare against the bundled golden tables")

    sub = commands.add_parser("simulate", help="replicated random runs of an HLPN")
    sub.add_argument("model")
    _add_sim_flags(sub)
    sub.add_argument("--source-budget", type=int, default=None, help="override every source budget")

    sub = commands.add_parser("explore", help="bounded reachability of an HLPN")
    sub.add_argument("model")
    sub.add_argument("--max-states", type=int, default=RUN_DEFAULTS['max_states'])
    sub.add_argument("--scenario", choices=("honest", "clone"), default="honest")

    sub = commands.add_parser("cpn-run", help="run a CPN with place monitors")
    sub.add_argument("model")
    sub.add_argument("--steps", type=int, default=RUN_DEFAULTS['cpn_steps'])
    sub.add_argument("--kind", choices=("discrete", "time"), default="discrete", help="monitor kind")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    timing = sub.add_mutually_exclusive_group()
    timing.add_argument("--timed", dest="timed", action="store_true")
    timing.add_argument("--untimed", dest="timed", action="store_false")
    sub.set_defaults(timed=False)

    sub = commands.add_parser("smt-emit", help="print or write SMT-LIB2 scripts")
    sub.add_argument("properties", nargs="*", help="property, model or rule (R1..R21) names")
    sub.add_argument("--all", action="store_true")
    sub.add_argument("--no-bindings", action="store_true", help="drop binding assertions (sat expected)")
    sub.add_argument("--out", default=None, help="write <name>.smt2 files here")

    sub = commands.add_parser("smt-check", help="run property scripts through a solver")
    sub.add_argument("properties", nargs="*")
    sub.add_argument("--all", action="store_true")
    sub.add_argument("--no-bindings", action="store_true")
    _add_solver_flags(sub)

    sub = commands.add_parser("report", help="write incidence, simulation, CPN and SMT outputs to a directory")
    sub.add_argument("models", nargs="*")
    sub.add_argument("--all", action="store_true", help="all six models")
    sub.add_argument("--out", required=True)
    sub.add_argument("--steps", type=int, default=RUN_DEFAULTS['cpn_steps'])
    _add_sim_flags(sub)
    _add_solver_flags(sub)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"petriproof: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return EXIT_OK if e.code in (None, 0) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, UnknownModelError, UnknownPropertyError, UnknownRuleError, ValueError) as e:
        print(f"petriproof: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PetriProofError as e:
        print(f"petriproof: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"petriproof: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
