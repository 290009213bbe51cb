"""Command-line entry point: ``ifmsim <command> ...``.

Exit codes: 0 success, 2 invalid input (scenario, parameters, usage),
3 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .errors import (
    BadParamError,
    CircuitValidationError,
    IFMError,
    ScenarioError,
    UnknownModeError,
)
from .report import (
    hardy_report,
    linspace,
    render_csv,
    render_jsonl,
    render_text,
    repeat_report,
    run_report,
    sweep_report,
    tsvf_report,
    zeno_grid,
    zeno_report,
)
from .scenario import load_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

_INVALID = (ScenarioError, CircuitValidationError, BadParamError, UnknownModeError)


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be at least 1")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    p = argparse.ArgumentParser(prog="ifmsim", description="Interaction-free measurement simulator.")
    p.add_argument("--version", action="version", version=f"ifmsim {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", help="write report.txt, records.jsonl, CSV tables and PNG figures here")
    common.add_argument("--jsonl", action="store_true", help="print JSON-lines records instead of the table")
    common.add_argument("--no-figures", action="store_true", help="skip PNG figures when --out is given")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    run = sub.add_parser("run", parents=[common], help="exact distribution of a scenario, optionally sampled")
    run.add_argument("scenario", help="scenario file, or the name of a bundled scenario")
    run.add_argument("--shots", type=_positive_int)
    run.add_argument("--seed", type=_seed)

    sweep = sub.add_parser("sweep", parents=[common], help="bomb-test efficiency over transmittance")
    sweep.add_argument("--param", default="T", choices=["T"])
    sweep.add_argument("--from", dest="start", type=float, default=0.1)
    sweep.add_argument("--to", dest="stop", type=float, default=0.9)
    sweep.add_argument("--steps", type=_positive_int, default=9)

    zeno = sub.add_parser("zeno", parents=[common], help="two-cavity scheme versus number of cycles")
    zeno.add_argument("--max-n", type=_positive_int, default=100)
    zeno.add_argument("--n", dest="ns", type=_positive_int, nargs="+", help="explicit cycle counts")

    hardy = sub.add_parser("hardy", parents=[common], help="nested interferometers: joint clicks and queries")
    hardy.add_argument("--photon-t", type=float, default=0.5)
    hardy.add_argument("--object-t", type=float, default=0.5)

    rep = sub.add_parser("repeat", parents=[common], help="repeat the bomb test while D1 clicks")
    rep.add_argument("--T", dest="transmittance", type=float, default=0.5)
    rep.add_argument("--max-rounds", type=_positive_int)
    rep.add_argument("--mode", choices=["analytic", "simulated"], default="analytic")

    tsvf = sub.add_parser("tsvf", parents=[common], help="forward/backward states, no-trace map, weak values")
    tsvf.add_argument("scenario")
    tsvf.add_argument("--postselect", metavar="EVENT", help="terminal event, e.g. D2 or 'click:OD2 & click:PD2'")
    return p


def _report(args):
    if args.command == "run":
        return run_report(load_scenario(args.scenario), args.shots, args.seed)
    if args.command == "sweep":
        return sweep_report(linspace(args.start, args.stop, args.steps))
    if args.command == "zeno":
        return zeno_report(args.ns or zeno_grid(args.max_n))
    if args.command == "hardy":
        return hardy_report(args.photon_t, args.object_t)
    if args.command == "repeat":
        return repeat_report(args.transmittance, args.max_rounds, args.mode)
    if args.command == "tsvf":
        spec = load_scenario(args.scenario)
        if args.postselect is None and spec.circuit.postselection is None:
            raise BadParamError("scenario has no postselection; pass --postselect")
        return tsvf_report(spec, args.postselect)
    raise AssertionError(args.command)


def write_outputs(report, out_dir, figures=True):
    """Write every report stream into ``out_dir``; return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for fname, text in (("report.txt", render_text(report)), ("records.jsonl", render_jsonl(report))):
        path = os.path.join(out_dir, fname)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        paths.append(path)
    for sec in report.sections:
        path = os.path.join(out_dir, sec.title.replace(":", "_") + ".csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_csv(sec))
        paths.append(path)
    if figures:
        from .plotting import render_figures

        paths += render_figures(report, out_dir)
    return paths


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = _report(args)
        sys.stdout.write(render_jsonl(report) if args.jsonl else render_text(report))
        if args.out:
            write_outputs(report, args.out, not args.no_figures)
    except _INVALID as exc:
        print(f"ifmsim: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IFMError as exc:
        print(f"ifmsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, OSError) as exc:
        code = EXIT_INVALID if isinstance(exc, ValueError) else EXIT_RUNTIME
        print(f"ifmsim: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


def run_cli(argv=None):
    """Alias of :func:`main` that never calls ``sys.exit``; usage errors
    return 2 instead of raising ``SystemExit``."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
