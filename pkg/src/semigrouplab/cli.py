"""Command-line entry point: ``semigrouplab <subcommand> ...`` or ``python -m semigrouplab``.

Exit codes: 0 success, 2 invalid arguments, 3 check or suite failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys

from . import __version__, core, experiments
from .errors import InvalidGenerators, InvalidParameter, InvariantViolation, NotCofinite, SamplerDidNotConverge
from .random_model import SampleOutcome, sample_semigroup

log = logging.getLogger("semigrouplab")

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 2, 3, 4


def _list_of(kind):
    def parse(text):
        parts = [t for t in re.split(r"[,\s]+", text.strip()) if t]
        try:
            return [kind(t) for t in parts]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a list of {kind.__name__}")
    return parse


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="semigrouplab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    base = argparse.ArgumentParser(add_help=False)
    base.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False, parents=[base])
    common.add_argument("--threads", type=int, default=experiments.default_threads())
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("invariants", parents=[base], help="print F, g, e, q of <gens>")
    p.add_argument("gens", nargs="+", type=int)

    p = sub.add_parser("sample", parents=[common], help="one CSV row per random draw")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=_seed, required=True)

    p = sub.add_parser("scaling", parents=[common], help="F, g, e scaling across a p grid")
    p.add_argument("--p-grid", type=_list_of(float), required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)

    p = sub.add_parser("transition", parents=[common], help="sparse-to-dense transition in C")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--c-grid", type=_list_of(float), required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)

    p = sub.add_parser("tail", parents=[common], help="Frobenius number of the shifted model")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--u-grid", type=_list_of(int), required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=_seed, required=True)

    p = sub.add_parser("lemmas", parents=[base], help="exact lemma checks, JSON report")
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--out")

    p = sub.add_parser("replay", parents=[base], help="rerun a study from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out-dir")
    return ap


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _study(args) -> experiments.StudyResult:
    if args.command == "scaling":
        cfg = experiments.ScalingConfig(tuple(args.p_grid), args.trials, args.seed, args.threads, args.out)
        return experiments.run_scaling(cfg)
    if args.command == "transition":
        return experiments.run_transition(args.p, args.c_grid, args.trials, args.seed, args.threads)
    return experiments.run_tail(args.p, args.u_grid, args.trials, args.seed, args.threads)


def _run(args) -> int:
    if args.command == "invariants":
        print(core.invariants(args.gens))
        return EXIT_OK

    if args.command == "sample":
        outcomes = experiments.map_trials(lambda t: sample_semigroup(args.p, t, args.seed),
                                          range(args.trials), args.threads)
        done = [o for o in outcomes if o is not None]
        for o in done:
            experiments.audit(o)
        if args.format == "csv":
            text = SampleOutcome.CSV_HEADER + "\r\n" + "".join(o.csv_row() + "\r\n" for o in done)
        else:
            text = json.dumps([{"trial_id": o.trial_id, "p": o.p, "M": o.truncation_M,
                                "F": o.invariants.frobenius, "g": o.invariants.genus,
                                "e": o.invariants.embedding_dim, "q": o.invariants.multiplicity,
                                "count_elements": len(o.elements)} for o in done], indent=2) + "\n"
        _emit(text, args.out)
        return EXIT_OK

    if args.command in ("scaling", "transition", "tail"):
        result = _study(args)
        if args.out:
            experiments.write_study(result, args.out, args.format)
        else:
            sys.stdout.write(result.render(args.format))
        log.info("%s: %d rows in %.2fs", args.command, len(result.rows), result.manifest["wall_clock_seconds"])
        return EXIT_OK

    if args.command == "lemmas":
        report = experiments.run_lemma_suite(args.budget)
        _emit(json.dumps(report, indent=2) + "\n", args.out)
        for e in report["checks"]:
            log.info("%-24s %s", e["name"], "PASS" if e["passed"] else "FAIL")
        return EXIT_OK if report["passed"] else EXIT_CHECK

    if args.command == "replay":
        for path in experiments.replay(args.manifest, args.out_dir):
            log.info("rewrote %s", path)
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return _run(args)
    except (InvalidGenerators, NotCofinite, InvalidParameter) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, SamplerDidNotConverge) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
