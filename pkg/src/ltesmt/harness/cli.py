"""Command line: ``solve``, ``bench`` and ``gen-corpus``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..engine import MODES, BackendError, EprExportError, Strategy, StrategyError, decide, epr_export
from ..frontend import ParseError, parse_file
from ..preprocess import PreprocessError
from .bench import disagreements, run_bench, write_csv
from .corpus import write_corpus

EXIT_OK, EXIT_UNKNOWN, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2, 3


def parse_split(spec: Optional[str]):
    """``auto`` or comma-separated ``a:b`` constant pairs."""
    if spec is None or spec == "auto":
        return spec
    pairs = []
    for item in spec.split(","):
        names = item.strip().split(":")
        if len(names) != 2 or not all(names):
            raise argparse.ArgumentTypeError(f"bad split pair {item!r}, expected NAME:NAME")
        pairs.append((names[0], names[1]))
    return pairs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ltesmt", description="Decide ground formulas modulo local theory extensions.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide one problem file")
    s.add_argument("file")
    s.add_argument("--mode", choices=MODES, default="ematch")
    s.add_argument("--stage-psi", action="store_true", help="match on Psi terms only after stage 0 saturates")
    s.add_argument("--eq-split", type=parse_split, metavar="SPEC", help="'auto' or pairs like a:b,c:d")
    s.add_argument("--special-case", action="store_true", help="try instances identifying same-sort variables first")
    s.add_argument("--backend", metavar="CMD", help="external solver command, e.g. 'z3 -in'")
    s.add_argument("--export-epr", metavar="PATH", help="write an EPR partial instantiation to PATH")
    s.add_argument("--force", action="store_true", help="export even if some axioms are not EPR-reducible")
    s.add_argument("--timeout", type=int, metavar="MS")

    b = sub.add_parser("bench", help="run every *.lte.smt2 file in a directory")
    b.add_argument("dir")
    b.add_argument("--modes", default="eager,ematch", help="comma-separated modes")
    b.add_argument("--out", required=True, metavar="CSV")
    b.add_argument("--backend", metavar="CMD")
    b.add_argument("--timeout", type=int, metavar="MS")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--no-check-agreement", action="store_true")

    g = sub.add_parser("gen-corpus", help="write the bundled benchmark families")
    g.add_argument("dir")
    return parser


def cmd_solve(args) -> int:
    try:
        problem = parse_file(args.file)
        if args.export_epr:
            export = epr_export(problem, force=args.force)
            Path(args.export_epr).write_text(export.text, encoding="utf-8")
            for line in export.report:
                print(f"warning: {line}", file=sys.stderr)
        strategy = Strategy(mode=args.mode, stage_psi=args.stage_psi, eq_split=args.eq_split,
                            special_case=args.special_case, backend=args.backend, timeout_ms=args.timeout)
        verdict = decide(problem, strategy)
    except ParseError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return EXIT_ERROR
    except EprExportError as exc:
        print(f"{args.file}: EPR export refused:", file=sys.stderr)
        for line in exc.report:
            print(f"  {line}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, PreprocessError, StrategyError, KeyError, BackendError) as exc:
        print(f"{args.file}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    s = verdict.stats
    print(f"{verdict}, instances={s.instances}, eager_bound={s.eager_bound}, rounds={s.rounds}, "
          f"ground_checks={s.ground_checks}, wall_ms={s.wall_ms:.1f}")
    return EXIT_OK if verdict.status in ("sat", "unsat") else EXIT_UNKNOWN


def cmd_bench(args) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad:
        print(f"unknown mode(s): {', '.join(bad)}", file=sys.stderr)
        return EXIT_ERROR
    if not Path(args.dir).is_dir():
        print(f"{args.dir}: not a directory", file=sys.stderr)
        return EXIT_ERROR
    records = run_bench(args.dir, modes, args.backend, args.timeout, args.jobs)
    write_csv(records, args.out)
    for r in records:
        if r.verdict == "error":
            print(f"{r.file}: error: {r.reason}", file=sys.stderr)
    if not args.no_check_agreement:
        diffs = disagreements(records)
        for d in diffs:
            print(f"verdict disagreement: {d}", file=sys.stderr)
        if diffs:
            return EXIT_DISAGREE
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    for p in write_corpus(args.dir):
        print(p)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": cmd_solve, "bench": cmd_bench, "gen-corpus": cmd_gen_corpus}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
