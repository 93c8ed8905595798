"""Command line entry point: ``realcubic classify MIN MAX``."""
from __future__ import annotations

import argparse
import os
import sys

from .report import build_report, format_frequencies, frequencies, verify_tables

EXIT_MISMATCH = 1
EXIT_ALARM = 2
EXIT_USAGE = 64
MAX_BOUND = int(os.environ.get("REALCUBIC_MAX_BOUND", str(10**7)))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="realcubic", description="Totally real cubic fields and their DPF types.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("classify", help="enumerate, group and classify fields with MIN <= d_L <= MAX")
    c.add_argument("min", type=int)
    c.add_argument("max", type=int)
    c.add_argument("--predict-only", action="store_true",
                   help="ring-space multiplicities only, no enumeration or sextic work")
    c.add_argument("--classify-depth", choices=("forced", "full"), default="forced")
    c.add_argument("--budget", type=float, default=None, help="wall-clock seconds per field")
    c.add_argument("--emit", choices=("jsonl", "csv", "table"), default="table")
    c.add_argument("--no-nilets", action="store_true", help="skip the ring-space prediction pass")
    c.add_argument("--verify", action="store_true", help="compare with the bundled reference tables")
    c.add_argument("--frequencies", action="store_true", help="print relative frequencies")
    return p


def main(argv: list[str] | None = None) -> int:
    p = _parser()
    args = p.parse_args(argv)
    if not 0 < args.min <= args.max:
        p.error("need 0 < MIN <= MAX")
    if args.max > MAX_BOUND:
        p.error(f"MAX exceeds the configured ceiling {MAX_BOUND}")
    if args.budget is not None and args.budget < 0:
        p.error("budget must be non-negative")
    rep = build_report(args.min, args.max, depth=args.classify_depth, predict_only=args.predict_only,
                       budget=args.budget, with_nilets=not args.no_nilets)
    out = sys.stdout
    if args.emit == "jsonl":
        out.write(rep.to_jsonl())
    elif args.emit == "csv":
        out.write(rep.to_csv())
    else:
        out.write(rep.to_table())
    if args.frequencies:
        out.write(format_frequencies(frequencies(rep)))
    status = 0
    if args.verify:
        diffs = verify_tables(rep)
        for line in diffs:
            print(line, file=sys.stderr)
        print(f"reference comparison: {len(diffs)} difference(s)", file=sys.stderr)
        if diffs:
            status = EXIT_MISMATCH
    for a in rep.alarms:
        print(f"consistency alarm: {a}", file=sys.stderr)
        status = EXIT_ALARM
    return status


if __name__ == "__main__":
    sys.exit(main())
