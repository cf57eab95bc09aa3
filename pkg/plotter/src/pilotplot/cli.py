"""Command line front end.

``pilotplot render --csv curves.csv --out figure.svg`` turns a harness
curve CSV into the two-panel figure. Exit codes: 0 success (including a
header-only CSV, which renders empty panels with a warning), 2 usage,
missing-file, or schema errors.
"""

from __future__ import annotations

import argparse
import sys

from pilotplot.figure import FigureSpec, render
from pilotplot.reader import SchemaError, read_curves


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilotplot",
        description="Render simulation curve CSVs into a two-panel vector figure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render a curve CSV into a figure")
    p_render.add_argument("--csv", required=True, help="input curve CSV path")
    p_render.add_argument(
        "--out", required=True, help="output image path (.svg or .pdf)"
    )
    p_render.add_argument(
        "--no-log-nmse",
        action="store_true",
        help="plot the NMSE panel on a linear scale instead of log",
    )
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    """Entry point returning an exit code instead of raising SystemExit."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        table = read_curves(args.csv)
    except FileNotFoundError:
        print(f"error: CSV file not found: {args.csv}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not table.curves:
        print("warning: CSV has no data rows; rendering empty panels", file=sys.stderr)

    try:
        spec = FigureSpec(
            input_csv=args.csv,
            output_image=args.out,
            nmse_log_scale=not args.no_log_nmse,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out = render(spec)
    n_blocks = max((c.blocks.size for c in table.curves), default=0)
    print(f"wrote {out} ({len(table.curves)} methods x {n_blocks} blocks)")
    return 0


def main() -> None:
    sys.exit(cli_main())
