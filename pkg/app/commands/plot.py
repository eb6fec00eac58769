"""`plot`: SVG chart of a previously emitted CSV."""

import argparse
from pathlib import Path

from ..utils.plotting import plot_csv
from .common import common_parser


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "plot", parents=[common_parser()], help="chart CSV columns as SVG"
    )
    parser.add_argument("--csv", type=Path, required=True, help="CSV emitted by another command")
    parser.add_argument("--columns", help="comma separated columns (default: all numeric)")
    parser.add_argument("--x", dest="x_column", help="x column (default: first column)")
    parser.add_argument("--linear", action="store_true", help="linear instead of log-log axes")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    columns = [c.strip() for c in args.columns.split(",")] if args.columns else None
    out = args.out or args.csv.with_suffix(".svg")
    if out.suffix != ".svg":
        out = out / f"{args.csv.stem}.svg"
    path = plot_csv(args.csv, out, columns, args.x_column, log_axes=not args.linear)
    print(path)
    return 0
