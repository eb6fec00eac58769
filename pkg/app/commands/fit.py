"""`fit`: decay exponent of a column of an emitted trace, or a convolution-bound profile."""

import argparse
from pathlib import Path

import numpy as np

from ..enums import ErrorCode
from ..errors import HarnessError
from ..services.config_service import ConfigService
from ..services.energy_service import EnergyService
from ..utils.io import read_csv, write_json
from .common import common_parser, parse_pair, print_json


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "fit", parents=[common_parser()], help="fit (1+t)^-p to a trace column"
    )
    parser.add_argument("--csv", type=Path, help="trace CSV emitted by simulate")
    parser.add_argument("--column", default="E_total", help="column to fit (default E_total)")
    parser.add_argument("--window", type=parse_pair, help="fit window t_min,t_max")
    parser.add_argument(
        "--conv-bound", type=parse_pair, metavar="A,B", help="profile the convolution bound"
    )
    parser.set_defaults(handler=run)


def _window(args: argparse.Namespace, times: np.ndarray) -> tuple[float, float]:
    if args.window:
        return args.window
    if args.config:
        return ConfigService.load(args.config).fit_window()
    return float(times[0]), float(times[-1])


def run(args: argparse.Namespace) -> int:
    if args.conv_bound:
        result = EnergyService.conv_bound_profile(*args.conv_bound)
    else:
        if not args.csv:
            raise HarnessError(ErrorCode.PARSE_ERROR, "fit needs --csv or --conv-bound")
        header, rows = read_csv(args.csv)
        for name in ("t", args.column):
            if name not in header:
                raise HarnessError(ErrorCode.PARSE_ERROR, f"no column '{name}' in {args.csv}")
        if not rows:
            raise HarnessError(ErrorCode.PARSE_ERROR, f"no rows in {args.csv}")
        try:
            times = np.array([float(row["t"]) for row in rows])
            values = np.array([float(row[args.column]) for row in rows])
        except ValueError as e:
            raise HarnessError(ErrorCode.PARSE_ERROR, f"non-numeric data: {e}") from e
        result = EnergyService.fit_decay(times, values, _window(args, times))

    if args.out:
        write_json(Path(args.out), result)
    print_json(result)
    return 0
