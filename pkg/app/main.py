"""Command line entry point for the damped wave laboratory."""

import argparse
import json
import sys

from loguru import logger

from . import __version__
from .commands import SUBCOMMANDS
from .config import settings
from .errors import LabError


def create_parser() -> argparse.ArgumentParser:
    """Create the top-level parser with every subcommand registered."""

    parser = argparse.ArgumentParser(
        prog="damplab",
        description="Decay experiments for the damped wave equation in exterior domains",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in SUBCOMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbose: bool = False) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def main(argv: list[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except LabError as e:
        logger.error(f"{args.command} failed: {e}")
        print(json.dumps({"error": e.to_dict()}, indent=2))
        return 2


if __name__ == "__main__":
    sys.exit(main())
