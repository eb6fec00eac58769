"""`simulate`: one damped wave run with trace, fits and manifest."""

import argparse

from loguru import logger

from ..services.experiment_service import ExperimentService, write_simulation
from .common import common_parser, load_config, print_json, recorder_for, threads


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "simulate", parents=[common_parser()], help="run the damped wave equation"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    recorder = recorder_for(args, config, "simulate")
    wave, report = ExperimentService.simulate(config, threads(args))
    write_simulation(recorder, wave, report, config)
    recorder.finish()
    for name, fit in report.fits.items():
        logger.info(f"{name}: exponent {fit.exponent:.4f} (R^2 {fit.r2:.4f}) on {fit.window}")
    print_json(report)
    return 0
