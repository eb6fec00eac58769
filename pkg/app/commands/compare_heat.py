"""`compare-heat`: damped wave against heat flow from u0 + u1."""

import argparse

from ..services.experiment_service import (
    ExperimentService,
    write_heat_comparison,
    write_simulation,
)
from .common import common_parser, load_config, print_json, recorder_for, threads


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "compare-heat", parents=[common_parser()], help="diffusion phenomenon comparison"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    recorder = recorder_for(args, config, "compare-heat")
    wave, report, heat, gap = ExperimentService.compare_heat(config, threads(args))
    write_simulation(recorder, wave, report, config)
    write_heat_comparison(recorder, heat, gap)
    recorder.finish()
    print_json(
        {
            "scenario": config.scenario,
            "samples": len(gap.times),
            "gap_exponent": gap.gap_fit.exponent if gap.gap_fit else None,
            "u_exponent": gap.u_fit.exponent if gap.u_fit else None,
            "integrated_gap_sq": gap.integrated_gap_sq,
            "bound_ratio": gap.bound_ratio,
        }
    )
    return 0
