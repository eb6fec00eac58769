"""`sweep-resolvent`: intermediate and high frequency sweeps plus the low-frequency probe."""

import argparse

from ..services.experiment_service import ExperimentService, write_sweep
from .common import common_parser, load_config, print_json, recorder_for, threads


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "sweep-resolvent", parents=[common_parser()], help="sample the reduced equation"
    )
    parser.add_argument("--no-probe", action="store_true", help="skip the low-frequency probe")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    if args.no_probe:
        resolvent = config.resolvent.model_copy(update={"probe": False})
        config = config.model_copy(update={"resolvent": resolvent})
    recorder = recorder_for(args, config, "sweep-resolvent")
    summary = ExperimentService.sweep(config, threads(args))
    write_sweep(recorder, summary)
    recorder.finish()
    print_json(
        {
            "scenario": summary.scenario,
            "intermediate_band": summary.intermediate.band,
            "sup_h1_ratio": summary.intermediate.sup_h1_ratio,
            "high_band": summary.high.band,
            "sup_hf_ratio": summary.high.sup_hf_ratio,
            "band_growth": summary.band_growth,
            "failures": summary.intermediate.failures + summary.high.failures,
            "low_freq_bounded": summary.low_freq.bounded if summary.low_freq else None,
        }
    )
    return 0
