"""`check-gcc`: certify geometric control for the configured damper."""

import argparse

from ..schemas import GccReport
from ..services.experiment_service import ExperimentService
from .common import common_parser, load_config, recorder_for, threads


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "check-gcc", parents=[common_parser()], help="trace billiard rays against the damper"
    )
    parser.add_argument(
        "--escape-radius",
        type=float,
        help="exterior control: a ray also succeeds once it leaves this ball",
    )
    parser.set_defaults(handler=run)


def describe(report: GccReport) -> str:
    lines = [
        f"mode:            {report.mode}",
        f"satisfied:       {str(report.satisfied).lower()}",
        f"T0 estimate:     {report.t0_estimate:.6g}",
        f"rays sampled:    {report.num_samples}",
        f"epsilon:         {report.epsilon:g}",
        f"t_max:           {report.t_max:g}",
        f"tangential hits: {report.degenerate_hits}",
    ]
    if report.escape_radius is not None:
        lines.append(f"escape radius:   {report.escape_radius:g}")
    if report.worst_ray is not None:
        ray = report.worst_ray
        lines.append(f"worst ray:       x={ray.position} d={ray.direction}")
    return "\n".join(lines) + "\n"


def run(args: argparse.Namespace) -> int:
    config = load_config(args)
    recorder = recorder_for(args, config, "check-gcc")
    report = ExperimentService.gcc(config, threads=threads(args), escape_radius=args.escape_radius)
    text = describe(report)
    recorder.write_json("gcc.json", report)
    recorder.write_text("gcc.txt", text)
    recorder.finish()
    print(text, end="")
    return 0
