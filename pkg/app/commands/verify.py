"""`verify`: run the acceptance suite and print a pass/fail table."""

import argparse
from pathlib import Path

from ..config import settings
from ..enums import ErrorCode
from ..errors import HarnessError
from ..schemas import ExperimentConfig, VerifyReport
from ..services.config_service import ConfigService
from ..services.manifest import RunRecorder
from ..services.verify_service import VERIFY_HEADER, VerifyService, verify_rows
from .common import common_parser, threads


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "verify", parents=[common_parser()], help="run every acceptance check"
    )
    parser.add_argument("configs", nargs="*", type=Path, help="scenario configs")
    parser.add_argument(
        "--skip-global", action="store_true", help="skip the scenario-independent checks"
    )
    parser.set_defaults(handler=run)


def collect_configs(args: argparse.Namespace) -> list[ExperimentConfig]:
    paths = list(args.configs)
    if args.config:
        paths.insert(0, args.config)
    if not paths:
        paths = sorted(Path(settings.config_dir).glob("*.cfg"))
    if not paths:
        raise HarnessError(ErrorCode.PARSE_ERROR, f"no configs found in {settings.config_dir}")

    configs = []
    for path in paths:
        config = ConfigService.load(path)
        if args.seed is not None:
            output = config.output.model_copy(update={"seed": args.seed})
            config = config.model_copy(update={"output": output})
        configs.append(config)
    names = [config.scenario for config in configs]
    if len(set(names)) != len(names):
        raise HarnessError(ErrorCode.VALIDATION_ERROR, f"duplicate scenario names {names}")
    return configs


def render_table(report: VerifyReport) -> str:
    rows = [VERIFY_HEADER[:3]] + [row[:3] for row in verify_rows(report)]
    widths = [max(len(str(row[i])) for row in rows) for i in range(3)]
    lines = ["  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(line.rstrip() for line in lines) + "\n"


def run(args: argparse.Namespace) -> int:
    configs = collect_configs(args)
    out_dir = Path(args.out or Path(settings.output_dir) / "verify")
    report = VerifyService.verify(configs, threads(args), out_dir, not args.skip_global)

    recorder = RunRecorder(out_dir, "verify")
    recorder.write_csv("verify.csv", VERIFY_HEADER, verify_rows(report))
    recorder.write_json("verify.json", report)
    recorder.finish()
    print(render_table(report), end="")
    return 0 if report.passed else 1
