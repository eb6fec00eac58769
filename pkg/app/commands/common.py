"""Arguments and helpers shared by every subcommand."""

import argparse
import json
from pathlib import Path

from pydantic import BaseModel

from ..config import settings
from ..schemas import ExperimentConfig
from ..services.config_service import ConfigService
from ..services.manifest import RunRecorder


def common_parser() -> argparse.ArgumentParser:
    """Parent parser carrying the flags every subcommand accepts."""

    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="experiment config file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="override [output] seed")
    parser.add_argument("--threads", type=int, help="worker threads (1 runs inline)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ConfigService.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        output = config.output.model_copy(update={"seed": args.seed})
        config = config.model_copy(update={"output": output})
    return config


def output_dir(args: argparse.Namespace, config: ExperimentConfig, command: str) -> Path:
    if args.out:
        return Path(args.out)
    if config.output.directory:
        return Path(config.output.directory)
    return Path(settings.output_dir) / config.scenario / command


def recorder_for(args: argparse.Namespace, config: ExperimentConfig, command: str) -> RunRecorder:
    return RunRecorder(
        output_dir(args, config, command), command, ConfigService.config_hash(config)
    )


def threads(args: argparse.Namespace) -> int:
    return args.threads or settings.threads


def print_json(payload: BaseModel | dict) -> None:
    if isinstance(payload, BaseModel):
        print(payload.model_dump_json(indent=2))
    else:
        print(json.dumps(payload, indent=2, default=str))


def parse_pair(text: str) -> tuple[float, float]:
    """'a,b' -> (a, b) for argparse."""
    try:
        first, second = (float(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected two numbers as a,b, got '{text}'") from e
    return first, second
