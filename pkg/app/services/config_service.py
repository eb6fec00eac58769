"""Sectioned key = value experiment configs: parse, validate, serialize."""

from pathlib import Path
from typing import Any

from loguru import logger
from pydantic import BaseModel, ValidationError

from ..enums import ErrorCode
from ..errors import HarnessError
from ..schemas import Disk, ExperimentConfig
from ..utils.io import format_value, text_sha256
from ..utils.validation import validate_experiment

SECTIONS = ("domain", "damper", "initial", "run", "resolvent", "output")
NULL_VALUES = {"", "none", "null"}
LIST_KEYS = {"obstacles", "holes", "radii", "betas", "probe_s"}


class ConfigService:
    """Round-trippable text form of ExperimentConfig."""

    @staticmethod
    def parse(text: str) -> ExperimentConfig:
        raw: dict[str, dict[str, str]] = {}
        lines: dict[tuple[str, str], int] = {}
        section: str | None = None

        for number, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(("#", ";")):
                continue
            if stripped.startswith("["):
                if not stripped.endswith("]"):
                    raise HarnessError(
                        ErrorCode.PARSE_ERROR, f"line {number}: unterminated header", line=number
                    )
                section = stripped[1:-1].strip().lower()
                if section not in SECTIONS:
                    raise HarnessError(
                        ErrorCode.PARSE_ERROR,
                        f"line {number}: unknown section [{section}]",
                        line=number,
                    )
                raw.setdefault(section, {})
                continue
            if "=" not in stripped:
                raise HarnessError(
                    ErrorCode.PARSE_ERROR, f"line {number}: expected 'key = value'", line=number
                )
            if section is None:
                raise HarnessError(
                    ErrorCode.PARSE_ERROR, f"line {number}: key outside any section", line=number
                )
            key, value = (part.strip() for part in stripped.split("=", 1))
            key = key.lower()
            if not key:
                raise HarnessError(ErrorCode.PARSE_ERROR, f"line {number}: empty key", line=number)
            if key in raw[section]:
                raise HarnessError(
                    ErrorCode.PARSE_ERROR,
                    f"line {number}: duplicate key '{key}' in [{section}]",
                    line=number,
                )
            lines[(section, key)] = number
            if value.lower() not in NULL_VALUES or key in LIST_KEYS:
                raw[section][key] = value

        try:
            config = ExperimentConfig.model_validate(raw)
        except ValidationError as e:
            first = e.errors()[0]
            loc = [str(part) for part in first["loc"]]
            field = loc[1] if len(loc) > 1 else loc[0]
            line = lines.get((loc[0], field))
            where = f" (line {line})" if line else ""
            raise HarnessError(
                ErrorCode.VALIDATION_ERROR,
                f"{field}{where}: {first['msg']}",
                field=field,
                line=line,
            ) from e

        errors = validate_experiment(config)
        if errors:
            field, messages = next(iter(errors.items()))
            raise HarnessError(
                ErrorCode.VALIDATION_ERROR, f"{field}: {'; '.join(messages)}", field=field
            )
        return config

    @staticmethod
    def serialize(config: ExperimentConfig) -> str:
        blocks = []
        for name in SECTIONS:
            section: BaseModel = getattr(config, name)
            body = [f"[{name}]"]
            for key in type(section).model_fields:
                value = getattr(section, key)
                if value is None:
                    continue
                body.append(f"{key} = {_render(value)}")
            blocks.append("\n".join(body))
        return "\n\n".join(blocks) + "\n"

    @staticmethod
    def load(path: Path) -> ExperimentConfig:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError as e:
            raise HarnessError(
                ErrorCode.PARSE_ERROR, f"config not found: {path}", path=str(path)
            ) from e
        except UnicodeDecodeError as e:
            raise HarnessError(
                ErrorCode.PARSE_ERROR, f"config is not UTF-8: {path}", path=str(path)
            ) from e
        config = ConfigService.parse(text)
        logger.debug(f"Loaded config {path} (scenario {config.scenario})")
        return config

    @staticmethod
    def config_hash(config: ExperimentConfig) -> str:
        return text_sha256(ConfigService.serialize(config))


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        if value and all(isinstance(item, Disk) for item in value):
            return "; ".join(_render_disk(item) for item in value)
        return ", ".join(format_value(item) for item in value)
    return format_value(value)


def _render_disk(disk: Disk) -> str:
    return ", ".join(format_value(x) for x in (*disk.center, disk.radius))


config_service = ConfigService()


def parse_config(text: str) -> ExperimentConfig:
    """Convenience function to parse config text."""
    return ConfigService.parse(text)


def serialize_config(config: ExperimentConfig) -> str:
    return ConfigService.serialize(config)


def load_config(path: Path) -> ExperimentConfig:
    return ConfigService.load(path)
