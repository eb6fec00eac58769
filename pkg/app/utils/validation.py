"""Validation helpers for experiment configs and numeric inputs."""

from typing import Any

import numpy as np


def parse_float_list(value: Any) -> Any:
    """Split a comma separated string into floats; other values pass through."""

    if not isinstance(value, str):
        return value
    text = value.strip()
    if not text:
        return []
    return [float(part) for part in text.split(",") if part.strip()]


def parse_disks(value: Any) -> Any:
    """Parse `x,y,r; x,y,r` into disk dicts (last number is the radius)."""

    if not isinstance(value, str):
        return value
    disks = []
    for chunk in value.split(";"):
        if not chunk.strip():
            continue
        numbers = [float(part) for part in chunk.split(",")]
        if len(numbers) < 2:
            raise ValueError(f"disk needs a center and a radius, got '{chunk.strip()}'")
        disks.append({"center": tuple(numbers[:-1]), "radius": numbers[-1]})
    return disks


def validate_band(band: tuple[float, float] | None) -> list[str]:
    errors = []
    if band is None:
        return errors
    s_min, s_max = band
    if s_min <= 0:
        errors.append("Band must start at a positive frequency")
    if s_min >= s_max:
        errors.append("Band lower end must be below its upper end")
    return errors


def validate_experiment(config: Any) -> dict[str, list[str]]:
    """Cross-field checks that single-field constraints cannot express."""

    errors: dict[str, list[str]] = {}

    domain = config.domain
    for disk in domain.obstacles:
        if len(disk.center) != domain.dimension:
            errors.setdefault("obstacles", []).append(
                f"Obstacle center {disk.center} does not have {domain.dimension} coordinates"
            )
    if domain.r_box is not None and domain.r_box <= max(domain.r0, domain.r1):
        errors["r_box"] = ["Box half-width must exceed r0 and r1"]

    initial = config.initial
    if initial.center is not None and len(initial.center) != domain.dimension:
        errors["center"] = [f"Bump center must have {domain.dimension} coordinates"]

    run = config.run
    if run.fit_t_min is not None and run.fit_t_max is not None:
        if run.fit_t_min >= run.fit_t_max:
            errors["fit_t_min"] = ["Fit window start must precede its end"]
    if run.fit_t_max is not None and run.fit_t_max > run.t_end:
        errors["fit_t_max"] = ["Fit window must end before t_end"]

    resolvent = config.resolvent
    if resolvent.r_box is not None and resolvent.r_box <= max(domain.r0, domain.r1):
        errors.setdefault("r_box", []).append("Resolvent box half-width must exceed r0 and r1")
    for name in ("intermediate_band", "high_band"):
        band_errors = validate_band(getattr(resolvent, name))
        if band_errors:
            errors[name] = band_errors
    if any(beta <= 0 or beta > resolvent.delta for beta in resolvent.betas):
        errors["betas"] = [f"Shifts must lie in (0, {resolvent.delta}]"]

    return errors


def validate_field_shape(field: np.ndarray, shape: tuple[int, ...]) -> list[str]:
    errors = []
    if field.shape != shape:
        errors.append(f"Field shape {field.shape} does not match grid shape {shape}")
    elif not np.all(np.isfinite(field)):
        errors.append("Field contains non-finite values")
    return errors
