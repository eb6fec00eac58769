"""Numeric comparison helpers for acceptance checks."""

from collections.abc import Sequence

import numpy as np


def relative_change(reference: float, value: float, floor: float = 1e-300) -> float:
    """|value - reference| / |reference|."""
    return abs(value - reference) / max(abs(reference), floor)


def max_relative_drift(values: Sequence[float]) -> float:
    """Largest relative departure of a series from its first value."""
    if len(values) == 0:
        return 0.0
    series = np.asarray(values, dtype=np.float64)
    return float(np.max(np.abs(series - series[0])) / max(abs(series[0]), 1e-300))


def max_relative_gap(reference: Sequence[float], other: Sequence[float]) -> float:
    """Pointwise max of |other - reference| / |reference| over a common prefix."""

    n = min(len(reference), len(other))
    if n == 0:
        return 0.0
    ref = np.asarray(reference[:n], dtype=np.float64)
    oth = np.asarray(other[:n], dtype=np.float64)
    scale = np.maximum(np.abs(ref), 1e-300)
    return float(np.max(np.abs(oth - ref) / scale))


def in_range(value: float | None, low: float, high: float) -> bool:
    return value is not None and low <= value <= high


def within_tolerance(measured: float, limit: float, absolute: float = 0.0) -> bool:
    """Passes when measured <= limit, with an optional absolute allowance."""
    if not np.isfinite(measured):
        return False
    return measured <= limit or measured <= absolute


def is_non_increasing(values: Sequence[float], rtol: float = 1e-12) -> bool:
    series = np.asarray(values, dtype=np.float64)
    if series.size < 2:
        return True
    return bool(np.all(series[1:] <= series[:-1] * (1 + rtol)))
