"""SVG line charts of emitted CSV columns."""

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..enums import ErrorCode  # noqa: E402
from ..errors import HarnessError  # noqa: E402
from .io import atomic_write_bytes, read_csv  # noqa: E402

# Stable element ids so identical data gives identical SVG text.
plt.rcParams["svg.hashsalt"] = "damplab"


def _column(rows: list[dict[str, str]], name: str) -> np.ndarray:
    values = []
    for row in rows:
        text = row.get(name, "")
        values.append(float(text) if text not in ("", None) else np.nan)
    return np.asarray(values, dtype=np.float64)


def render_chart(
    x: np.ndarray,
    series: dict[str, np.ndarray],
    title: str,
    x_label: str,
    log_axes: bool = True,
) -> bytes:
    """Polyline chart; on log axes x is shifted to 1 + x and non-positive values dropped."""

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    drawn = 0
    for label, y in series.items():
        xs = 1.0 + x if log_axes else x
        keep = np.isfinite(xs) & np.isfinite(y)
        if log_axes:
            keep &= (xs > 0) & (y > 0)
        if np.count_nonzero(keep) < 2:
            continue
        ax.plot(xs[keep], y[keep], linewidth=1.2, label=label)
        drawn += 1
    if not drawn:
        plt.close(fig)
        raise HarnessError(ErrorCode.PLOT_ERROR, "no data to plot")

    if log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
        x_label = f"1 + {x_label}"
    ax.set_xlabel(x_label)
    ax.set_title(title)
    ax.grid(True, which="both", linewidth=0.3)
    ax.legend()

    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buffer.getvalue()


def plot_csv(
    csv_path: Path,
    out_path: Path,
    columns: list[str] | None = None,
    x_column: str | None = None,
    log_axes: bool = True,
) -> Path:
    """Chart the given columns of an emitted CSV against its first column."""

    header, rows = read_csv(csv_path)
    if not header or not rows:
        raise HarnessError(ErrorCode.PLOT_ERROR, f"no data in {csv_path}", path=str(csv_path))
    x_column = x_column or header[0]
    if x_column not in header:
        raise HarnessError(ErrorCode.PLOT_ERROR, f"no column '{x_column}' in {csv_path}")
    missing = [name for name in columns or [] if name not in header]
    if missing:
        raise HarnessError(ErrorCode.PLOT_ERROR, f"unknown columns {missing} in {csv_path}")

    try:
        x = _column(rows, x_column)
        series = {name: _column(rows, name) for name in columns or []}
    except ValueError as e:
        raise HarnessError(ErrorCode.PLOT_ERROR, f"non-numeric data in {csv_path}: {e}") from e
    if columns is None:
        for name in header:
            if name == x_column:
                continue
            try:
                series[name] = _column(rows, name)
            except ValueError:
                continue  # text column
    payload = render_chart(x, series, Path(csv_path).stem, x_column, log_axes)
    return atomic_write_bytes(Path(out_path), payload)
