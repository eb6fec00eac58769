"""Output formats: CSV tables, JSON reports, binary snapshots."""

import csv
import hashlib
import io
import os
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from ..enums import ErrorCode
from ..errors import HarnessError

SNAPSHOT_MAGIC = b"DWSNAP01"


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def atomic_write_bytes(path: Path, payload: bytes) -> Path:
    """Write via a temporary sibling and rename into place."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    return path


def atomic_write_text(path: Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write_text(path, render_csv(header, rows))


def read_csv(path: Path) -> tuple[list[str], list[dict[str, str]]]:
    path = Path(path)
    if not path.exists():
        raise HarnessError(ErrorCode.PARSE_ERROR, f"file not found: {path}", path=str(path))
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        rows = list(reader)
        header = list(reader.fieldnames or [])
    return header, rows


def write_json(path: Path, model: BaseModel) -> Path:
    return atomic_write_text(path, model.model_dump_json(indent=2) + "\n")


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def text_sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def encode_snapshot(values: np.ndarray, h: float, t: float) -> bytes:
    """Header: magic, N, dims (int64); h, t (float64); then the node values.

    Everything is little-endian; values are float64 in C order.
    """

    header = SNAPSHOT_MAGIC
    header += np.array([values.ndim, *values.shape], dtype="<i8").tobytes()
    header += np.array([h, t], dtype="<f8").tobytes()
    return header + np.ascontiguousarray(values, dtype="<f8").tobytes()


def decode_snapshot(payload: bytes) -> tuple[np.ndarray, float, float]:
    if not payload.startswith(SNAPSHOT_MAGIC):
        raise HarnessError(ErrorCode.PARSE_ERROR, "not a snapshot file")
    offset = len(SNAPSHOT_MAGIC)
    ndim = int(np.frombuffer(payload, dtype="<i8", count=1, offset=offset)[0])
    offset += 8
    shape = tuple(int(n) for n in np.frombuffer(payload, dtype="<i8", count=ndim, offset=offset))
    offset += 8 * ndim
    h, t = np.frombuffer(payload, dtype="<f8", count=2, offset=offset)
    offset += 16
    count = int(np.prod(shape))
    if len(payload) - offset != 8 * count:
        raise HarnessError(
            ErrorCode.SHAPE_MISMATCH,
            f"snapshot body holds {(len(payload) - offset) // 8} values, header says {count}",
        )
    values = np.frombuffer(payload, dtype="<f8", count=count, offset=offset).reshape(shape)
    return values.astype(np.float64), float(h), float(t)


def write_snapshot(path: Path, values: np.ndarray, h: float, t: float) -> Path:
    return atomic_write_bytes(path, encode_snapshot(values, h, t))


def read_snapshot(path: Path) -> tuple[np.ndarray, float, float]:
    return decode_snapshot(Path(path).read_bytes())
