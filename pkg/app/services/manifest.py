"""Run manifest: every emitted file with its checksum, written last."""

from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import BaseModel

from .. import __version__
from ..schemas import ManifestEntry, RunManifest
from ..utils import io

MANIFEST_NAME = "manifest.json"


class RunRecorder:
    """Writes the outputs of one command into one directory and records them."""

    def __init__(self, directory: Path, command: str, config_hash: str | None = None):
        self.directory = Path(directory)
        self.command = command
        self.config_hash = config_hash
        self.started_at = datetime.now(timezone.utc)
        self.files: list[ManifestEntry] = []
        self.directory.mkdir(parents=True, exist_ok=True)

    def record(self, path: Path) -> Path:
        """Add an already written file; a path is recorded at most once."""
        path = Path(path)
        relative = path.relative_to(self.directory).as_posix()
        self.files = [entry for entry in self.files if entry.path != relative]
        self.files.append(
            ManifestEntry(path=relative, sha256=io.file_sha256(path), size=path.stat().st_size)
        )
        return path

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        return self.record(io.write_csv(self.directory / name, header, rows))

    def write_json(self, name: str, model: BaseModel) -> Path:
        return self.record(io.write_json(self.directory / name, model))

    def write_text(self, name: str, text: str) -> Path:
        return self.record(io.atomic_write_text(self.directory / name, text))

    def write_snapshot(self, name: str, values: np.ndarray, h: float, t: float) -> Path:
        return self.record(io.write_snapshot(self.directory / name, values, h, t))

    def finish(self) -> RunManifest:
        manifest = RunManifest(
            command=self.command,
            config_hash=self.config_hash,
            code_version=__version__,
            started_at=self.started_at,
            finished_at=datetime.now(timezone.utc),
            files=sorted(self.files, key=lambda entry: entry.path),
        )
        io.write_json(self.directory / MANIFEST_NAME, manifest)
        logger.info(f"Wrote {len(manifest.files)} files and manifest to {self.directory}")
        return manifest


def load_manifest(directory: Path) -> RunManifest:
    path = Path(directory) / MANIFEST_NAME
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
