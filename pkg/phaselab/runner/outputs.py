"""
Run-directory persistence: CSV tables, attached files and the manifest.

The manifest is written last and atomically; a directory without one is
an incomplete run.
"""
import csv
import hashlib
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from phaselab.errors import ConfigurationError, IncompleteRunError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
HeadlineValue = Union[float, int, bool, str]


class OutputRecord(BaseModel):
    filename: str
    role: str
    sha256: str


class RunManifest(BaseModel):
    """Reproducibility record of a completed run."""
    config_echo: Dict[str, Any]
    code_version: str
    started: str
    finished: str
    outputs: List[OutputRecord] = Field(default_factory=list)
    headline_metrics: Dict[str, HeadlineValue] = Field(default_factory=dict)


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class RunDirectory:
    """One `<name>-<UTC timestamp>` directory and the outputs written to it."""

    def __init__(self, path: Path):
        self.path = path
        self.outputs: List[OutputRecord] = []

    @classmethod
    def create(cls, root: Union[str, Path], name: str) -> "RunDirectory":
        root = Path(root)
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
        path = root / f"{name}-{stamp}"
        suffix = 1
        while path.exists():
            path = root / f"{name}-{stamp}-{suffix}"
            suffix += 1
        path.mkdir(parents=True)
        return cls(path)

    def attach(self, filename: str, role: str) -> Path:
        """Record a file already written into the run directory."""
        target = self.path / filename
        record = OutputRecord(filename=filename, role=role, sha256=file_sha256(target))
        self.outputs = [o for o in self.outputs if o.filename != filename] + [record]
        return target

    def write_csv(self, filename: str, header: Sequence[str], columns: Sequence[Sequence[Any]],
                  role: str) -> Path:
        """
        Write equal-length columns as CSV rows with a header row.

        The first column is the independent variable (time, x, or the
        scanned parameter).
        """
        lengths = {len(c) for c in columns}
        if len(header) != len(columns) or len(lengths) > 1:
            raise ValueError(f"{filename}: header and columns do not line up")
        target = self.path / filename
        with open(target, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in zip(*columns):
                writer.writerow([format_cell(v) for v in row])
        logger.debug(f"Wrote {target} ({lengths.pop() if lengths else 0} rows)")
        return self.attach(filename, role)

    def finalize(self, config_echo: Dict[str, Any], code_version: str, started: str,
                 headline_metrics: Dict[str, HeadlineValue]) -> RunManifest:
        manifest = RunManifest(
            config_echo=config_echo,
            code_version=code_version,
            started=started,
            finished=utc_timestamp(),
            outputs=list(self.outputs),
            headline_metrics=headline_metrics,
        )
        final = self.path / MANIFEST_NAME
        staging = self.path / f".{MANIFEST_NAME}.tmp"
        staging.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
        os.replace(staging, final)
        return manifest


def load_manifest(run_dir: Union[str, Path], verify: bool = True) -> RunManifest:
    """Read a run's manifest; with `verify`, every listed output must match its checksum."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ConfigurationError(f"{run_dir} is not a directory", [f"{run_dir}: no such run directory"])
    path = run_dir / MANIFEST_NAME
    if not path.exists():
        raise IncompleteRunError(
            f"{run_dir} has no manifest",
            [f"{run_dir}: {MANIFEST_NAME} missing; the run did not complete"],
        )
    try:
        manifest = RunManifest.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        raise IncompleteRunError(f"{path} is unreadable", [f"{path}: {e}"]) from e

    if verify:
        problems = []
        for output in manifest.outputs:
            target = run_dir / output.filename
            if not target.exists():
                problems.append(f"{output.filename}: listed in manifest but missing")
            elif file_sha256(target) != output.sha256:
                problems.append(f"{output.filename}: checksum mismatch")
        if problems:
            raise IncompleteRunError(f"{run_dir} failed verification", problems)
    return manifest
