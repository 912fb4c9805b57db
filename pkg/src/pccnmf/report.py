"""Serializable run records shared by the CLI and the experiment drivers."""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

__version__ = "0.1.0"

SCHEMA_VERSION = 1


def timestamp() -> str:
    """ISO-8601 UTC timestamp; pinned by the PCCNMF_TIMESTAMP env var for reproducible output files."""
    pinned = os.environ.get("PCCNMF_TIMESTAMP")
    if pinned:
        return pinned
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def matrix_digest(m) -> str:
    """Content hash of a DataMatrix (shape + entries)."""
    h = hashlib.sha256()
    h.update(repr(m.values.shape).encode())
    h.update(m.values.tobytes())
    return h.hexdigest()[:16]


@dataclass
class RunReport:
    """Record of one scan or experiment, ready for JSON serialization."""

    command: str
    parameters: dict
    seeds: list
    input_digests: dict
    outputs: dict
    started: str = field(default_factory=timestamp)
    finished: str = field(default_factory=timestamp)
    schema: int = SCHEMA_VERSION
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "version": self.version,
            "command": self.command,
            "parameters": self.parameters,
            "seeds": list(self.seeds),
            "input_digests": self.input_digests,
            "timestamps": {"started": self.started, "finished": self.finished},
            "outputs": self.outputs,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
