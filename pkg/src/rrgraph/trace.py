from __future__ import annotations

import os
import time
import uuid
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import orjson
from jsonschema import ValidationError, validate
from pydantic import BaseModel, Field

from rrgraph import __version__
from rrgraph.errors import ManifestError

MANIFEST_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["run_id", "command", "argv", "params", "master_seed", "version", "outputs"],
    "properties": {
        "run_id": {"type": "string"},
        "command": {"type": "string"},
        "argv": {"type": "array", "items": {"type": "string"}},
        "params": {"type": "object"},
        "master_seed": {"type": ["integer", "null"], "minimum": 0},
        "version": {"type": "string"},
        "started_at": {"type": "number"},
        "finished_at": {"type": ["number", "null"]},
        "outputs": {"type": "array", "items": {"type": "string"}},
    },
}


def new_run_id() -> str:
    return f"run_{int(time.time())}_{uuid.uuid4().hex[:8]}"


class RunManifest(BaseModel):
    """Everything needed to rerun a command and get byte-identical outputs."""

    run_id: str = Field(default_factory=new_run_id)
    command: str
    argv: List[str]
    params: Dict[str, Any] = Field(default_factory=dict)
    master_seed: Optional[int] = None
    version: str = __version__
    started_at: float = Field(default_factory=time.time)
    finished_at: Optional[float] = None
    outputs: List[str] = Field(default_factory=list)


def write_manifest(manifest: RunManifest, path: str) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(orjson.dumps(manifest.model_dump(), option=orjson.OPT_INDENT_2))
    return path


def load_manifest(path: str) -> RunManifest:
    with open(path, "rb") as f:
        data = orjson.loads(f.read())
    try:
        validate(instance=data, schema=MANIFEST_SCHEMA)
    except ValidationError as e:
        raise ManifestError(f"Invalid manifest {path}: {e.message}") from e
    return RunManifest(**data)


class TraceWriter:
    def __init__(self, export_dir: str):
        Path(export_dir).mkdir(parents=True, exist_ok=True)
        self.export_dir = export_dir

    def path_for(self, run_id: str) -> str:
        return os.path.join(self.export_dir, f"{run_id}.jsonl")

    def append(self, run_id: str, event: Dict[str, Any]) -> None:
        p = self.path_for(run_id)
        event["ts"] = time.time()
        with open(p, "ab") as f:
            f.write(orjson.dumps(event, option=orjson.OPT_SERIALIZE_NUMPY))
            f.write(b"\n")


class TraceReader:
    def __init__(self, export_dir: str):
        self.export_dir = export_dir

    def read(self, run_id: str) -> Iterator[Dict[str, Any]]:
        p = os.path.join(self.export_dir, f"{run_id}.jsonl")
        with open(p, "rb") as f:
            for line in f:
                yield orjson.loads(line)
