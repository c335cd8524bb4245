"""
Atomic writers for run artifacts.

Each write goes to a sibling temp file that is then renamed over the target,
so readers never see a half-written manifest, report or checkpoint.
"""

from __future__ import annotations
import json
import os
from pathlib import Path
from typing import Any, Union

from operation.retry import FILE_RETRY_CONFIG, retry_from_config

PathLike = Union[str, Path]


@retry_from_config(FILE_RETRY_CONFIG)
def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: PathLike, payload: Any) -> Path:
    """Pretty JSON in insertion order with a trailing newline."""
    return atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def read_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
