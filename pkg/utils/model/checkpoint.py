"""
Single-file model checkpoints.

Layout (see Checkpoint_README.md):
    8 bytes   magic b"MGRNCKPT"
    4 bytes   header length, little-endian uint32
    header    UTF-8 JSON, keys sorted, compact separators
    blocks    every parameter as little-endian float64, in MgrnParams order
"""

from __future__ import annotations
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from operation.logging.logging_config import get_logger
from utils.artifacts import atomic_write_bytes
from utils.errors import DataError
from utils.model.config import CHECKPOINT_FORMAT_VERSION, CHECKPOINT_MAGIC, ModelConfig
from utils.model.mgrn import MgrnParams

logger = get_logger(__name__)

PathLike = Union[str, Path]
_LENGTH = struct.Struct("<I")
_DTYPE = np.dtype("<f8")


@dataclass
class Checkpoint:
    params: MgrnParams
    model_config: ModelConfig
    graph_names: List[str]
    seed: int
    format_version: int = CHECKPOINT_FORMAT_VERSION


def _header(ckpt: Checkpoint) -> bytes:
    blocks = [{"name": name, "shape": list(shape)}
              for name, shape in MgrnParams.layout(ckpt.model_config, len(ckpt.graph_names))]
    header: Dict[str, Any] = {
        "format_version": ckpt.format_version,
        "model_config": ckpt.model_config.model_dump(),
        "graph_names": list(ckpt.graph_names),
        "seed": int(ckpt.seed),
        "blocks": blocks,
    }
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    header = _header(ckpt)
    parts = [CHECKPOINT_MAGIC, _LENGTH.pack(len(header)), header]
    for name in ckpt.params.names():
        parts.append(np.ascontiguousarray(ckpt.params[name], dtype=_DTYPE).tobytes())
    return b"".join(parts)


def decode_checkpoint(raw: bytes) -> Checkpoint:
    magic_len = len(CHECKPOINT_MAGIC)
    if raw[:magic_len] != CHECKPOINT_MAGIC:
        raise DataError("Not an MGRN checkpoint (bad magic bytes)")
    if len(raw) < magic_len + _LENGTH.size:
        raise DataError("Checkpoint truncated before the header length")
    (header_len,) = _LENGTH.unpack_from(raw, magic_len)
    start = magic_len + _LENGTH.size
    if len(raw) < start + header_len:
        raise DataError("Checkpoint truncated in the header")
    try:
        header = json.loads(raw[start:start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"Corrupt checkpoint header: {e}") from e
    version = header.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise DataError(f"Unsupported checkpoint format version {version}")

    cfg = ModelConfig.from_dict(header["model_config"])
    graph_names = list(header["graph_names"])
    offset = start + header_len
    arrays: Dict[str, np.ndarray] = {}
    for block in header["blocks"]:
        shape = tuple(block["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * _DTYPE.itemsize
        if offset + nbytes > len(raw):
            raise DataError(f"Checkpoint truncated in block '{block['name']}'")
        arrays[block["name"]] = np.frombuffer(raw, dtype=_DTYPE, count=count, offset=offset).reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(raw):
        raise DataError(f"Checkpoint has {len(raw) - offset} trailing bytes")

    params = MgrnParams.from_arrays(cfg, len(graph_names), arrays)
    return Checkpoint(params=params, model_config=cfg, graph_names=graph_names,
                      seed=int(header["seed"]), format_version=version)


def save_checkpoint(path: PathLike, ckpt: Checkpoint) -> Path:
    path = atomic_write_bytes(path, encode_checkpoint(ckpt))
    logger.info(f"Saved checkpoint ({ckpt.params.count()} parameters) to {path}")
    return path


def load_checkpoint(path: PathLike) -> Checkpoint:
    ckpt = decode_checkpoint(Path(path).read_bytes())
    logger.info(f"Loaded checkpoint for graphs {ckpt.graph_names} from {path}")
    return ckpt
