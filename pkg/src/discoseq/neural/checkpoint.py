"""Single-file model checkpoints.

Layout: an 8-byte magic, a little-endian uint64 header length, a JSON
header (format version, model config, tensor manifest), then the raw
tensor payloads concatenated in manifest order as little-endian
float64.  Round-trips are bitwise.
"""

import json
import struct
from dataclasses import asdict
from math import prod

import numpy as np

from .model import ModelConfig, Parameters

MAGIC = b"DSEQCKP1"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path: str, params: Parameters, config: ModelConfig) -> None:
    names = sorted(params)
    header = {
        "version": 1,
        "config": asdict(config),
        "tensors": [{"name": name, "shape": list(params[name].shape),
                     "dtype": "<f8"} for name in names],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        for name in names:
            handle.write(np.ascontiguousarray(params[name], dtype="<f8").tobytes())


def load_checkpoint(path: str) -> tuple[Parameters, ModelConfig]:
    with open(path, "rb") as handle:
        if handle.read(len(MAGIC)) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        length_bytes = handle.read(8)
        if len(length_bytes) != 8:
            raise CheckpointError(f"{path}: truncated header length")
        (header_length,) = struct.unpack("<Q", length_bytes)
        try:
            header = json.loads(handle.read(header_length))
        except ValueError as err:
            raise CheckpointError(f"{path}: bad header: {err}") from None
        if header.get("version") != 1:
            raise CheckpointError(f"{path}: unsupported version {header.get('version')!r}")
        try:
            config = ModelConfig(**header["config"])
        except (KeyError, TypeError, ValueError) as err:
            raise CheckpointError(f"{path}: bad config: {err}") from None
        params: Parameters = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            if entry["dtype"] != "<f8":
                raise CheckpointError(f"{path}: unsupported dtype {entry['dtype']!r}")
            payload = handle.read(prod(shape) * 8)
            if len(payload) != prod(shape) * 8:
                raise CheckpointError(f"{path}: truncated tensor {entry['name']!r}")
            params[entry["name"]] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
        if handle.read(1):
            raise CheckpointError(f"{path}: trailing data after tensors")
    return params, config
