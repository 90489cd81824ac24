"""Versioned binary checkpoint container.

Layout (all integers little-endian uint32 unless noted):
  magic "DRKT" | version | header_len | header JSON (utf-8)
  then per array: name_len | name utf-8 | ndim | dims... | float32 LE data
The header carries architecture hyperparameters and any scalar state.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

MAGIC = b"DRKT"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(
    path: str | os.PathLike, header: dict, arrays: dict[str, np.ndarray]
) -> None:
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(blob)))
        f.write(blob)
        for name, arr in arrays.items():
            nb = name.encode("utf-8")
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path: str | os.PathLike) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a DRKT checkpoint")
        version, hlen = struct.unpack("<II", f.read(8))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(f.read(hlen).decode("utf-8"))
        arrays: dict[str, np.ndarray] = {}
        while True:
            raw = f.read(4)
            if not raw:
                break
            (nlen,) = struct.unpack("<I", raw)
            name = f.read(nlen).decode("utf-8")
            (ndim,) = struct.unpack("<I", f.read(4))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim))
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(f.read(4 * count), dtype="<f4")
            if data.size != count:
                raise CheckpointError(f"{path}: truncated array {name}")
            arrays[name] = data.reshape(shape).astype(np.float64)
    return header, arrays
