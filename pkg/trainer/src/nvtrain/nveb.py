"""Writer for the evaluator's embedding-file interchange format (NVEB v1).

Layout: magic "NVEB" | version u32=1 | n u32 | d u32 | n*d little-endian
float32 | CRC-32C of everything before it (u32), plus a JSON sidecar at
``<path>.meta.json`` carrying ids/labels/tags. This module implements the
format from its public description so the trainer stays decoupled from the
evaluator package.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

_POLY = np.uint32(0x82F63B78)


def _make_table() -> np.ndarray:
    crc = np.arange(256, dtype=np.uint32)
    for _ in range(8):
        crc = (crc >> np.uint32(1)) ^ ((crc & np.uint32(1)) * _POLY)
    return crc


_TABLE = _make_table()

try:  # numba makes the byte loop run at native speed; fall back if missing
    import numba

    @numba.njit(cache=True)
    def _update(register: np.uint32, data: np.ndarray, table: np.ndarray) -> np.uint32:
        for i in range(data.size):
            register = (register >> np.uint32(8)) ^ table[
                (register ^ np.uint32(data[i])) & np.uint32(0xFF)
            ]
        return register

except ImportError:  # pragma: no cover - exercised only without numba
    def _update(register, data, table):
        reg = int(register)
        for b in data:
            reg = (reg >> 8) ^ int(table[(reg ^ int(b)) & 0xFF])
        return np.uint32(reg)


def crc32c(data: bytes | np.ndarray) -> int:
    buf = np.frombuffer(data, dtype=np.uint8) if isinstance(data, bytes) else data
    return int(_update(np.uint32(0xFFFFFFFF), buf, _TABLE) ^ np.uint32(0xFFFFFFFF))


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    with os.fdopen(fd, "wb") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_nveb(
    path: str | Path,
    matrix: np.ndarray,
    ids: list[str],
    labels: list[str],
    tags: list[str],
    dataset: str | None = None,
    split_file: str | None = None,
    algorithm: str | None = None,
) -> str:
    """Write matrix + sidecar; returns the file's CRC-32C as hex."""
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    if matrix.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got shape {matrix.shape}")
    n, d = matrix.shape
    if not (len(ids) == len(labels) == len(tags) == n):
        raise ValueError("ids/labels/tags must all have one entry per row")
    if not np.isfinite(matrix).all():
        raise ValueError("matrix contains non-finite values")

    path = Path(path)
    blob = struct.pack("<4sIII", b"NVEB", 1, n, d) + matrix.tobytes()
    crc = crc32c(blob)
    _atomic_write(path, blob + struct.pack("<I", crc))
    meta = {
        "dataset": dataset,
        "split_file": split_file,
        "algorithm": algorithm,
        "ids": list(ids),
        "labels": list(labels),
        "tags": list(tags),
    }
    _atomic_write(
        Path(str(path) + ".meta.json"),
        (json.dumps(meta, ensure_ascii=False) + "\n").encode("utf-8"),
    )
    return f"{crc:08x}"
