"""Bit-exact persistence of embedding sets.

Binary layout (all integers little-endian):

    magic "NVEB" | version u32 = 1 | n u32 | d u32
    n*d float32 matrix entries, row-major
    CRC-32C of all preceding bytes, u32

Row ids, class labels and train/test tags travel in a JSON sidecar at
``<path>.meta.json`` so the matrix payload stays a raw float dump that any
producer can emit and verify byte-for-byte.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._crc32c import crc32c, crc32c_combine
from .errors import (
    EmbeddingValidationError,
    FormatError,
    InvalidArgumentError,
    StoreIOError,
)

MAGIC = b"NVEB"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


@dataclass
class EmbeddingSet:
    """An n x d float32 matrix with per-row id, class label and train/test tag."""

    matrix: np.ndarray
    ids: tuple[str, ...]
    labels: tuple[str, ...]
    tags: tuple[str, ...]
    dataset_id: str | None = None
    split_file: str | None = None
    algorithm: str | None = None
    warnings: list[str] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2:
            raise InvalidArgumentError(
                f"matrix must be 2-D, got shape {self.matrix.shape}"
            )
        self.ids = tuple(self.ids)
        self.labels = tuple(self.labels)
        self.tags = tuple(self.tags)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def validate(self) -> None:
        n = self.n
        for name, seq in (("ids", self.ids), ("labels", self.labels), ("tags", self.tags)):
            if len(seq) != n:
                raise InvalidArgumentError(
                    f"{name} has length {len(seq)}, expected {n}"
                )
        if len(set(self.ids)) != n:
            raise InvalidArgumentError("ids must be unique")
        bad = [t for t in set(self.tags) if t not in ("train", "test")]
        if bad:
            raise InvalidArgumentError(f"tags must be 'train' or 'test', got {bad}")
        if n and not np.isfinite(self.matrix).all():
            row = int(np.flatnonzero(~np.isfinite(self.matrix).all(axis=1))[0])
            raise InvalidArgumentError(
                f"matrix contains a non-finite value at row {row}"
            )

    def select(self, mask: np.ndarray) -> "EmbeddingSet":
        """Row subset (boolean mask), preserving metadata."""
        idx = np.flatnonzero(mask)
        return EmbeddingSet(
            matrix=self.matrix[idx],
            ids=tuple(self.ids[i] for i in idx),
            labels=tuple(self.labels[i] for i in idx),
            tags=tuple(self.tags[i] for i in idx),
            dataset_id=self.dataset_id,
            split_file=self.split_file,
            algorithm=self.algorithm,
        )


def sidecar_path(path: str | Path) -> Path:
    return Path(str(path) + ".meta.json")


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_embedding_set(eset: EmbeddingSet, path: str | Path) -> str:
    """Write binary file + sidecar atomically; returns the payload CRC (hex)."""
    eset.validate()
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, eset.n, eset.d)
    body = eset.matrix.astype("<f4", copy=False).tobytes()
    crc = crc32c_combine(crc32c(header), crc32c(body), len(body))
    meta = {
        "dataset": eset.dataset_id,
        "split_file": eset.split_file,
        "algorithm": eset.algorithm,
        "ids": list(eset.ids),
        "labels": list(eset.labels),
        "tags": list(eset.tags),
    }
    try:
        _atomic_write(path, header + body + struct.pack("<I", crc))
        _atomic_write(
            sidecar_path(path),
            (json.dumps(meta, ensure_ascii=False) + "\n").encode("utf-8"),
        )
    except OSError as exc:
        raise StoreIOError(f"failed to write {path}: {exc}") from exc
    return f"{crc:08x}"


def read_embedding_set(path: str | Path) -> EmbeddingSet:
    """Read and fully validate an embedding file (magic, CRC, finiteness)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise StoreIOError(f"failed to read {path}: {exc}") from exc

    if len(raw) < _HEADER.size + 4:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n, d = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")

    expected = _HEADER.size + 4 * n * d + 4
    if len(raw) < expected:
        raise FormatError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    if len(raw) > expected:
        raise FormatError(
            f"{path}: trailing garbage ({len(raw)} bytes, expected {expected})"
        )
    (stored_crc,) = struct.unpack_from("<I", raw, expected - 4)
    actual_crc = crc32c(memoryview(raw)[: expected - 4])
    if stored_crc != actual_crc:
        raise FormatError(
            f"{path}: checksum mismatch (stored {stored_crc:08x}, "
            f"computed {actual_crc:08x})"
        )

    matrix = (
        np.frombuffer(raw, dtype="<f4", count=n * d, offset=_HEADER.size)
        .reshape(n, d)
        .copy()
    )
    if n and not np.isfinite(matrix).all():
        row = int(np.flatnonzero(~np.isfinite(matrix).all(axis=1))[0])
        raise EmbeddingValidationError(
            f"{path}: non-finite embedding value at row {row}"
        )

    meta_path = sidecar_path(path)
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"{meta_path}: missing sidecar: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{meta_path}: not valid JSON: {exc}") from exc

    try:
        ids = tuple(meta["ids"])
        labels = tuple(meta["labels"])
        tags = tuple(meta["tags"])
    except KeyError as exc:
        raise FormatError(f"{meta_path}: missing field {exc}") from exc
    for name, seq in (("ids", ids), ("labels", labels), ("tags", tags)):
        if len(seq) != n:
            raise EmbeddingValidationError(
                f"{meta_path}: {name} has length {len(seq)}, expected {n}"
            )
    if len(set(ids)) != n:
        raise EmbeddingValidationError(f"{meta_path}: ids are not unique")
    bad = [t for t in set(tags) if t not in ("train", "test")]
    if bad:
        raise EmbeddingValidationError(
            f"{meta_path}: tags must be 'train' or 'test', got {bad}"
        )

    return EmbeddingSet(
        matrix=matrix,
        ids=ids,
        labels=labels,
        tags=tags,
        dataset_id=meta.get("dataset"),
        split_file=meta.get("split_file"),
        algorithm=meta.get("algorithm"),
    )
