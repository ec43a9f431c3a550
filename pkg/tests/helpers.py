"""Shared fixtures-in-code: synthetic embedding sets and naive oracles.

The oracles deliberately avoid the production code paths: full pairwise
similarity matrices, python sorts with explicit tie keys, and per-query
counting loops.
"""

from __future__ import annotations

import numpy as np

from noveval.splits import SplitSpec
from noveval.store import EmbeddingSet


def make_set(matrix, labels, ids=None, tags=None, **meta) -> EmbeddingSet:
    matrix = np.asarray(matrix, dtype=np.float32)
    n = matrix.shape[0]
    if ids is None:
        ids = [f"s{i}" for i in range(n)]
    if tags is None:
        tags = ["test"] * n
    elif isinstance(tags, str):
        tags = [tags] * n
    return EmbeddingSet(matrix, ids, list(labels), tags, **meta)


def cluster_set(classes, per_class, d=None, tags=None) -> EmbeddingSet:
    """Perfectly separated clusters: every class sits on its own axis."""
    d = d or len(classes)
    rows, labels = [], []
    for ci, c in enumerate(classes):
        for _ in range(per_class):
            v = np.zeros(d, dtype=np.float32)
            v[ci] = 1.0
            rows.append(v)
            labels.append(c)
    return make_set(np.stack(rows), labels, tags=tags)


def random_set(n, d, n_classes, seed, tags=None) -> EmbeddingSet:
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((n, d)).astype(np.float32)
    labels = [f"c{rng.integers(n_classes)}" for _ in range(n)]
    return make_set(matrix, labels, tags=tags)


def sphere_set(n_per_class, n_classes, d, seed) -> EmbeddingSet:
    """Labels assigned independently of position: uniform on the sphere."""
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((n_per_class * n_classes, d)).astype(np.float32)
    labels = [f"c{i % n_classes}" for i in range(n_per_class * n_classes)]
    return make_set(matrix, labels)


def split_over(labels, base_classes) -> SplitSpec:
    classes = set(labels)
    base = frozenset(base_classes)
    return SplitSpec("synthetic", "random", base, frozenset(classes) - base, seed=0)


# --- oracles -------------------------------------------------------------------


def oracle_normalize(matrix: np.ndarray) -> np.ndarray:
    m = matrix.astype(np.float64)
    return (m / np.linalg.norm(m, axis=1, keepdims=True)).astype(np.float32)


def oracle_rank(query_vec, corpus_mat, exclude: int | None = None) -> list[int]:
    """Full ranking by descending dot product, ties by ascending index."""
    scores = corpus_mat.astype(np.float64) @ query_vec.astype(np.float64)
    order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
    if exclude is not None:
        order = [j for j in order if j != exclude]
    return order


def oracle_evaluate(test_set: EmbeddingSet, split: SplitSpec):
    """Naive R-Precision evaluation: full matrix, python sorts, direct counts.

    Returns (base_pct, novel_pct, per_class_pct) with classes of a single
    sample skipped.
    """
    normalized = oracle_normalize(test_set.matrix)
    labels = list(test_set.labels)
    counts = {c: labels.count(c) for c in set(labels)}
    per_class_sum: dict[str, float] = {}
    side_scores = {"base": [], "novel": []}
    for q in range(test_set.n):
        c = labels[q]
        r = counts[c] - 1
        if r == 0:
            continue
        order = oracle_rank(normalized[q], normalized, exclude=q)
        hits = sum(1 for j in order[:r] if labels[j] == c)
        rp = hits / r
        per_class_sum[c] = per_class_sum.get(c, 0.0) + rp
        side_scores[split.side_of(c)].append(rp)

    def mean_pct(values):
        return 100.0 * sum(values) / len(values) if values else None

    per_class = {
        c: 100.0 * s / counts[c] for c, s in sorted(per_class_sum.items())
    }
    return mean_pct(side_scores["base"]), mean_pct(side_scores["novel"]), per_class


def crc32c_reference(data: bytes) -> int:
    """Independent table-driven CRC-32C, built from the polynomial here."""
    table = []
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ 0x82F63B78 if crc & 1 else crc >> 1
        table.append(crc)
    crc = 0xFFFFFFFF
    for b in data:
        crc = (crc >> 8) ^ table[(crc ^ b) & 0xFF]
    return crc ^ 0xFFFFFFFF
