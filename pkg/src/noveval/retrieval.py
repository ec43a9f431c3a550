"""Exact cosine-similarity ranking over a test corpus.

Queries and corpus rows are unit-normalized float32; scores are accumulated
in float64. The corpus is scanned exhaustively (no index, no approximation)
in fixed-size query blocks, so results are bitwise independent of the worker
count. Ties are broken by ascending corpus row index, which makes every
ranking fully deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmbeddingValidationError, InvalidArgumentError
from .store import EmbeddingSet

NORM_EPSILON = 1e-12
QUERY_BLOCK = 512


@dataclass
class RetrievalResult:
    """Ranked neighbors for one query, best first."""

    query_id: str
    ranked_ids: list[str]
    scores: np.ndarray


def resolve_workers(workers: int) -> int:
    if workers < 0:
        raise InvalidArgumentError(f"workers must be >= 0, got {workers}")
    if workers == 0:
        return os.cpu_count() or 1
    return workers


def normalize_rows(eset: EmbeddingSet) -> EmbeddingSet:
    """Unit-normalize every row; afterwards dot product == cosine similarity."""
    mat = eset.matrix.astype(np.float64)
    norms = np.linalg.norm(mat, axis=1)
    bad = np.flatnonzero(norms <= NORM_EPSILON)
    if bad.size:
        raise EmbeddingValidationError(
            f"row {int(bad[0])} has near-zero norm ({norms[bad[0]]:.3e}); "
            f"cannot normalize"
        )
    out = (mat / norms[:, None]).astype(np.float32) if eset.n else eset.matrix
    return EmbeddingSet(
        matrix=out,
        ids=eset.ids,
        labels=eset.labels,
        tags=eset.tags,
        dataset_id=eset.dataset_id,
        split_file=eset.split_file,
        algorithm=eset.algorithm,
    )


def _topk_row(scores: np.ndarray, k: int) -> np.ndarray:
    """Exact top-k indices: score descending, equal scores by ascending index."""
    n = scores.shape[0]
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    if k >= n:
        return np.argsort(-scores, kind="stable")[:k]
    part = np.argpartition(-scores, k - 1)
    threshold = scores[part[k - 1]]
    cand = np.flatnonzero(scores >= threshold)
    order = np.argsort(-scores[cand], kind="stable")
    return cand[order[:k]]


def rank_topk(
    queries_mat: np.ndarray,
    corpus_mat: np.ndarray,
    cutoffs: np.ndarray,
    self_indices: np.ndarray | None = None,
    workers: int = 1,
    want_scores: bool = True,
) -> tuple[list[np.ndarray], list[np.ndarray] | None]:
    """Exact top-k corpus indices (and optionally scores) for every query.

    `self_indices[i] >= 0` masks that corpus row out of query i's ranking.
    Blocking is fixed (QUERY_BLOCK) so output does not depend on `workers`.
    """
    nq = queries_mat.shape[0]
    corpus64 = corpus_mat.astype(np.float64)
    indices: list[list[np.ndarray]] = []
    scores_out: list[list[np.ndarray]] = []

    def run_block(start: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
        end = min(start + QUERY_BLOCK, nq)
        block = queries_mat[start:end].astype(np.float64) @ corpus64.T
        idx_list, sc_list = [], []
        for i in range(end - start):
            row = block[i]
            if self_indices is not None and self_indices[start + i] >= 0:
                row[self_indices[start + i]] = -np.inf
            top = _topk_row(row, int(cutoffs[start + i]))
            idx_list.append(top)
            if want_scores:
                sc_list.append(row[top])
        return idx_list, sc_list

    starts = range(0, nq, QUERY_BLOCK)
    workers = resolve_workers(workers)
    if workers <= 1 or nq <= QUERY_BLOCK:
        results = [run_block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_block, starts))
    for idx_list, sc_list in results:
        indices.append(idx_list)
        scores_out.append(sc_list)

    flat_idx = [arr for blk in indices for arr in blk]
    flat_scores = [arr for blk in scores_out for arr in blk] if want_scores else None
    return flat_idx, flat_scores


def top_r_neighbors(
    queries: EmbeddingSet,
    corpus: EmbeddingSet,
    cutoffs: int | Sequence[int],
    exclude_self: bool = True,
    workers: int = 1,
) -> list[RetrievalResult]:
    """Exact top-cutoff neighbors of every query row within the corpus.

    Both sets must already be row-normalized. With `exclude_self`, a corpus
    row sharing the query's id is removed from that query's candidates.
    """
    if queries.d != corpus.d:
        raise InvalidArgumentError(
            f"dimension mismatch: queries d={queries.d}, corpus d={corpus.d}"
        )
    _check_normalized(queries, "queries")
    _check_normalized(corpus, "corpus")

    nq = queries.n
    if isinstance(cutoffs, (int, np.integer)):
        cut = np.full(nq, int(cutoffs), dtype=np.int64)
    else:
        cut = np.asarray(list(cutoffs), dtype=np.int64)
        if cut.shape != (nq,):
            raise InvalidArgumentError(
                f"cutoffs must have one entry per query ({nq}), got {cut.shape}"
            )
    if nq and cut.min() < 0:
        raise InvalidArgumentError("cutoffs must be non-negative")

    self_idx = None
    if exclude_self:
        corpus_pos = {cid: j for j, cid in enumerate(corpus.ids)}
        self_idx = np.array(
            [corpus_pos.get(qid, -1) for qid in queries.ids], dtype=np.int64
        )
    for i in range(nq):
        limit = corpus.n - (1 if self_idx is not None and self_idx[i] >= 0 else 0)
        if cut[i] > limit:
            raise InvalidArgumentError(
                f"cutoff {int(cut[i])} for query '{queries.ids[i]}' exceeds the "
                f"{limit} eligible corpus rows"
            )

    idx, scores = rank_topk(
        queries.matrix, corpus.matrix, cut, self_idx, workers=workers
    )
    assert scores is not None
    return [
        RetrievalResult(
            query_id=queries.ids[i],
            ranked_ids=[corpus.ids[j] for j in idx[i]],
            scores=scores[i],
        )
        for i in range(nq)
    ]


def _check_normalized(eset: EmbeddingSet, name: str) -> None:
    if eset.n == 0:
        return
    norms = np.linalg.norm(eset.matrix.astype(np.float64), axis=1)
    off = np.abs(norms - 1.0)
    if off.max() > 1e-4:
        row = int(off.argmax())
        raise InvalidArgumentError(
            f"{name} rows must be unit-normalized (row {row} has norm "
            f"{norms[row]:.6f}); call normalize_rows first"
        )
