"""R-Precision scoring and base/novel report cells.

Every test image is a query against the rest of the test set. The cut-off
rank for a query equals the number of other test images of its class
(R = N_c - 1, self excluded), at which rank precision equals recall. Cells
are means over queries, scaled to percent; per-class means are kept for
analysis. Classes with a single test sample have no defined metric and are
skipped with a warning.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DatasetMismatchError,
    FormatError,
    InvalidArgumentError,
    UndefinedMetricError,
)
from .retrieval import normalize_rows, rank_topk
from .splits import SplitSpec
from .store import EmbeddingSet


@dataclass(frozen=True)
class ClassStats:
    r_precision: float  # percent
    queries: int
    class_size: int


@dataclass
class MetricsReport:
    """One table cell pair (base/novel) plus its per-class breakdown."""

    dataset_id: str | None
    split: str
    algorithm: str
    base_r_precision: float | None
    novel_r_precision: float | None
    per_class: dict[str, ClassStats]
    warnings: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def r_precision_query(
    ranked_ids: Sequence[str], relevant: Iterable[str], r: int
) -> float:
    """Fraction of the top-R ranked ids that are relevant (R = |relevant|)."""
    relevant = set(relevant)
    if r == 0:
        raise UndefinedMetricError(
            "R-Precision is undefined for a query with no relevant items"
        )
    if r != len(relevant):
        raise InvalidArgumentError(
            f"R ({r}) must equal the number of relevant items ({len(relevant)})"
        )
    if len(ranked_ids) < r:
        raise InvalidArgumentError(
            f"ranked list has {len(ranked_ids)} entries, needs at least R={r}"
        )
    hits = sum(1 for x in ranked_ids[:r] if x in relevant)
    return hits / r


def recall_at_k(ranked_ids: Sequence[str], relevant: Iterable[str], k: int) -> float:
    """Fraction of all relevant items found in the top-k."""
    relevant = set(relevant)
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if not relevant:
        raise UndefinedMetricError("recall is undefined with no relevant items")
    hits = sum(1 for x in ranked_ids[:k] if x in relevant)
    return hits / len(relevant)


def evaluate_split(
    test_set: EmbeddingSet,
    split: SplitSpec,
    algorithm: str | None = None,
    workers: int = 1,
) -> MetricsReport:
    """Mean R-Precision over base and novel queries of a test embedding set."""
    if any(t != "test" for t in test_set.tags):
        raise InvalidArgumentError(
            "evaluate_split expects only test-tagged rows; filter train rows first"
        )
    if test_set.n == 0:
        raise InvalidArgumentError("cannot evaluate an empty test set")
    if test_set.dataset_id and test_set.dataset_id != split.dataset_id:
        raise DatasetMismatchError(
            f"embeddings are for '{test_set.dataset_id}' but the split is for "
            f"'{split.dataset_id}'"
        )

    classes = sorted(set(test_set.labels))
    side = {c: split.side_of(c) for c in classes}

    labels = np.array(test_set.labels)
    counts = {c: int((labels == c).sum()) for c in classes}
    warnings = [
        f"class '{c}' has a single test sample; skipped (R undefined)"
        for c in classes
        if counts[c] == 1
    ]

    normalized = normalize_rows(test_set)
    code_of = {c: i for i, c in enumerate(classes)}
    codes = np.array([code_of[c] for c in test_set.labels], dtype=np.int64)

    query_rows = np.flatnonzero(np.array([counts[c] > 1 for c in test_set.labels]))
    cutoffs = np.array([counts[test_set.labels[i]] - 1 for i in query_rows])

    idx_lists, _ = rank_topk(
        normalized.matrix[query_rows],
        normalized.matrix,
        cutoffs,
        self_indices=query_rows,
        workers=workers,
        want_scores=False,
    )

    rp_sum = {c: 0.0 for c in classes}
    for pos, qrow in enumerate(query_rows):
        qcode = codes[qrow]
        hits = int((codes[idx_lists[pos]] == qcode).sum())
        rp_sum[test_set.labels[qrow]] += hits / int(cutoffs[pos])

    per_class: dict[str, ClassStats] = {}
    side_sum = {"base": 0.0, "novel": 0.0}
    side_n = {"base": 0, "novel": 0}
    for c in classes:
        if counts[c] == 1:
            continue
        per_class[c] = ClassStats(
            r_precision=100.0 * rp_sum[c] / counts[c],
            queries=counts[c],
            class_size=counts[c],
        )
        side_sum[side[c]] += rp_sum[c]
        side_n[side[c]] += counts[c]

    def cell(s: str) -> float | None:
        return 100.0 * side_sum[s] / side_n[s] if side_n[s] else None

    return MetricsReport(
        dataset_id=split.dataset_id,
        split=split.descriptor(),
        algorithm=algorithm or test_set.algorithm or "unknown",
        base_r_precision=cell("base"),
        novel_r_precision=cell("novel"),
        per_class=per_class,
        warnings=warnings,
        metadata={
            "self_excluded": True,
            "cutoff_rule": "class-size-minus-one",
            "aggregation": "mean-over-queries",
            "scale": "percent",
        },
    )


def format_cell(value: float | None) -> str:
    """Three decimals, rounding halves up (65.1468 -> '65.147')."""
    if value is None:
        return "-"
    return str(Decimal(repr(value)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def render_report(reports: Sequence[MetricsReport], fmt: str) -> str:
    """One row per algorithm, Base/Novel column pair per split descriptor."""
    if not reports:
        raise InvalidArgumentError("no reports to render")
    if fmt not in ("csv", "markdown"):
        raise InvalidArgumentError(f"unknown format '{fmt}'; expected csv or markdown")
    datasets = {r.dataset_id for r in reports}
    if len(datasets) > 1:
        raise DatasetMismatchError(
            f"reports mix datasets: {sorted(str(d) for d in datasets)}"
        )

    algos: list[str] = []
    splits: list[str] = []
    cells: dict[tuple[str, str], tuple[float | None, float | None]] = {}
    for r in reports:
        if r.algorithm not in algos:
            algos.append(r.algorithm)
        if r.split not in splits:
            splits.append(r.split)
        cells[(r.algorithm, r.split)] = (r.base_r_precision, r.novel_r_precision)

    header = ["algorithm"]
    for s in splits:
        header += [f"{s} base", f"{s} novel"]
    rows = []
    for a in algos:
        row = [a]
        for s in splits:
            base, novel = cells.get((a, s), (None, None))
            row += [format_cell(base), format_cell(novel)]
        rows.append(row)

    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()

    md_header = ["Algorithm"]
    for s in splits:
        md_header += [f"{s} Base", f"{s} Novel"]
    lines = [
        "| " + " | ".join(md_header) + " |",
        "|" + "|".join([" --- "] * len(md_header)) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


# --- report (de)serialization -------------------------------------------------


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "dataset": report.dataset_id,
        "split": report.split,
        "algorithm": report.algorithm,
        "base_r_precision": report.base_r_precision,
        "novel_r_precision": report.novel_r_precision,
        "per_class": {
            c: {
                "r_precision": st.r_precision,
                "queries": st.queries,
                "class_size": st.class_size,
            }
            for c, st in sorted(report.per_class.items())
        },
        "warnings": list(report.warnings),
        "metadata": dict(report.metadata),
    }


def report_from_dict(doc: Mapping) -> MetricsReport:
    try:
        per_class = {
            c: ClassStats(
                r_precision=v["r_precision"],
                queries=v["queries"],
                class_size=v["class_size"],
            )
            for c, v in doc["per_class"].items()
        }
        return MetricsReport(
            dataset_id=doc["dataset"],
            split=doc["split"],
            algorithm=doc["algorithm"],
            base_r_precision=doc["base_r_precision"],
            novel_r_precision=doc["novel_r_precision"],
            per_class=per_class,
            warnings=list(doc.get("warnings", [])),
            metadata=dict(doc.get("metadata", {})),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed report document: {exc}") from exc


def report_to_json_bytes(report: MetricsReport) -> bytes:
    return (
        json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"
    ).encode("utf-8")


def write_report(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_bytes(report_to_json_bytes(report))


def read_report(path: str | Path) -> MetricsReport:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    return report_from_dict(doc)
