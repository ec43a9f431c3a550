"""Class-disjoint label-space partitions and sample routing.

A taxonomy declares an ordered class list (optionally grouped into
superclasses); a split assigns every class to the base side (labels visible
during training) or the novel side (held out). Random and stratified splits
are pure functions of (taxonomy order, n_base, seed): shuffling is
Fisher-Yates over the declared class order, driven by numpy's PCG64, so the
same inputs reproduce the same split on any platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    FormatError,
    InvalidArgumentError,
    LabelMismatchError,
    NotFoundError,
)

SPLIT_METHODS = ("random", "stratified_random", "semantic", "builtin")
BUILTIN_DATASETS = ("cifar10", "cifar100", "imagenet100")
BUILTIN_KINDS = ("random", "semantic")
SAMPLE_TAGS = ("train", "test")


@dataclass(frozen=True)
class ClassTaxonomy:
    """Ordered class names plus an optional class -> superclass map."""

    dataset_id: str
    classes: tuple[str, ...]
    groups: Mapping[str, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if any(not c for c in self.classes):
            raise InvalidArgumentError("class names must be non-empty")
        if len(set(self.classes)) != len(self.classes):
            dupes = sorted({c for c in self.classes if self.classes.count(c) > 1})
            raise InvalidArgumentError(f"duplicate class names: {dupes}")
        if self.groups is not None:
            groups = dict(self.groups)
            missing = [c for c in self.classes if c not in groups]
            if missing:
                raise InvalidArgumentError(
                    f"groups map must cover every class; missing: {missing}"
                )
            extra = [c for c in groups if c not in self.classes]
            if extra:
                raise InvalidArgumentError(
                    f"groups map names unknown classes: {sorted(extra)}"
                )
            object.__setattr__(self, "groups", groups)

    def superclasses(self) -> tuple[str, ...]:
        """Superclass names in order of first appearance along `classes`."""
        if self.groups is None:
            return ()
        seen: dict[str, None] = {}
        for c in self.classes:
            seen.setdefault(self.groups[c], None)
        return tuple(seen)

    def group_members(self) -> dict[str, tuple[str, ...]]:
        """Superclass -> member classes, both in declared order."""
        if self.groups is None:
            return {}
        members: dict[str, list[str]] = {g: [] for g in self.superclasses()}
        for c in self.classes:
            members[self.groups[c]].append(c)
        return {g: tuple(v) for g, v in members.items()}


@dataclass(frozen=True)
class SplitSpec:
    """A base/novel partition of a dataset's label space."""

    dataset_id: str
    method: str
    base: frozenset[str]
    novel: frozenset[str]
    seed: int | None = None
    kind: str | None = None  # builtin variant ("random" | "semantic")

    def __post_init__(self):
        object.__setattr__(self, "base", frozenset(self.base))
        object.__setattr__(self, "novel", frozenset(self.novel))
        if self.method not in SPLIT_METHODS:
            raise InvalidArgumentError(
                f"unknown split method '{self.method}'; expected one of {SPLIT_METHODS}"
            )
        if not self.base or not self.novel:
            raise InvalidArgumentError("both base and novel must be non-empty")
        overlap = self.base & self.novel
        if overlap:
            raise InvalidArgumentError(
                f"base and novel overlap: {sorted(overlap)}"
            )

    @property
    def classes(self) -> frozenset[str]:
        return self.base | self.novel

    def side_of(self, label: str) -> str:
        if label in self.base:
            return "base"
        if label in self.novel:
            return "novel"
        raise LabelMismatchError(
            f"label '{label}' is not covered by the {self.dataset_id} split"
        )

    def descriptor(self) -> str:
        """Short stable identity used in report rows/columns."""
        if self.method == "builtin":
            return f"builtin-{self.kind}"
        if self.seed is not None:
            return f"{self.method}-seed{self.seed}"
        return self.method

    def validate_against(self, taxonomy: ClassTaxonomy) -> None:
        """Check exhaustive-partition (and superclass purity for semantic)."""
        declared = set(taxonomy.classes)
        if self.classes != declared:
            missing = sorted(declared - self.classes)
            extra = sorted(self.classes - declared)
            raise InvalidArgumentError(
                f"split does not partition the taxonomy exactly "
                f"(missing={missing}, extra={extra})"
            )
        if self.method == "semantic" and taxonomy.groups is not None:
            for g, members in taxonomy.group_members().items():
                sides = {"base" if c in self.base else "novel" for c in members}
                if len(sides) > 1:
                    raise InvalidArgumentError(
                        f"semantic split divides superclass '{g}'"
                    )


@dataclass
class SamplePartition:
    """The four sample quadrants induced by a split and train/test tags."""

    base_train: list[tuple[str, str]] = field(default_factory=list)
    novel_train: list[tuple[str, str]] = field(default_factory=list)
    base_test: list[tuple[str, str]] = field(default_factory=list)
    novel_test: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return (
            len(self.base_train)
            + len(self.novel_train)
            + len(self.base_test)
            + len(self.novel_test)
        )


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise InvalidArgumentError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def _check_n_base(n_base: int, n_classes: int) -> int:
    if not isinstance(n_base, (int, np.integer)) or isinstance(n_base, bool):
        raise InvalidArgumentError(f"n_base must be an integer, got {n_base!r}")
    if not 0 < n_base < n_classes:
        raise InvalidArgumentError(
            f"n_base must satisfy 0 < n_base < {n_classes}, got {n_base}"
        )
    return int(n_base)


def random_split(taxonomy: ClassTaxonomy, n_base: int, seed: int) -> SplitSpec:
    """Pick `n_base` base classes uniformly at random (seeded, deterministic)."""
    n_base = _check_n_base(n_base, len(taxonomy.classes))
    rng = np.random.default_rng(_check_seed(seed))
    perm = rng.permutation(len(taxonomy.classes))
    base = frozenset(taxonomy.classes[i] for i in perm[:n_base])
    novel = frozenset(taxonomy.classes) - base
    return SplitSpec(taxonomy.dataset_id, "random", base, novel, seed=int(seed))


def stratified_random_split(
    taxonomy: ClassTaxonomy, n_base: int, seed: int
) -> SplitSpec:
    """Random split with per-superclass quotas proportional to group size.

    Each group g of size m_g contributes floor(n_base*m_g/total) base classes;
    the remainder is handed out (+1 each) to groups drawn in seeded random
    order, skipping groups already at capacity.
    """
    if taxonomy.groups is None:
        raise InvalidArgumentError(
            "stratified_random_split requires a taxonomy with superclass groups"
        )
    n_base = _check_n_base(n_base, len(taxonomy.classes))
    rng = np.random.default_rng(_check_seed(seed))
    members = taxonomy.group_members()
    total = len(taxonomy.classes)

    quotas = {g: (n_base * len(m)) // total for g, m in members.items()}
    remainder = n_base - sum(quotas.values())
    group_names = list(members)
    for i in rng.permutation(len(group_names)):
        if remainder == 0:
            break
        g = group_names[i]
        if quotas[g] < len(members[g]):
            quotas[g] += 1
            remainder -= 1
    if remainder:
        raise InvalidArgumentError(
            f"cannot allocate {n_base} base classes across groups "
            f"with quotas differing by at most one"
        )

    base: set[str] = set()
    for g, m in members.items():
        perm = rng.permutation(len(m))
        base.update(m[i] for i in perm[: quotas[g]])
    novel = frozenset(taxonomy.classes) - base
    return SplitSpec(
        taxonomy.dataset_id, "stratified_random", frozenset(base), novel, seed=int(seed)
    )


def semantic_split(taxonomy: ClassTaxonomy, base_groups: Iterable[str]) -> SplitSpec:
    """Assign whole superclasses to the base side; the rest become novel."""
    if taxonomy.groups is None:
        raise InvalidArgumentError(
            "semantic_split requires a taxonomy with superclass groups"
        )
    wanted = set(base_groups)
    known = set(taxonomy.superclasses())
    unknown = sorted(wanted - known)
    if unknown:
        raise InvalidArgumentError(
            f"unknown superclass names: {unknown}; available: {sorted(known)}"
        )
    if not wanted:
        raise InvalidArgumentError("base_groups must not be empty")
    if wanted == known:
        raise InvalidArgumentError(
            "base_groups must be a strict subset of the superclasses"
        )
    base = frozenset(c for c in taxonomy.classes if taxonomy.groups[c] in wanted)
    novel = frozenset(taxonomy.classes) - base
    return SplitSpec(taxonomy.dataset_id, "semantic", base, novel)


def _load_data_json(name: str) -> dict:
    ref = resources.files("noveval._data").joinpath(name)
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def builtin_taxonomy(dataset_id: str) -> ClassTaxonomy:
    """The shipped taxonomy for one of the builtin datasets."""
    if dataset_id not in BUILTIN_DATASETS:
        raise NotFoundError(
            f"no builtin taxonomy for '{dataset_id}'; available: {BUILTIN_DATASETS}"
        )
    return taxonomy_from_dict(_load_data_json(f"taxonomy_{dataset_id}.json"))


def builtin_split(dataset_id: str, kind: str) -> SplitSpec:
    """One of the six shipped base/novel partitions (fixed once and for all)."""
    if dataset_id not in BUILTIN_DATASETS or kind not in BUILTIN_KINDS:
        combos = ", ".join(f"{d}/{k}" for d in BUILTIN_DATASETS for k in BUILTIN_KINDS)
        raise NotFoundError(
            f"no builtin split '{dataset_id}/{kind}'; available: {combos}"
        )
    return split_from_dict(_load_data_json(f"split_{dataset_id}_{kind}.json"))


def partition_samples(
    samples: Iterable[tuple[str, str, str]], split: SplitSpec
) -> SamplePartition:
    """Route (id, label, tag) samples into the four quadrants."""
    part = SamplePartition()
    quadrant = {
        ("base", "train"): part.base_train,
        ("novel", "train"): part.novel_train,
        ("base", "test"): part.base_test,
        ("novel", "test"): part.novel_test,
    }
    for sid, label, tag in samples:
        if tag not in SAMPLE_TAGS:
            raise InvalidArgumentError(
                f"sample '{sid}' has tag '{tag}'; expected one of {SAMPLE_TAGS}"
            )
        quadrant[(split.side_of(label), tag)].append((sid, label))
    return part


# --- serialization -----------------------------------------------------------


def taxonomy_to_dict(taxonomy: ClassTaxonomy) -> dict:
    doc: dict = {"dataset": taxonomy.dataset_id, "classes": list(taxonomy.classes)}
    if taxonomy.groups is not None:
        doc["groups"] = {c: taxonomy.groups[c] for c in taxonomy.classes}
    return doc


def taxonomy_from_dict(doc: Mapping) -> ClassTaxonomy:
    try:
        return ClassTaxonomy(
            dataset_id=doc["dataset"],
            classes=tuple(doc["classes"]),
            groups=doc.get("groups"),
        )
    except KeyError as exc:
        raise FormatError(f"taxonomy document is missing field {exc}") from exc


def read_taxonomy(path: str | Path) -> ClassTaxonomy:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    return taxonomy_from_dict(doc)


def split_to_dict(split: SplitSpec) -> dict:
    """Fixed field order; class lists sorted, so the output is byte-stable."""
    doc: dict = {"dataset": split.dataset_id, "method": split.method}
    if split.kind is not None:
        doc["kind"] = split.kind
    if split.seed is not None:
        doc["seed"] = split.seed
    doc["base"] = sorted(split.base)
    doc["novel"] = sorted(split.novel)
    return doc


def split_from_dict(doc: Mapping) -> SplitSpec:
    try:
        return SplitSpec(
            dataset_id=doc["dataset"],
            method=doc["method"],
            base=frozenset(doc["base"]),
            novel=frozenset(doc["novel"]),
            seed=doc.get("seed"),
            kind=doc.get("kind"),
        )
    except KeyError as exc:
        raise FormatError(f"split document is missing field {exc}") from exc


def split_to_json_bytes(split: SplitSpec) -> bytes:
    return (json.dumps(split_to_dict(split), indent=2, ensure_ascii=False) + "\n").encode(
        "utf-8"
    )


def write_split(split: SplitSpec, path: str | Path) -> None:
    Path(path).write_bytes(split_to_json_bytes(split))


def read_split(path: str | Path) -> SplitSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    return split_from_dict(doc)
