"""Image banks, split routing and the label-read audit.

The trainer consumes the evaluator's split files (JSON with base/novel
class lists). After routing, training code reaches labels only through
``TrainingData``, whose accessors count every read of a novel-side label:
the benchmark's core protocol promise is that this counter stays at zero
for every algorithm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch


@dataclass
class ImageBank:
    """All images of a dataset as uint8 (N, C, H, W) plus row metadata."""

    dataset_id: str
    images: torch.Tensor
    ids: list[str]
    labels: list[str]
    tags: list[str]  # train | test

    def __post_init__(self):
        if self.images.dtype != torch.uint8 or self.images.ndim != 4:
            raise ValueError("images must be a uint8 (N, C, H, W) tensor")
        n = self.images.shape[0]
        if not (len(self.ids) == len(self.labels) == len(self.tags) == n):
            raise ValueError("ids/labels/tags must have one entry per image")

    @property
    def n(self) -> int:
        return self.images.shape[0]


def load_split_doc(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for key in ("dataset", "method", "base", "novel"):
        if key not in doc:
            raise ValueError(f"{path}: split file is missing field '{key}'")
    if set(doc["base"]) & set(doc["novel"]):
        raise ValueError(f"{path}: base and novel overlap")
    return doc


@dataclass
class LabelAudit:
    """Counts label reads through the training-data accessors."""

    base_reads: int = 0
    novel_reads: int = 0


class NovelLabelRead(RuntimeError):
    """Raised (after counting) when training code reads a novel-side label."""


class TrainingData:
    """Split-routed view of a bank: labeled base pool, unlabeled pools,
    and audited label access."""

    def __init__(self, bank: ImageBank, split_doc: dict, audit: LabelAudit | None = None):
        if bank.dataset_id != split_doc["dataset"]:
            raise ValueError(
                f"bank is '{bank.dataset_id}' but split is for '{split_doc['dataset']}'"
            )
        base = set(split_doc["base"])
        novel = set(split_doc["novel"])
        unknown = sorted(set(bank.labels) - base - novel)
        if unknown:
            raise ValueError(f"labels not covered by the split: {unknown}")

        self.bank = bank
        self.audit = audit if audit is not None else LabelAudit()
        self.base_classes = sorted(base)
        self._class_to_idx = {c: i for i, c in enumerate(self.base_classes)}
        self._is_novel = [label in novel for label in bank.labels]

        self.base_train = [
            i for i in range(bank.n)
            if bank.tags[i] == "train" and not self._is_novel[i]
        ]
        self.novel_train = [
            i for i in range(bank.n)
            if bank.tags[i] == "train" and self._is_novel[i]
        ]
        self.all_train = sorted(self.base_train + self.novel_train)
        self.test_rows = [i for i in range(bank.n) if bank.tags[i] == "test"]

    @property
    def n_base_classes(self) -> int:
        return len(self.base_classes)

    def images(self, indices) -> torch.Tensor:
        return self.bank.images[torch.as_tensor(indices, dtype=torch.long)]

    def class_index(self, i: int) -> int:
        """Audited label read; novel-side reads count and then fail."""
        if self._is_novel[i]:
            self.audit.novel_reads += 1
            raise NovelLabelRead(
                f"training code read the label of novel-side sample "
                f"'{self.bank.ids[i]}'"
            )
        self.audit.base_reads += 1
        return self._class_to_idx[self.bank.labels[i]]

    def class_indices(self, indices) -> torch.Tensor:
        return torch.tensor([self.class_index(int(i)) for i in indices], dtype=torch.long)


# --- sources --------------------------------------------------------------------


def synthetic_bank(
    n_classes: int = 4,
    per_class_train: int = 24,
    per_class_test: int = 8,
    size: int = 32,
    seed: int = 0,
    dataset_id: str = "synthetic",
) -> ImageBank:
    """Class-coded blob images: a fixed random pattern per class plus noise."""
    rng = np.random.default_rng(seed)
    prototypes = rng.integers(40, 216, (n_classes, 3, size, size))
    images, ids, labels, tags = [], [], [], []
    for c in range(n_classes):
        name = f"k{c}"
        total = per_class_train + per_class_test
        noise = rng.normal(0, 28, (total, 3, size, size))
        batch = np.clip(prototypes[c] + noise, 0, 255).astype(np.uint8)
        for j in range(total):
            tag = "train" if j < per_class_train else "test"
            images.append(batch[j])
            ids.append(f"{name}-{tag}{j}")
            labels.append(name)
            tags.append(tag)
    return ImageBank(
        dataset_id=dataset_id,
        images=torch.from_numpy(np.stack(images)),
        ids=ids,
        labels=labels,
        tags=tags,
    )


def synthetic_split_doc(bank: ImageBank, n_base: int) -> dict:
    classes = sorted(set(bank.labels))
    if not 0 < n_base < len(classes):
        raise ValueError(f"n_base must lie in (0, {len(classes)})")
    return {
        "dataset": bank.dataset_id,
        "method": "random",
        "seed": 0,
        "base": classes[:n_base],
        "novel": classes[n_base:],
    }


def cifar_bank(dataset_id: str, data_dir: str | Path) -> ImageBank:
    """CIFAR10/CIFAR100 from a local torchvision root (no download)."""
    from torchvision import datasets

    cls = {"cifar10": datasets.CIFAR10, "cifar100": datasets.CIFAR100}.get(dataset_id)
    if cls is None:
        raise ValueError(f"unsupported dataset '{dataset_id}'")
    images, ids, labels, tags = [], [], [], []
    for tag, train in (("train", True), ("test", False)):
        ds = cls(root=str(data_dir), train=train, download=False)
        data = torch.from_numpy(ds.data).permute(0, 3, 1, 2).contiguous()
        images.append(data)
        names = ds.classes
        for j, y in enumerate(ds.targets):
            ids.append(f"{tag}-{j:05d}")
            labels.append(names[y])
            tags.append(tag)
    return ImageBank(
        dataset_id=dataset_id,
        images=torch.cat(images),
        ids=ids,
        labels=labels,
        tags=tags,
    )


def imagefolder_bank(
    dataset_id: str, data_dir: str | Path, store_size: int = 84
) -> ImageBank:
    """Folder tree `root/{train,val}/{class}/*` stored in memory at
    store_size^2 (the network resizes up to its input resolution later).
    Directory names are the class labels; val images become the test set."""
    import torch.nn.functional as F
    from torchvision.io import read_image

    root = Path(data_dir)
    images, ids, labels, tags = [], [], [], []
    for subdir, tag in (("train", "train"), ("val", "test")):
        split_dir = root / subdir
        if not split_dir.is_dir():
            raise ValueError(f"{split_dir} does not exist")
        for class_dir in sorted(p for p in split_dir.iterdir() if p.is_dir()):
            for img_path in sorted(class_dir.iterdir()):
                img = read_image(str(img_path))
                if img.shape[0] == 1:
                    img = img.expand(3, -1, -1)
                if img.shape[-2:] != (store_size, store_size):
                    img = F.interpolate(
                        img[None].float(), size=(store_size, store_size),
                        mode="bilinear", align_corners=False,
                    )[0].round_().clamp_(0, 255).to(torch.uint8)
                images.append(img)
                ids.append(f"{tag}-{class_dir.name}-{img_path.stem}")
                labels.append(class_dir.name)
                tags.append(tag)
    if not images:
        raise ValueError(f"no images found under {root}")
    return ImageBank(
        dataset_id=dataset_id,
        images=torch.stack(images),
        ids=ids,
        labels=labels,
        tags=tags,
    )
