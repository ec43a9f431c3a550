"""Frozen-embedding extraction and export in the evaluator's file format."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from . import augment
from .data import ImageBank
from .models import RepresentationModel
from .nveb import write_nveb


def extract_embeddings(
    model: RepresentationModel,
    images: torch.Tensor,
    batch_size: int = 256,
    device: str = "cpu",
) -> np.ndarray:
    """Backbone features (heads discarded) for a uint8 image batch."""
    from .train import fit_resolution

    model.eval()
    chunks = []
    with torch.no_grad():
        for start in range(0, images.shape[0], batch_size):
            x = augment.plain(images[start : start + batch_size])
            x = fit_resolution(x, model.input_resolution).to(device)
            chunks.append(model.features(x).cpu().numpy().astype(np.float32))
    if not chunks:
        return np.zeros((0, 512), dtype=np.float32)
    return np.concatenate(chunks)


def extract_and_export(
    model: RepresentationModel,
    bank: ImageBank,
    out_path: str | Path,
    include_train: bool = False,
    split_file: str | None = None,
    algorithm: str | None = None,
    batch_size: int = 256,
    device: str = "cpu",
) -> str:
    """Embed the full test set (optionally the train set too) and write it.

    Returns the written file's checksum. The rows carry the bank's labels
    and train/test tags so the evaluator can score base and novel queries.
    """
    rows = [i for i, t in enumerate(bank.tags) if t == "test"]
    if include_train:
        rows += [i for i, t in enumerate(bank.tags) if t == "train"]
    matrix = extract_embeddings(
        model, bank.images[torch.as_tensor(rows, dtype=torch.long)],
        batch_size=batch_size, device=device,
    )
    return write_nveb(
        out_path,
        matrix,
        ids=[bank.ids[i] for i in rows],
        labels=[bank.labels[i] for i in rows],
        tags=[bank.tags[i] for i in rows],
        dataset=bank.dataset_id,
        split_file=split_file,
        algorithm=algorithm or model.algorithm,
    )
