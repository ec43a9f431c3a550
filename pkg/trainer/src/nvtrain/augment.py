"""Augmentation policies over uint8 (B, C, H, W) batches.

Per-image randomness comes from the global torch RNG (seeded per run).
Normalization is a fixed 0.5/0.5 squash so the pipeline stays dataset
agnostic; embeddings are compared by cosine downstream, which absorbs the
exact scaling.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torchvision import transforms


def to_model_input(batch: torch.Tensor) -> torch.Tensor:
    """uint8 -> centered float in [-1, 1]."""
    return batch.float().div_(255.0).sub_(0.5).div_(0.5)


def _crop_flip(batch: torch.Tensor, pad: int = 4) -> torch.Tensor:
    """Random shift crop (reflect padding) + horizontal flip, per image."""
    b, _, h, w = batch.shape
    x = F.pad(batch.float(), (pad, pad, pad, pad), mode="reflect")
    offsets = torch.randint(0, 2 * pad + 1, (b, 2))
    out = torch.empty_like(batch, dtype=torch.float32)
    for i in range(b):
        dy, dx = int(offsets[i, 0]), int(offsets[i, 1])
        out[i] = x[i, :, dy : dy + h, dx : dx + w]
    flip = torch.rand(b) < 0.5
    out[flip] = out[flip].flip(-1)
    return out.round_().clamp_(0, 255).to(torch.uint8)


def weak(batch: torch.Tensor) -> torch.Tensor:
    """Crop + flip; the FixMatch weak policy and the supervised default."""
    return to_model_input(_crop_flip(batch))


_randaugment = transforms.RandAugment(num_ops=2, magnitude=9)


def strong(batch: torch.Tensor) -> torch.Tensor:
    """RandAugment on top of crop + flip; the FixMatch strong policy."""
    cropped = _crop_flip(batch)
    out = torch.stack([_randaugment(img) for img in cropped])
    return to_model_input(out)


def _contrastive_transform(size: int) -> transforms.Compose:
    return transforms.Compose(
        [
            transforms.RandomResizedCrop(size, scale=(0.2, 1.0), antialias=True),
            transforms.RandomHorizontalFlip(),
            transforms.RandomApply(
                [transforms.ColorJitter(0.4, 0.4, 0.4, 0.1)], p=0.8
            ),
            transforms.RandomGrayscale(p=0.2),
        ]
    )


def contrastive(batch: torch.Tensor) -> torch.Tensor:
    """One random view per image, SimSiam/SupContrast style."""
    tf = _contrastive_transform(batch.shape[-1])
    out = torch.stack([tf(img) for img in batch])
    return to_model_input(out)


def plain(batch: torch.Tensor) -> torch.Tensor:
    """No augmentation; used for embedding extraction."""
    return to_model_input(batch.clone())
