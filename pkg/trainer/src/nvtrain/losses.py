"""Training objectives as pure functions over batches.

All losses take plain tensors and return scalar tensors, so they can be
checked against finite differences and reused by any loop. Distances for
triplet mining/loss are squared Euclidean on unit-normalized embeddings,
matching the cosine geometry used at evaluation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import torch
import torch.nn.functional as F


def _check_labels(labels: torch.Tensor, n_classes: int) -> None:
    if labels.numel() and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError(
            f"labels must lie in [0, {n_classes}), got "
            f"[{int(labels.min())}, {int(labels.max())}]"
        )


def cross_entropy_loss(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Mean negative log-softmax of the true class."""
    _check_labels(labels, logits.shape[1])
    return F.cross_entropy(logits, labels)


def unit_normalize(x: torch.Tensor, eps: float = 1e-12) -> torch.Tensor:
    return x / x.norm(dim=1, keepdim=True).clamp_min(eps)


def squared_distances(embeddings: torch.Tensor) -> torch.Tensor:
    """Pairwise squared Euclidean distances, computed from differences
    (not the dot-product identity) to keep small distances accurate."""
    diff = embeddings[:, None, :] - embeddings[None, :, :]
    return (diff * diff).sum(-1)


def mine_semihard_triplets(
    embeddings: torch.Tensor, labels: torch.Tensor, margin: float
) -> list[tuple[int, int, int]]:
    """Semi-hard triplets within a batch.

    For every ordered same-class (anchor, positive) pair the hardest eligible
    negative is chosen: the one minimizing d_an subject to d_an > d_ap (ties
    by lowest index). Whenever any negative lies inside the margin band
    (d_ap < d_an < d_ap + margin) this pick is semi-hard; otherwise it is the
    closest violating negative; pairs with no negative beyond d_ap are
    skipped. Distances are squared Euclidean on unit-normalized embeddings.
    """
    if margin <= 0:
        raise ValueError(f"margin must be positive, got {margin}")
    with torch.no_grad():
        d = squared_distances(unit_normalize(embeddings.detach().double()))
    dist = d.cpu().numpy()
    lab = labels.cpu().numpy()
    n = len(lab)
    triplets: list[tuple[int, int, int]] = []
    for a in range(n):
        neg_mask = lab != lab[a]
        if not neg_mask.any():
            continue
        for p in range(n):
            if p == a or lab[p] != lab[a]:
                continue
            eligible = neg_mask & (dist[a] > dist[a, p])
            if not eligible.any():
                continue
            masked = np.where(eligible, dist[a], np.inf)
            triplets.append((a, p, int(np.argmin(masked))))
    return triplets


class TripletLossResult(NamedTuple):
    value: torch.Tensor
    num_triplets: int


def triplet_loss(
    embeddings: torch.Tensor,
    triplets: list[tuple[int, int, int]],
    margin: float,
) -> TripletLossResult:
    """Mean hinge term max(0, d_ap - d_an + margin) over the triplet set.

    An empty set yields a zero loss, flagged through num_triplets == 0.
    """
    if not triplets:
        return TripletLossResult(
            embeddings.new_zeros((), requires_grad=embeddings.requires_grad), 0
        )
    e = unit_normalize(embeddings)
    idx = torch.as_tensor(triplets, dtype=torch.long, device=embeddings.device)
    anchors, positives, negatives = e[idx[:, 0]], e[idx[:, 1]], e[idx[:, 2]]
    d_ap = ((anchors - positives) ** 2).sum(-1)
    d_an = ((anchors - negatives) ** 2).sum(-1)
    value = F.relu(d_ap - d_an + margin).mean()
    return TripletLossResult(value, len(triplets))


def cwt_loss(
    logits: torch.Tensor,
    labels: torch.Tensor,
    embeddings: torch.Tensor,
    triplets: list[tuple[int, int, int]],
    margin: float,
) -> torch.Tensor:
    """Classification-with-triplet objective: unweighted sum of both terms."""
    return cross_entropy_loss(logits, labels) + triplet_loss(
        embeddings, triplets, margin
    ).value


ROTATION_ANGLES = (0, 90, 180, 270)  # counter-clockwise


@dataclass
class RotationBatch:
    images: torch.Tensor  # 4B images, grouped by rotation label
    labels: torch.Tensor  # 4B entries in {0,1,2,3}; label r means 90r degrees


def make_rotation_batch(inputs: torch.Tensor) -> RotationBatch:
    """All four counter-clockwise rotations of every image in the batch."""
    if inputs.shape[-1] != inputs.shape[-2]:
        raise ValueError(
            f"rotation pretext requires square images, got {tuple(inputs.shape[-2:])}"
        )
    b = inputs.shape[0]
    images = torch.cat([torch.rot90(inputs, k=r, dims=(-2, -1)) for r in range(4)])
    labels = torch.arange(4, device=inputs.device).repeat_interleave(b)
    return RotationBatch(images=images, labels=labels)


def rotation_loss(rot_logits: torch.Tensor, rot_labels: torch.Tensor) -> torch.Tensor:
    """4-way cross-entropy over the rotation pretext labels."""
    if rot_logits.shape[1] != 4:
        raise ValueError(f"rotation head must emit 4 logits, got {rot_logits.shape[1]}")
    return cross_entropy_loss(rot_logits, rot_labels)


def cwrot_loss(
    base_logits: torch.Tensor,
    base_labels: torch.Tensor,
    rot_logits: torch.Tensor,
    rot_labels: torch.Tensor,
) -> torch.Tensor:
    """Classification on labeled images plus rotation prediction on all
    training images (labeled and unlabeled pools alike), unweighted sum."""
    return cross_entropy_loss(base_logits, base_labels) + rotation_loss(
        rot_logits, rot_labels
    )


def supcon_loss(
    projections: torch.Tensor,
    labels: torch.Tensor,
    temperature: float = 0.1,
) -> torch.Tensor:
    """Supervised contrastive loss, positives-outside-the-log variant.

    Positives of an anchor are every other row with the same label (other
    augmented views of the same image are given the same label by the
    caller); each anchor's sum is normalized by its positive count and
    anchors with no positives are excluded from the mean. Projections must
    arrive unit-normalized.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    norms = projections.detach().norm(dim=1)
    if (norms - 1.0).abs().max() > 1e-3:
        raise ValueError("projections must be unit-normalized")
    b = projections.shape[0]
    sims = projections @ projections.T / temperature
    eye = torch.eye(b, dtype=torch.bool, device=projections.device)
    same = labels[:, None] == labels[None, :]
    pos_mask = same & ~eye

    # log prob of each candidate against all non-self candidates
    logits = sims.masked_fill(eye, float("-inf"))
    log_prob = logits - torch.logsumexp(logits, dim=1, keepdim=True)

    pos_counts = pos_mask.sum(1)
    has_pos = pos_counts > 0
    if not has_pos.any():
        raise ValueError("no anchor has a positive; check labels/views")
    pos_log_prob = torch.where(pos_mask, log_prob, log_prob.new_zeros(()))
    per_anchor = -pos_log_prob.sum(1)[has_pos] / pos_counts[has_pos]
    return per_anchor.mean()


def simsiam_loss(
    p1: torch.Tensor, p2: torch.Tensor, z1: torch.Tensor, z2: torch.Tensor
) -> torch.Tensor:
    """Negative symmetric cosine between predictor outputs and stop-gradient
    projector outputs; lies in [-1, 0] for matched views."""
    for name, t in (("p1", p1), ("p2", p2), ("z1", z1), ("z2", z2)):
        if t.detach().norm(dim=1).min() <= 1e-12:
            raise ValueError(f"{name} contains a zero vector")
    c1 = F.cosine_similarity(p1, z2.detach(), dim=1)
    c2 = F.cosine_similarity(p2, z1.detach(), dim=1)
    return -0.5 * (c1.mean() + c2.mean())


class FixMatchLoss(NamedTuple):
    value: torch.Tensor
    mask_fraction: float


def fixmatch_unlabeled_loss(
    weak_logits: torch.Tensor, strong_logits: torch.Tensor, tau: float
) -> FixMatchLoss:
    """Pseudo-label consistency term of FixMatch.

    The weak view's argmax becomes the pseudo-label; samples whose weak
    confidence clears tau contribute a cross-entropy term on the strong
    view. The mean runs over the whole unlabeled batch, so fully-masked
    batches give exactly zero.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if weak_logits.shape != strong_logits.shape:
        raise ValueError(
            f"weak/strong shapes differ: {tuple(weak_logits.shape)} vs "
            f"{tuple(strong_logits.shape)}"
        )
    with torch.no_grad():
        probs = F.softmax(weak_logits, dim=1)
        confidence, pseudo = probs.max(dim=1)
        mask = (confidence >= tau).to(strong_logits.dtype)
    per_sample = F.cross_entropy(strong_logits, pseudo, reduction="none")
    value = (per_sample * mask).mean()
    return FixMatchLoss(value, float(mask.mean()))
