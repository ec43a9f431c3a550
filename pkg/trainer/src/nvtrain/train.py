"""Training harness: one entry point for all eight algorithms.

Supervised algorithms see only labeled base-train images; the unsupervised
ones see base-train images with labels stripped; the semi-supervised ones
additionally consume novel-train images through unlabeled adapters. Label
reads are audited (see data.TrainingData) and the final checkpoint records
that no novel-side label was ever read.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch.optim import SGD

from . import augment
from .data import TrainingData
from .losses import (
    cross_entropy_loss,
    cwrot_loss,
    cwt_loss,
    fixmatch_unlabeled_loss,
    make_rotation_batch,
    mine_semihard_triplets,
    rotation_loss,
    simsiam_loss,
    supcon_loss,
    triplet_loss,
    unit_normalize,
)
from .models import ALGORITHMS, BackboneConfig, RepresentationModel, build_model

PROFILES = {
    # fixed-length schedules; final checkpoint, no model selection
    "paper": {"epochs": 100, "batch_size": 128, "lr_step": 30},
    "desk": {"epochs": 30, "batch_size": 128, "lr_step": 10},
    "smoke": {"epochs": 2, "batch_size": 16, "lr_step": 1},
}


@dataclass
class TrainConfig:
    algorithm: str
    dataset: str
    split_file: str
    profile: str = "desk"
    seed: int = 0
    epochs: int = 100
    batch_size: int = 128
    momentum: float = 0.9
    weight_decay: float = 1e-4
    lr_init: float = 0.1
    lr_step: int = 30
    lr_milestones: tuple[int, ...] | None = None
    max_iterations: int | None = None
    margin: float = 0.1
    triplet_dim: int = 128
    supcon_temperature: float = 0.1
    fixmatch_mu: int = 7
    fixmatch_tau: float = 0.95
    architecture: str = "cifar_stem"
    device: str = "cpu"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm '{self.algorithm}'; expected one of {ALGORITHMS}"
            )
        if self.fixmatch_mu < 1:
            raise ValueError("fixmatch_mu must be >= 1")
        if not 0 < self.fixmatch_tau < 1:
            raise ValueError("fixmatch_tau must lie in (0, 1)")
        if self.margin <= 0:
            raise ValueError("margin must be positive")


def make_config(
    algorithm: str,
    dataset: str,
    split_file: str,
    profile: str = "desk",
    seed: int = 0,
    device: str = "cpu",
) -> TrainConfig:
    """Profile defaults plus the documented per-algorithm overrides."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile '{profile}'; expected one of {list(PROFILES)}")
    cfg = TrainConfig(
        algorithm=algorithm,
        dataset=dataset,
        split_file=split_file,
        profile=profile,
        seed=seed,
        device=device,
        architecture="standard" if dataset == "imagenet100" else "cifar_stem",
        **PROFILES[profile],
    )
    if profile == "paper" and dataset == "imagenet100":
        if algorithm == "supcontrast":
            cfg.epochs = 200
            cfg.lr_milestones = (150, 170, 190)
        if algorithm == "fixmatch":
            cfg.max_iterations = 2**19
            cfg.fixmatch_mu = 5
    return cfg


def lr_at(epoch: int, config: TrainConfig) -> float:
    """Step schedule: /10 every lr_step epochs, or at explicit milestones."""
    if epoch < 0 or epoch >= config.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {config.epochs})")
    if config.lr_milestones is not None:
        drops = sum(1 for m in config.lr_milestones if epoch >= m)
    else:
        drops = epoch // config.lr_step
    return config.lr_init * (0.1**drops)


@dataclass
class TrainResult:
    model: RepresentationModel
    config: TrainConfig
    provenance: dict
    log: list[dict] = field(default_factory=list)


def _shuffled_batches(pool: list[int], batch_size: int, gen: torch.Generator):
    perm = torch.randperm(len(pool), generator=gen)
    idx = [pool[int(i)] for i in perm]
    return [idx[s : s + batch_size] for s in range(0, len(idx), batch_size)]


class _CyclingPool:
    """Endless shuffled batches from a secondary sample pool."""

    def __init__(self, pool: list[int], batch_size: int, gen: torch.Generator):
        self.pool = pool
        self.batch_size = batch_size
        self.gen = gen
        self.batches: list[list[int]] = []

    def next(self) -> list[int]:
        if not self.batches:
            self.batches = _shuffled_batches(self.pool, self.batch_size, self.gen)
        return self.batches.pop(0)


def _embed(model: RepresentationModel, x: torch.Tensor, device: str) -> torch.Tensor:
    return model.features(fit_resolution(x, model.input_resolution).to(device))


def fit_resolution(x: torch.Tensor, resolution: int) -> torch.Tensor:
    """Upscale augmented floats to the stem's input size (84 -> 224 case)."""
    if x.shape[-1] == resolution:
        return x
    return torch.nn.functional.interpolate(
        x, size=(resolution, resolution), mode="bilinear", align_corners=False
    )


def train_representation(config: TrainConfig, data: TrainingData) -> TrainResult:
    """Train one algorithm on the routed pools; returns model + provenance."""
    if not data.base_train:
        raise ValueError("base-train pool is empty; nothing to supervise on")
    if config.algorithm == "fixmatch" and not data.novel_train:
        raise ValueError("fixmatch requires an unlabeled novel-train pool")

    torch.manual_seed(config.seed)
    device = config.device
    backbone_cfg = BackboneConfig(
        architecture=config.architecture,
        resolution=32 if config.architecture == "cifar_stem" else 224,
    )
    model = build_model(
        config.algorithm,
        data.n_base_classes,
        backbone_cfg,
        triplet_dim=config.triplet_dim,
    ).to(device)
    model.train()
    optimizer = SGD(
        model.parameters(),
        lr=config.lr_init,
        momentum=config.momentum,
        weight_decay=config.weight_decay,
    )
    gen = torch.Generator().manual_seed(config.seed)

    # secondary streams
    rotation_pool = None
    unlabeled_pool = None
    if config.algorithm == "cwrot":
        rotation_pool = _CyclingPool(data.all_train, config.batch_size, gen)
    if config.algorithm == "fixmatch":
        unlabeled_pool = _CyclingPool(
            data.novel_train, config.batch_size * config.fixmatch_mu, gen
        )

    log: list[dict] = []
    iteration = 0
    stop = False
    for epoch in range(config.epochs):
        lr = lr_at(epoch, config)
        for group in optimizer.param_groups:
            group["lr"] = lr
        total, steps, extras = 0.0, 0, {}
        primary = (
            _shuffled_batches(data.base_train, config.batch_size, gen)
        )
        for batch in primary:
            loss, info = _step(config, model, data, batch, rotation_pool, unlabeled_pool)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            steps += 1
            for k, v in info.items():
                extras[k] = extras.get(k, 0.0) + v
            iteration += 1
            if config.max_iterations is not None and iteration >= config.max_iterations:
                stop = True
                break
        entry = {
            "epoch": epoch,
            "lr": lr,
            "loss": total / max(steps, 1),
            "iterations": iteration,
        }
        entry.update({k: v / max(steps, 1) for k, v in extras.items()})
        log.append(entry)
        if stop:
            break

    if data.audit.novel_reads != 0:  # the protocol the whole benchmark rests on
        raise RuntimeError(
            f"protocol violation: {data.audit.novel_reads} novel-side label reads"
        )
    provenance = {
        "novel_label_reads": data.audit.novel_reads,
        "base_label_reads": data.audit.base_reads,
        "iterations": iteration,
        "seed": config.seed,
    }
    model.eval()
    return TrainResult(model=model, config=config, provenance=provenance, log=log)


def _step(config, model, data, batch, rotation_pool, unlabeled_pool):
    algo = config.algorithm
    device = config.device
    images = data.images(batch)

    if algo == "vanilla":
        y = data.class_indices(batch).to(device)
        logits = model.head("classifier", _embed(model, augment.weak(images), device))
        return cross_entropy_loss(logits, y), {}

    if algo == "triplet":
        y = data.class_indices(batch).to(device)
        h = model.head("embedder", _embed(model, augment.weak(images), device))
        triplets = mine_semihard_triplets(h, y, config.margin)
        value, count = triplet_loss(h, triplets, config.margin)
        return value, {"triplets": float(count)}

    if algo == "cwt":
        y = data.class_indices(batch).to(device)
        feats = _embed(model, augment.weak(images), device)
        logits = model.head("classifier", feats)
        h = model.head("embedder", feats)
        triplets = mine_semihard_triplets(h, y, config.margin)
        return cwt_loss(logits, y, h, triplets, config.margin), {
            "triplets": float(len(triplets))
        }

    if algo == "supcontrast":
        y = data.class_indices(batch).to(device)
        views = torch.cat([augment.contrastive(images), augment.contrastive(images)])
        proj = unit_normalize(model.head("projector", _embed(model, views, device)))
        return supcon_loss(proj, torch.cat([y, y]), config.supcon_temperature), {}

    if algo == "rotnet":
        rotated = make_rotation_batch(augment.weak(images))
        logits = model.head("rotation", _embed(model, rotated.images, device))
        return rotation_loss(logits, rotated.labels.to(device)), {}

    if algo == "simsiam":
        v1, v2 = augment.contrastive(images), augment.contrastive(images)
        z1 = model.head("projector", _embed(model, v1, device))
        z2 = model.head("projector", _embed(model, v2, device))
        p1 = model.head("predictor", z1)
        p2 = model.head("predictor", z2)
        return simsiam_loss(p1, p2, z1, z2), {}

    if algo == "cwrot":
        y = data.class_indices(batch).to(device)
        logits = model.head("classifier", _embed(model, augment.weak(images), device))
        rot_src = data.images(rotation_pool.next())
        rotated = make_rotation_batch(augment.weak(rot_src))
        rot_logits = model.head("rotation", _embed(model, rotated.images, device))
        return cwrot_loss(logits, y, rot_logits, rotated.labels.to(device)), {}

    if algo == "fixmatch":
        y = data.class_indices(batch).to(device)
        sup_logits = model.head("classifier", _embed(model, augment.weak(images), device))
        sup = cross_entropy_loss(sup_logits, y)
        u_images = data.images(unlabeled_pool.next())
        weak_logits = model.head("classifier", _embed(model, augment.weak(u_images), device))
        strong_logits = model.head("classifier", _embed(model, augment.strong(u_images), device))
        unsup, frac = fixmatch_unlabeled_loss(weak_logits, strong_logits, config.fixmatch_tau)
        return sup + unsup, {"mask_fraction": frac}

    raise ValueError(f"unknown algorithm '{algo}'")


def save_checkpoint(result: TrainResult, path: str | Path) -> None:
    torch.save(
        {
            "state_dict": result.model.state_dict(),
            "algorithm": result.config.algorithm,
            "n_base_classes": _classifier_width(result.model),
            "config": asdict(result.config),
            "provenance": result.provenance,
        },
        path,
    )


def _classifier_width(model: RepresentationModel) -> int | None:
    if "classifier" not in model.heads:
        return None
    return model.heads["classifier"].out_features


def load_checkpoint(path: str | Path) -> tuple[RepresentationModel, dict]:
    blob = torch.load(path, map_location="cpu", weights_only=False)
    cfg = blob["config"]
    backbone_cfg = BackboneConfig(
        architecture=cfg["architecture"],
        resolution=32 if cfg["architecture"] == "cifar_stem" else 224,
    )
    model = build_model(
        blob["algorithm"],
        blob["n_base_classes"] or 1,
        backbone_cfg,
        triplet_dim=cfg["triplet_dim"],
    )
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, blob


def write_run_log(result: TrainResult, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in result.log:
            fh.write(json.dumps(entry) + "\n")
