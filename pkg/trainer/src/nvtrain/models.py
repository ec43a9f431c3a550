"""ResNet18 backbone with per-algorithm heads.

The visual representation is always the backbone's final average-pooled
512-d activation; heads exist only to drive training and are discarded at
embedding-extraction time.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
from torchvision.models import resnet18

ALGORITHMS = (
    "vanilla",
    "triplet",
    "cwt",
    "supcontrast",
    "rotnet",
    "simsiam",
    "cwrot",
    "fixmatch",
)

EMBEDDING_DIM = 512


@dataclass(frozen=True)
class BackboneConfig:
    architecture: str = "cifar_stem"  # cifar_stem (32x32) | standard (224x224)
    resolution: int = 32
    output_dim: int = EMBEDDING_DIM

    def __post_init__(self):
        pairing = {"cifar_stem": 32, "standard": 224}
        if self.architecture not in pairing:
            raise ValueError(f"unknown architecture '{self.architecture}'")
        if self.resolution != pairing[self.architecture]:
            raise ValueError(
                f"{self.architecture} expects resolution "
                f"{pairing[self.architecture]}, got {self.resolution}"
            )
        if self.output_dim != EMBEDDING_DIM:
            raise ValueError("resnet18 pooled output is fixed at 512")


def make_backbone(config: BackboneConfig) -> nn.Module:
    net = resnet18(weights=None)
    net.fc = nn.Identity()
    if config.architecture == "cifar_stem":
        # 32x32 inputs: 3x3 stride-1 stem, no max pooling
        net.conv1 = nn.Conv2d(3, 64, kernel_size=3, stride=1, padding=1, bias=False)
        net.maxpool = nn.Identity()
    return net


class RepresentationModel(nn.Module):
    """Backbone + named heads; `features` is the frozen-evaluation output."""

    def __init__(
        self,
        algorithm: str,
        backbone: nn.Module,
        heads: dict[str, nn.Module],
        input_resolution: int = 32,
    ):
        super().__init__()
        self.algorithm = algorithm
        self.input_resolution = input_resolution
        self.backbone = backbone
        self.heads = nn.ModuleDict(heads)

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.backbone(x)

    def head(self, name: str, feats: torch.Tensor) -> torch.Tensor:
        return self.heads[name](feats)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.features(x)


def _projector(out_dim: int) -> nn.Module:
    return nn.Sequential(
        nn.Linear(EMBEDDING_DIM, EMBEDDING_DIM),
        nn.ReLU(inplace=True),
        nn.Linear(EMBEDDING_DIM, out_dim),
    )


def _simsiam_projector() -> nn.Module:
    return nn.Sequential(
        nn.Linear(EMBEDDING_DIM, EMBEDDING_DIM, bias=False),
        nn.BatchNorm1d(EMBEDDING_DIM),
        nn.ReLU(inplace=True),
        nn.Linear(EMBEDDING_DIM, EMBEDDING_DIM, bias=False),
        nn.BatchNorm1d(EMBEDDING_DIM, affine=False),
    )


def _simsiam_predictor() -> nn.Module:
    return nn.Sequential(
        nn.Linear(EMBEDDING_DIM, 128, bias=False),
        nn.BatchNorm1d(128),
        nn.ReLU(inplace=True),
        nn.Linear(128, EMBEDDING_DIM),
    )


def build_model(
    algorithm: str,
    n_base_classes: int,
    config: BackboneConfig | None = None,
    triplet_dim: int = 128,
    projection_dim: int = 128,
) -> RepresentationModel:
    """Backbone plus the heads the algorithm trains with."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm '{algorithm}'; expected one of {ALGORITHMS}")
    config = config or BackboneConfig()
    heads: dict[str, nn.Module] = {}
    if algorithm in ("vanilla", "cwt", "cwrot", "fixmatch"):
        heads["classifier"] = nn.Linear(EMBEDDING_DIM, n_base_classes)
    if algorithm in ("triplet", "cwt"):
        heads["embedder"] = nn.Linear(EMBEDDING_DIM, triplet_dim)
    if algorithm in ("rotnet", "cwrot"):
        heads["rotation"] = nn.Linear(EMBEDDING_DIM, 4)
    if algorithm == "supcontrast":
        heads["projector"] = _projector(projection_dim)
    if algorithm == "simsiam":
        heads["projector"] = _simsiam_projector()
        heads["predictor"] = _simsiam_predictor()
    return RepresentationModel(
        algorithm, make_backbone(config), heads, input_resolution=config.resolution
    )
