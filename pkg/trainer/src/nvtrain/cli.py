"""Training entry point: trains one algorithm against a split file and
exports frozen test-set embeddings for the evaluator."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .data import TrainingData, cifar_bank, imagefolder_bank, load_split_doc, synthetic_bank
from .export import extract_and_export
from .models import ALGORITHMS
from .train import PROFILES, make_config, save_checkpoint, train_representation, write_run_log


@click.group()
def main() -> None:
    """Representation-learning harness for novel-class retrieval."""


@main.command("train")
@click.option("--algo", type=click.Choice(list(ALGORITHMS)), required=True)
@click.option(
    "--dataset",
    type=click.Choice(["synthetic", "cifar10", "cifar100", "imagenet100"]),
    required=True,
)
@click.option("--split", "split_file", type=click.Path(exists=True), required=True)
@click.option("--profile", type=click.Choice(list(PROFILES)), default="desk")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
@click.option("--data-dir", type=click.Path(), default=None,
              help="torchvision root for CIFAR datasets")
@click.option("--device", default="cpu")
@click.option("--include-train-embeddings", is_flag=True, default=False)
def cmd_train(
    algo: str,
    dataset: str,
    split_file: str,
    profile: str,
    seed: int,
    out: str,
    data_dir: str | None,
    device: str,
    include_train_embeddings: bool,
) -> None:
    """Train, checkpoint, and export embeddings into OUT/."""
    if dataset == "synthetic":
        bank = synthetic_bank(seed=seed)
    elif dataset == "imagenet100":
        if data_dir is None:
            raise click.UsageError(f"--data-dir is required for {dataset}")
        bank = imagefolder_bank(dataset, data_dir)
    else:
        if data_dir is None:
            raise click.UsageError(f"--data-dir is required for {dataset}")
        bank = cifar_bank(dataset, data_dir)

    split_doc = load_split_doc(split_file)
    data = TrainingData(bank, split_doc)
    config = make_config(algo, dataset, split_file, profile=profile, seed=seed,
                         device=device)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = train_representation(config, data)

    ckpt = out_dir / f"{algo}-seed{seed}.pt"
    save_checkpoint(result, ckpt)
    write_run_log(result, out_dir / f"{algo}-seed{seed}.log.jsonl")
    emb = out_dir / f"{algo}-seed{seed}.nveb"
    checksum = extract_and_export(
        result.model, bank, emb,
        include_train=include_train_embeddings,
        split_file=split_file, algorithm=algo, device=device,
    )
    click.echo(json.dumps({
        "checkpoint": str(ckpt),
        "embeddings": str(emb),
        "checksum": checksum,
        "provenance": result.provenance,
        "final_loss": result.log[-1]["loss"] if result.log else None,
    }))


if __name__ == "__main__":
    main()
