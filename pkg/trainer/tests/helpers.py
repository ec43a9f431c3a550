"""Oracles for the loss kernels: central finite differences, brute-force
semi-hard enumeration, and a two-loop contrastive reference."""

from __future__ import annotations

import math

import numpy as np
import torch


def central_difference(loss_fn, x: torch.Tensor, eps: float = 1e-6) -> torch.Tensor:
    """Gradient of loss_fn() w.r.t. x by central differences (x is mutated
    in place during probing and restored afterwards)."""
    grad = torch.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.numel()):
        orig = float(flat[i])
        flat[i] = orig + eps
        f_plus = float(loss_fn())
        flat[i] = orig - eps
        f_minus = float(loss_fn())
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2 * eps)
    return grad


def assert_matches_finite_differences(loss_fn, wrt: dict[str, torch.Tensor],
                                      rtol: float = 1e-4, atol: float = 1e-6):
    """Check autograd gradients of loss_fn(**wrt) against central differences.

    Tensors must be float64 leaves with requires_grad set by the caller.
    """
    loss = loss_fn()
    grads = torch.autograd.grad(loss, list(wrt.values()), allow_unused=False)
    for (name, tensor), analytic in zip(wrt.items(), grads):
        with torch.no_grad():
            fd = central_difference(loss_fn, tensor)
        ok = torch.allclose(analytic, fd, rtol=rtol, atol=atol)
        assert ok, (
            f"gradient mismatch for '{name}': max abs diff "
            f"{(analytic - fd).abs().max():.3e}"
        )


def brute_force_semihard(embeddings: np.ndarray, labels: np.ndarray, margin: float):
    """Literal enumeration of the semi-hard rule: prefer a negative inside
    (d_ap, d_ap + margin); else the closest negative beyond d_ap; else skip.
    Ties resolve to the lowest index."""
    e = embeddings.astype(np.float64)
    e = e / np.linalg.norm(e, axis=1, keepdims=True)
    n = len(labels)
    d = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            d[a, b] = float(((e[a] - e[b]) ** 2).sum())
    triplets = []
    for a in range(n):
        for p in range(n):
            if p == a or labels[p] != labels[a]:
                continue
            negatives = [m for m in range(n) if labels[m] != labels[a]]
            band = [m for m in negatives if d[a, p] < d[a, m] < d[a, p] + margin]
            if band:
                pick = min(band, key=lambda m: (d[a, m], m))
            else:
                beyond = [m for m in negatives if d[a, m] > d[a, p]]
                if not beyond:
                    continue
                pick = min(beyond, key=lambda m: (d[a, m], m))
            triplets.append((a, p, pick))
    return triplets


def supcon_two_loop(projections: np.ndarray, labels: np.ndarray, tau: float) -> float:
    """Direct per-anchor, per-positive evaluation of the contrastive loss."""
    z = projections.astype(np.float64)
    n = len(labels)
    per_anchor = []
    for i in range(n):
        positives = [j for j in range(n) if j != i and labels[j] == labels[i]]
        if not positives:
            continue
        denom = sum(math.exp(float(z[i] @ z[a]) / tau) for a in range(n) if a != i)
        total = 0.0
        for p in positives:
            total += math.log(math.exp(float(z[i] @ z[p]) / tau) / denom)
        per_anchor.append(-total / len(positives))
    return sum(per_anchor) / len(per_anchor)
