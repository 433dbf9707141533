"""Plain dense MLP, written independently of the graded stack.

This is the reference implementation the graded code must reduce to when all
grades are 1: standard affine layers, elementwise activations, squared-error
loss summed over outputs and averaged over the batch, full-batch gradient
descent with optional momentum.  Kept deliberately free of any graded
imports so the comparison is meaningful.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "expm1":
        return np.expm1(z)
    if name == "identity":
        return z + 0.0
    raise ValueError("unknown classical activation %r" % name)


def _act_slope(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.where(z > 0.0, 1.0, 0.0)
    if name == "expm1":
        return np.exp(z)
    if name == "identity":
        return np.ones_like(z)
    raise ValueError("unknown classical activation %r" % name)


def check_shapes(widths: Sequence[int], weights, biases) -> None:
    if len(weights) != len(widths) - 1 or len(biases) != len(widths) - 1:
        raise ValueError("need one weight/bias pair per layer")
    for l, (w, b) in enumerate(zip(weights, biases)):
        if w.shape != (widths[l + 1], widths[l]):
            raise ValueError(
                "layer %d weight shape %s does not match widths %s"
                % (l, w.shape, tuple(widths))
            )
        if b.shape != (widths[l + 1],):
            raise ValueError("layer %d bias shape mismatch" % l)


def classical_mlp_forward(
    widths: Sequence[int],
    weights: Sequence[np.ndarray],
    biases: Sequence[np.ndarray],
    x: np.ndarray,
    activations: Sequence[str],
) -> np.ndarray:
    """Forward pass for a single input vector, one activation name per layer."""
    check_shapes(widths, weights, biases)
    if len(activations) != len(weights):
        raise ValueError("need one activation per layer")
    cur = np.asarray(x, dtype=float)
    for w, b, act in zip(weights, biases, activations):
        cur = _act(act, w @ cur + b)
    return cur


def mlp_init(widths: Sequence[int], rng: np.random.Generator, scale: float = 1.0):
    """He-style initialization for the ReLU baseline."""
    weights, biases = [], []
    for n_in, n_out in zip(widths, widths[1:]):
        weights.append(rng.normal(0.0, scale * np.sqrt(2.0 / n_in), size=(n_out, n_in)))
        biases.append(rng.uniform(-0.1, 0.1, size=n_out))
    return weights, biases


def mlp_batch_forward(weights, biases, X: np.ndarray, activations) -> np.ndarray:
    cur = np.asarray(X, dtype=float)
    for w, b, act in zip(weights, biases, activations):
        cur = _act(act, cur @ w.T + b)
    return cur


def mlp_train(
    widths: Sequence[int],
    weights: List[np.ndarray],
    biases: List[np.ndarray],
    X: np.ndarray,
    Y: np.ndarray,
    activations: Sequence[str],
    lr: float,
    iters: int,
    momentum: float = 0.0,
) -> Tuple[List[np.ndarray], List[np.ndarray], List[float]]:
    """Full-batch GD on mean-over-samples sum-of-squares error.

    Mutates nothing; returns (weights, biases, loss history) where the
    history holds the loss at each iterate including the final one.
    """
    check_shapes(widths, weights, biases)
    weights = [w.copy() for w in weights]
    biases = [b.copy() for b in biases]
    vel_w = [np.zeros_like(w) for w in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n = X.shape[0]
    losses: List[float] = []
    for t in range(iters + 1):
        zs = []
        outs = [X]
        cur = X
        for w, b, act in zip(weights, biases, activations):
            z = cur @ w.T + b
            cur = _act(act, z)
            zs.append(z)
            outs.append(cur)
        diff = cur - Y
        losses.append(float(np.mean(np.sum(diff * diff, axis=1))))
        if t == iters:
            break
        g = 2.0 * diff / n
        for l in range(len(weights) - 1, -1, -1):
            dz = g * _act_slope(activations[l], zs[l])
            gw = dz.T @ outs[l]
            gb = dz.sum(axis=0)
            g = dz @ weights[l]
            vel_w[l] = momentum * vel_w[l] - lr * gw
            vel_b[l] = momentum * vel_b[l] - lr * gb
            weights[l] += vel_w[l]
            biases[l] += vel_b[l]
    return weights, biases, losses
