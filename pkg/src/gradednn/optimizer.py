"""Grade-adaptive gradient descent.

Every parameter gets the per-coordinate rate eta_i = eta / q_i: weights use
the grade of the input coordinate they multiply, biases the grade of the
output coordinate they shift.  Training is full batch and deterministic for
a fixed seed and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .gradients import GradientBundle, network_backward
from .losses import LossKind
from .network import Network, NonFiniteForwardError
from .spaces import GradedError, GradedVector


class TrainingDivergenceError(GradedError):
    """Raised when the loss or a forward pass stops being finite."""


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float
    momentum: float = 0.0
    max_iters: int = 100
    stop_threshold: float = 0.0
    stop_window: int = 10
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.stop_threshold < 0:
            raise ValueError("stop_threshold must be >= 0")
        if self.stop_window < 1:
            raise ValueError("stop_window must be >= 1")


def _rates(net: Network, eta: float):
    per_layer = []
    for layer in net.layers:
        rate_w = eta / layer.in_grading.floats[np.newaxis, :]
        rate_b = eta / layer.out_grading.floats
        per_layer.append((rate_w, rate_b))
    return per_layer


def sgd_step(
    net: Network,
    bundle: GradientBundle,
    cfg: OptimizerConfig,
    velocity: Optional[list] = None,
) -> list:
    """One in-place update; returns the velocity state for the next call."""
    rates = _rates(net, cfg.learning_rate)
    if velocity is None:
        velocity = [
            (np.zeros_like(l.weight_base), np.zeros_like(l.bias)) for l in net.layers
        ]
    for layer, (gw, gb), (rw, rb), (vw, vb) in zip(
        net.layers, zip(bundle.weight_grads, bundle.bias_grads), rates, velocity
    ):
        vw *= cfg.momentum
        vw -= rw * gw
        vb *= cfg.momentum
        vb -= rb * gb
        layer.weight_base += vw
        layer.bias += vb
    return velocity


def batch_gradient(
    net: Network,
    inputs: Sequence[GradedVector],
    targets: Sequence[GradedVector],
    kind: LossKind,
) -> GradientBundle:
    """Mean loss and mean gradients over the whole dataset."""
    if len(inputs) != len(targets):
        raise ValueError("inputs and targets differ in length")
    if not inputs:
        raise ValueError("dataset is empty")
    total: Optional[GradientBundle] = None
    for x, y in zip(inputs, targets):
        try:
            bundle = network_backward(net, x, y, kind)
        except NonFiniteForwardError as exc:
            raise TrainingDivergenceError(str(exc)) from exc
        if total is None:
            total = bundle
        else:
            total.add_(bundle)
    return total.scaled(1.0 / len(inputs))


@dataclass
class TrainResult:
    network: Network
    losses: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def initial_loss(self) -> float:
        return self.losses[0]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def train(
    net: Network,
    inputs: Sequence[GradedVector],
    targets: Sequence[GradedVector],
    kind: LossKind,
    cfg: OptimizerConfig,
) -> TrainResult:
    """Full-batch grade-adaptive descent on the mean loss.

    losses[t] is the mean loss at the parameters of iteration t, so the
    history has max_iters + 1 entries unless the plateau rule stops earlier:
    with stop_threshold > 0, training stops once the loss decrease over the
    last stop_window iterations falls below the threshold.
    """
    result = TrainResult(network=net)
    velocity = None
    for t in range(cfg.max_iters + 1):
        bundle = batch_gradient(net, inputs, targets, kind)
        if not np.isfinite(bundle.loss):
            raise TrainingDivergenceError(
                "loss became non-finite at iteration %d; consider log-domain "
                "evaluation or a smaller learning rate" % t
            )
        result.losses.append(bundle.loss)
        result.grad_norms.append(bundle.grad_norm())
        if t == cfg.max_iters:
            result.stop_reason = "max_iters"
            break
        w = cfg.stop_window
        if (
            cfg.stop_threshold > 0
            and len(result.losses) > w
            and result.losses[-1 - w] - result.losses[-1] < cfg.stop_threshold
        ):
            result.stop_reason = "plateau"
            break
        velocity = sgd_step(net, bundle, cfg, velocity)
    return result
