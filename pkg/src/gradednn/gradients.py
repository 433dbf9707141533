"""Analytic gradients and a finite-difference checker.

loss_grad returns dL/d(yhat) for every loss kind; network_backward chains it
through the layers, differentiating with respect to the base weights (the
trainable parameters), not the effective ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .losses import CROSS_ENTROPY_CLAMP, LossKind, loss_value
from .network import (
    ActivationKind,
    MultiplicativeNeuron,
    Network,
    _mult_sign,
    activation_slope,
    forward_trace,
    raise_if_non_finite,
    random_network,
    weight_base_slope,
)
from .spaces import (
    ExponentScheme,
    GradedDomainError,
    GradedVector,
    GradingMismatchError,
    GradingVector,
    homogeneous_terms,
    require_same_grading,
)


def loss_grad(kind: LossKind, y: GradedVector, yhat: GradedVector) -> GradedVector:
    """Gradient of the loss with respect to the prediction yhat."""
    require_same_grading(y, yhat)
    q = y.grading.floats
    d = yhat.values - y.values
    if kind.name == "graded_mse":
        return y.with_values((2.0 / len(q)) * q * d)
    if kind.name == "graded_norm":
        return y.with_values(2.0 * q * d)
    if kind.name == "huber":
        # derivative of rho is the residual clipped to [-delta, delta]
        return y.with_values(q * np.clip(d, -kind.delta, kind.delta))
    if kind.name == "homogeneous":
        return y.with_values(_homogeneous_grad(y, yhat, kind))
    if kind.name == "cross_entropy":
        if np.any(y.values < 0.0):
            raise GradedDomainError("cross entropy targets must be nonnegative")
        below = yhat.values < CROSS_ENTROPY_CLAMP
        clamped = np.maximum(yhat.values, CROSS_ENTROPY_CLAMP)
        # inside the clamp the loss is locally constant in yhat
        return y.with_values(np.where(below, 0.0, -q * y.values / clamped))
    if kind.name == "max_graded":
        g = np.zeros_like(d)
        m = int(np.argmax(q * d * d))  # ties resolve to the lowest index
        g[m] = 2.0 * q[m] * d[m]
        return y.with_values(g)
    raise ValueError("unknown loss kind %r" % (kind,))


def _homogeneous_grad(y: GradedVector, yhat: GradedVector, kind: LossKind) -> np.ndarray:
    diff = y.with_values(yhat.values - y.values)
    terms, big_e = homogeneous_terms(diff, kind.scheme)
    s = sum(n ** e for _, n, e in terms)
    out = np.zeros(len(y), dtype=float)
    if s == 0.0:
        return out
    outer = (2.0 / big_e) * s ** (2.0 / big_e - 1.0)
    grades = y.grading.grades
    for g, n, e in terms:
        if n == 0.0:
            continue
        mask = np.array([gi == g for gi in grades])
        out += np.where(mask, outer * e * n ** (e - 2.0) * diff.values, 0.0)
    return out


@dataclass
class GradientBundle:
    """Per-layer parameter gradients plus the loss they belong to."""

    weight_grads: List[np.ndarray]
    bias_grads: List[np.ndarray]
    loss: float

    def grad_norm(self) -> float:
        total = 0.0
        for w in self.weight_grads:
            total += float(np.sum(w * w))
        for b in self.bias_grads:
            total += float(np.sum(b * b))
        return float(np.sqrt(total))

    def scaled(self, factor: float) -> "GradientBundle":
        return GradientBundle(
            [w * factor for w in self.weight_grads],
            [b * factor for b in self.bias_grads],
            self.loss * factor,
        )

    def add_(self, other: "GradientBundle") -> None:
        for mine, theirs in zip(self.weight_grads, other.weight_grads):
            mine += theirs
        for mine, theirs in zip(self.bias_grads, other.bias_grads):
            mine += theirs
        self.loss += other.loss


def network_backward(
    net: Network, x: GradedVector, y: GradedVector, kind: LossKind
) -> GradientBundle:
    """Loss and exact parameter gradients for one sample."""
    if net.layers and x.grading != net.in_grading:
        raise GradingMismatchError("input grading does not match the network")
    trace, out = forward_trace(net, x.values)
    raise_if_non_finite(trace, out)
    yhat = GradedVector(out, net.out_grading) if net.layers else x
    loss = loss_value(kind, y, yhat)
    g = loss_grad(kind, y, yhat).values
    weight_grads: List[Optional[np.ndarray]] = [None] * len(net.layers)
    bias_grads: List[Optional[np.ndarray]] = [None] * len(net.layers)
    for l in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[l]
        x_in, z, _ = trace[l]
        dz = g * activation_slope(layer.activation, z, layer.out_grading.floats)
        dw = np.outer(dz, x_in) * weight_base_slope(layer.weight_base, layer.in_grading)
        if layer.mask is not None:
            dw = np.where(layer.mask, dw, 0.0)
        weight_grads[l] = dw
        bias_grads[l] = dz
        g = layer.effective().T @ dz
    return GradientBundle(weight_grads, bias_grads, loss)


def finite_diff_check(
    net: Network,
    x: GradedVector,
    y: GradedVector,
    kind: LossKind,
    eps: float = 1e-5,
) -> float:
    """Max over parameters of |analytic - central difference| / max(1, |fd|)."""
    if not 1e-7 <= eps <= 1e-4:
        raise ValueError("eps should lie in [1e-7, 1e-4]")

    def current_loss() -> float:
        _, out = forward_trace(net, x.values)
        return loss_value(kind, y, GradedVector(out, net.out_grading))

    bundle = network_backward(net, x, y, kind)
    worst = 0.0
    for l, layer in enumerate(net.layers):
        for name, grads in (("weight_base", bundle.weight_grads[l]),
                            ("bias", bundle.bias_grads[l])):
            param = getattr(layer, name)
            it = np.nditer(param, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                keep = param[idx]
                param[idx] = keep + eps
                hi = current_loss()
                param[idx] = keep - eps
                lo = current_loss()
                param[idx] = keep
                fd = (hi - lo) / (2.0 * eps)
                err = abs(grads[idx] - fd) / max(1.0, abs(fd))
                if err > worst:
                    worst = err
    return worst


def multiplicative_backward(neuron: MultiplicativeNeuron, x: GradedVector):
    """Value of the neuron plus d(value)/d(weights) and d(value)/d(bias)."""
    if x.grading != neuron.grading:
        raise GradingMismatchError("input grading does not match neuron grading")
    factors = []
    active = []
    for i, (w, k, xi) in enumerate(zip(neuron.weights, neuron.exponents, x.values)):
        if k == 0:
            continue
        s = _mult_sign(xi, k)
        factors.append(np.abs(w * xi) ** float(k) * s)
        active.append(i)
    core = float(np.prod(factors)) if factors else 1.0
    dw = np.zeros_like(neuron.weights)
    for pos, i in enumerate(active):
        w = neuron.weights[i]
        k = float(neuron.exponents[i])
        xi = x.values[i]
        rest = float(np.prod([f for p, f in enumerate(factors) if p != pos]))
        s = _mult_sign(xi, neuron.exponents[i])
        if w == 0.0:
            # |w xi|**k has slope 0 at w=0 for k>1, and |xi| * sgn jump at k=1;
            # take the one-sided value used by the forward (0) for k != 1
            dfdw = np.abs(xi) * s if k == 1.0 else 0.0
        else:
            dfdw = k * np.abs(w * xi) ** (k - 1.0) * np.abs(xi) * np.sign(w) * s
        dw[i] = dfdw * rest
    return core + neuron.bias, dw, 1.0


# randomized end-to-end check: small nets, every activation and loss, with
# sampling kept clear of kinks (relu clamp band, huber corners, max ties,
# the cross-entropy floor) so the central difference is trustworthy

_CHECK_KINDS = (
    LossKind.graded_mse(),
    LossKind.graded_norm(),
    LossKind.huber(0.7),
    LossKind.homogeneous(ExponentScheme.BY_MAX_GRADE),
    LossKind.homogeneous(ExponentScheme.BY_DISTINCT_COUNT),
    LossKind.cross_entropy(),
    LossKind.max_graded(),
)


def _margins_ok(kind: LossKind, y: GradedVector, yhat: GradedVector) -> bool:
    d = np.abs(yhat.values - y.values)
    if kind.name == "huber":
        if np.any(np.abs(d - kind.delta) < 1e-3 * max(1.0, kind.delta)):
            return False
    if kind.name == "max_graded" and len(d) > 1:
        scores = np.sort(y.grading.floats * d * d)[::-1]
        if scores[0] - scores[1] < 1e-3 * max(scores[0], 1.0):
            return False
    if kind.name == "cross_entropy" and np.any(yhat.values < 1e-2):
        return False
    if kind.name == "homogeneous":
        diff = y.with_values(yhat.values - y.values)
        terms, _ = homogeneous_terms(diff, kind.scheme)
        if any(n < 1e-2 for _, n, _ in terms):
            return False
    return True


def _random_check_case(rng: np.random.Generator, kind: LossKind):
    """A net of <= 3 layers, widths <= 8, weights in (0.2, 1.5), plus inputs
    and targets keeping every unit away from activation and loss kinks."""
    for _ in range(200):
        depth = int(rng.integers(1, 4))
        widths = [int(rng.integers(1, 9)) for _ in range(depth + 1)]
        gradings = [
            GradingVector([int(rng.integers(1, 5)) for _ in range(w)])
            for w in widths
        ]
        activations = []
        bound = 1.5
        for l in range(depth):
            max_eff = float(np.max(1.5 ** gradings[l].floats))
            z_bound = widths[l] * max_eff * bound
            pool = list(ActivationKind)
            if z_bound > 6.0:
                # a second exponential on an already-amplified signal can
                # overflow; keep exp for layers with a small incoming range
                pool = [k for k in pool if k is not ActivationKind.GRADED_EXP]
            act = pool[int(rng.integers(0, len(pool)))]
            activations.append(act)
            q_out = gradings[l + 1].floats
            if act in (ActivationKind.GRADED_RELU, ActivationKind.SIGNED_GRADED_RELU):
                bound = max(float(np.max(z_bound ** (1.0 / q_out))), 1.0)
            elif act is ActivationKind.GRADED_EXP:
                bound = float(np.max(np.expm1(z_bound / q_out)))
            else:
                bound = z_bound
        net = random_network(gradings, activations, rng, low=0.2, high=1.5)
        x = GradedVector(rng.uniform(0.5, 1.5, widths[0]), gradings[0])
        trace, out = forward_trace(net, x.values)
        # positive weights keep every z positive; require it to clear the
        # relu clamp band by more than any finite-difference step
        if min(float(np.min(np.abs(z))) for _, z, _ in trace) < 2e-2:
            continue
        yhat = GradedVector(out, net.out_grading)
        for _ in range(50):
            y = GradedVector(rng.uniform(0.1, 1.0, widths[-1]), gradings[-1])
            if _margins_ok(kind, y, yhat):
                return net, x, y
        # targets kept colliding with a kink; rebuild the net instead
    raise RuntimeError("could not sample a kink-free gradient-check case")


def grad_check_suite(eps: float = 1e-5, count: int = 100, seed: int = 0):
    """Relative analytic-vs-central-difference error for `count` random nets.

    Returns a list of (loss name, relative error) pairs, deterministic in
    the seed; losses cycle so every kind appears.
    """
    rng = np.random.default_rng(seed)
    results = []
    for i in range(count):
        kind = _CHECK_KINDS[i % len(_CHECK_KINDS)]
        net, x, y = _random_check_case(rng, kind)
        results.append((kind.as_text(), finite_diff_check(net, x, y, kind, eps)))
    return results
