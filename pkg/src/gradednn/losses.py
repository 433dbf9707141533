"""Grade-weighted loss functions.

All losses take (target, prediction) as graded vectors over the same grading
and return a scalar.  Parametrized kinds are described by a LossKind value,
which also parses from compact text such as "huber:0.5" or
"homogeneous:by_distinct_count".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spaces import (
    ExponentScheme,
    GradedDomainError,
    GradedVector,
    homogeneous_terms,
    parse_scheme,
    require_same_grading,
)

# predictions below this are clamped inside the cross entropy log
CROSS_ENTROPY_CLAMP = 1e-12


@dataclass(frozen=True)
class LossKind:
    name: str
    delta: Optional[float] = None
    scheme: Optional[ExponentScheme] = None

    @classmethod
    def graded_mse(cls):
        return cls("graded_mse")

    @classmethod
    def graded_norm(cls):
        return cls("graded_norm")

    @classmethod
    def huber(cls, delta: float):
        if not delta > 0:
            raise ValueError("huber threshold must be positive")
        return cls("huber", delta=float(delta))

    @classmethod
    def homogeneous(cls, scheme: ExponentScheme):
        return cls("homogeneous", scheme=scheme)

    @classmethod
    def cross_entropy(cls):
        return cls("cross_entropy")

    @classmethod
    def max_graded(cls):
        return cls("max_graded")

    def as_text(self) -> str:
        if self.name == "huber":
            return "huber:%g" % self.delta
        if self.name == "homogeneous":
            return "homogeneous:%s" % self.scheme.value
        return self.name


def parse_loss(text: str) -> LossKind:
    """Parse "graded_mse" | "graded_norm" | "huber:<delta>" |
    "homogeneous:<scheme>" | "cross_entropy" | "max_graded"."""
    tok = text.strip().lower()
    if tok in ("graded_mse", "graded_norm", "cross_entropy", "max_graded"):
        return LossKind(tok)
    if tok.startswith("huber:"):
        return LossKind.huber(float(tok.split(":", 1)[1]))
    if tok.startswith("homogeneous:"):
        return LossKind.homogeneous(parse_scheme(tok.split(":", 1)[1]))
    raise ValueError("unknown loss %r" % text)


def graded_mse(y: GradedVector, yhat: GradedVector) -> float:
    """(1/n) sum_i q_i (yhat_i - y_i)**2."""
    require_same_grading(y, yhat)
    d = yhat.values - y.values
    return float(np.mean(y.grading.floats * d * d))


def graded_norm_loss(y: GradedVector, yhat: GradedVector) -> float:
    """sum_i q_i (yhat_i - y_i)**2, the squared graded euclidean norm."""
    require_same_grading(y, yhat)
    d = yhat.values - y.values
    return float(np.sum(y.grading.floats * d * d))


def graded_huber(y: GradedVector, yhat: GradedVector, delta: float) -> float:
    """sum_i q_i rho_delta(yhat_i - y_i) with the usual quadratic/linear split."""
    require_same_grading(y, yhat)
    if not delta > 0:
        raise ValueError("huber threshold must be positive")
    z = np.abs(yhat.values - y.values)
    rho = np.where(z <= delta, 0.5 * z * z, delta * (z - 0.5 * delta))
    return float(np.sum(y.grading.floats * rho))


def homogeneous_loss(y: GradedVector, yhat: GradedVector, scheme: ExponentScheme) -> float:
    """Square of the homogeneous norm of the residual.

    With per-group euclidean norms n_j and exponents e_j this is
    (sum_j n_j**e_j)**(2/E); zero residual gives zero by convention.
    """
    require_same_grading(y, yhat)
    diff = y.with_values(yhat.values - y.values)
    terms, big_e = homogeneous_terms(diff, scheme)
    s = sum(n ** e for _, n, e in terms)
    if s == 0.0:
        return 0.0
    return float(s ** (2.0 / big_e))


def graded_cross_entropy(y: GradedVector, yhat: GradedVector) -> float:
    """-sum_i q_i y_i log(yhat_i), with yhat clamped below at 1e-12."""
    require_same_grading(y, yhat)
    if np.any(y.values < 0.0):
        raise GradedDomainError("cross entropy targets must be nonnegative")
    clamped = np.maximum(yhat.values, CROSS_ENTROPY_CLAMP)
    return float(-np.sum(y.grading.floats * y.values * np.log(clamped)))


def max_graded_loss(y: GradedVector, yhat: GradedVector) -> float:
    """(max_i sqrt(q_i)|yhat_i - y_i|)**2 = max_i q_i (yhat_i - y_i)**2."""
    require_same_grading(y, yhat)
    d = yhat.values - y.values
    return float(np.max(y.grading.floats * d * d))


def loss_value(kind: LossKind, y: GradedVector, yhat: GradedVector) -> float:
    if kind.name == "graded_mse":
        return graded_mse(y, yhat)
    if kind.name == "graded_norm":
        return graded_norm_loss(y, yhat)
    if kind.name == "huber":
        return graded_huber(y, yhat, kind.delta)
    if kind.name == "homogeneous":
        return homogeneous_loss(y, yhat, kind.scheme)
    if kind.name == "cross_entropy":
        return graded_cross_entropy(y, yhat)
    if kind.name == "max_graded":
        return max_graded_loss(y, yhat)
    raise ValueError("unknown loss kind %r" % (kind,))
