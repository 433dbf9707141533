"""Synthetic datasets and CSV round-tripping for the experiment harness.

CSV layout is a header row x0..x{n-1},y0..y{m-1} followed by one row per
sample; floats are written with 17 significant digits so that reading the
file back reproduces the doubles exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .ioutil import fmt17
from .spaces import (
    GradedDomainError,
    GradedVector,
    GradingMismatchError,
    GradingVector,
    ones_grading,
)


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    in_grading: GradingVector
    out_grading: GradingVector
    note: str = ""

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.array(self.inputs, dtype=float))
        self.targets = np.atleast_2d(np.array(self.targets, dtype=float))
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise GradingMismatchError("inputs and targets differ in sample count")
        if self.inputs.shape[1] != len(self.in_grading):
            raise GradingMismatchError("input width does not match input grading")
        if self.targets.shape[1] != len(self.out_grading):
            raise GradingMismatchError("target width does not match output grading")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise GradedDomainError("dataset entries must be finite")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def graded_inputs(self) -> List[GradedVector]:
        return [GradedVector(row, self.in_grading) for row in self.inputs]

    def graded_targets(self) -> List[GradedVector]:
        return [GradedVector(row, self.out_grading) for row in self.targets]


def monomial_value(x: np.ndarray, exponents: Sequence[Fraction], coefficient: float) -> np.ndarray:
    """c * prod_i |x_i|**k_i * sgn(x_i**k_i), rows of x handled in batch."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.full(x.shape[0], float(coefficient))
    for i, k in enumerate(exponents):
        if k == 0:
            continue
        col = x[:, i]
        if k.denominator == 1:
            sign = np.where((col < 0) & (int(k) % 2 == 1), -1.0, 1.0)
        else:
            if np.any(col <= 0):
                raise GradedDomainError(
                    "fractional exponent %s needs positive inputs" % k
                )
            sign = 1.0
        out = out * np.abs(col) ** float(k) * sign
    return out


def gen_monomial_dataset(
    grading: GradingVector,
    exponents: Sequence,
    coefficient: float,
    box: Sequence[Tuple[float, float]],
    count: int,
    seed: int,
) -> Dataset:
    """Uniform samples from a box with scalar monomial targets."""
    exponents = tuple(Fraction(k) for k in exponents)
    if len(exponents) != len(grading) or len(box) != len(grading):
        raise GradingMismatchError("exponents/box must match the grading length")
    if count < 1:
        raise ValueError("count must be >= 1")
    lows = np.array([b[0] for b in box], dtype=float)
    highs = np.array([b[1] for b in box], dtype=float)
    if np.any(lows >= highs):
        raise ValueError("box bounds must satisfy low < high")
    for k, lo in zip(exponents, lows):
        if k.denominator != 1 and lo <= 0:
            raise GradedDomainError(
                "fractional exponent %s needs a positive sampling box" % k
            )
    rng = np.random.default_rng(seed)
    x = rng.uniform(lows, highs, size=(count, len(grading)))
    y = monomial_value(x, exponents, coefficient)
    return Dataset(
        x,
        y[:, np.newaxis],
        grading,
        ones_grading(1),
        note="monomial c=%g k=(%s)" % (coefficient, ",".join(str(k) for k in exponents)),
    )


def gen_linear_map_dataset(
    in_dim: int,
    out_grading: GradingVector,
    count: int,
    seed: int,
):
    """Noiseless targets of a random linear map on near-unit inputs.

    Inputs carry the all-ones grading, so a single identity-activation layer
    is linear in its parameters and the graded-norm objective is a convex
    quadratic.  Inputs are sign patterns with mild jitter, which keeps the
    sample Gram matrix well conditioned.  Returns (dataset, true_weights,
    true_bias); the optimum has zero loss.
    """
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(count, in_dim))
    x = signs * (1.0 + 0.05 * rng.uniform(-1.0, 1.0, size=(count, in_dim)))
    w_true = rng.uniform(-1.0, 1.0, size=(len(out_grading), in_dim))
    b_true = rng.uniform(-0.5, 0.5, size=len(out_grading))
    y = x @ w_true.T + b_true
    ds = Dataset(x, y, ones_grading(in_dim), out_grading, note="linear map, noiseless")
    return ds, w_true, b_true


def gen_invariant_proxy_dataset(
    grading: GradingVector,
    count: int,
    seed: int,
) -> Dataset:
    """Scalar regression on positively-sampled graded inputs.

    Targets are linear in the inputs with positive coefficients u_i**q_i, so
    a single-layer identity model realizes them exactly with base weights
    u_i inside the usual init range, and full-batch descent converges.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.5, 1.5, size=(count, len(grading)))
    u = rng.uniform(0.3, 0.8, size=len(grading))
    coeff = u ** grading.floats
    intercept = rng.uniform(0.0, 0.2)
    y = x @ coeff + intercept
    return Dataset(
        x,
        y[:, np.newaxis],
        grading,
        ones_grading(1),
        note="invariant-style proxy, linear in graded inputs",
    )


def write_dataset_csv(ds: Dataset, path) -> None:
    n, m = len(ds.in_grading), len(ds.out_grading)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x%d" % i for i in range(n)] + ["y%d" % j for j in range(m)])
        for xr, yr in zip(ds.inputs, ds.targets):
            writer.writerow([fmt17(v) for v in xr] + [fmt17(v) for v in yr])


def read_dataset_csv(path, in_grading: GradingVector, out_grading: GradingVector) -> Dataset:
    n, m = len(in_grading), len(out_grading)
    expected = ["x%d" % i for i in range(n)] + ["y%d" % j for j in range(m)]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("dataset file %s is empty" % path) from None
        if [h.strip() for h in header] != expected:
            raise ValueError(
                "dataset header %r does not match expected %r" % (header, expected)
            )
        xs, ys = [], []
        for row in reader:
            if not row:
                continue
            if len(row) != n + m:
                raise ValueError("dataset row has %d fields, expected %d" % (len(row), n + m))
            vals = [float(tok) for tok in row]
            xs.append(vals[:n])
            ys.append(vals[n:])
    if not xs:
        raise ValueError("dataset file %s has no samples" % path)
    return Dataset(np.array(xs), np.array(ys), in_grading, out_grading, note=str(path))
