"""Approximation benchmark: one multiplicative graded neuron against plain
ReLU MLPs of growing width on the target f(x) = x_0^{q_0} x_1^{q_1}.

The target is exactly representable by the graded neuron (weights 1,
exponents equal to the grading), so its error is limited only by floating
point; a width-m ReLU net is piecewise linear and has to spend units on
curvature.  Each cell reports the max absolute error on a held-out grid.
Classical cells train with heavy-ball momentum (plain GD stalls at larger
widths) and keep the best of several restarts; each width also considers
the previous width's best net padded with dead units, which makes the error
column non-increasing by construction.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .classical import mlp_batch_forward, mlp_init, mlp_train
from .datasets import monomial_value
from .ioutil import fmt17
from .spaces import GradingVector, parse_grading


@dataclass(frozen=True)
class BenchConfig:
    grading: GradingVector
    hidden_sizes: Tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    train_count: int = 192
    sample_low: float = 0.05
    sample_high: float = 1.0
    grid_points: int = 101
    grid_low: float = 0.01
    grid_high: float = 1.0
    restarts: int = 5
    classical_iters: int = 5000
    classical_learning_rate: float = 0.01
    classical_momentum: float = 0.95
    graded_iters: int = 300
    graded_learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if len(self.grading) != 2:
            raise ValueError("the benchmark target is bivariate")
        if not (0.0 < self.sample_low < self.sample_high <= 1.0):
            raise ValueError("sampling range must sit inside (0, 1]")
        if self.grid_points < 2 or self.restarts < 1:
            raise ValueError("grid_points >= 2 and restarts >= 1 required")


def bench_config_from_dict(doc: dict) -> BenchConfig:
    known = {
        "grading", "hidden_sizes", "train_count", "sample_low", "sample_high",
        "grid_points", "grid_low", "grid_high", "restarts", "classical_iters",
        "classical_learning_rate", "classical_momentum", "graded_iters",
        "graded_learning_rate", "seed",
    }
    extra = set(doc) - known
    if extra:
        raise ValueError("unknown benchmark settings: %s" % ", ".join(sorted(extra)))
    kwargs = dict(doc)
    kwargs["grading"] = parse_grading(doc.get("grading", "2,3"))
    if "hidden_sizes" in kwargs:
        kwargs["hidden_sizes"] = tuple(int(m) for m in kwargs["hidden_sizes"])
    return BenchConfig(**kwargs)


@dataclass
class BenchRow:
    model: str
    hidden_units: int
    max_abs_error: float
    train_mse: float
    status: str = "ok"


def _cell_rng(seed: int, cell: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(cell.encode())])


def _target(q: GradingVector, x: np.ndarray) -> np.ndarray:
    return monomial_value(x, q.grades, 1.0)


def _grid(cfg: BenchConfig) -> np.ndarray:
    side = np.linspace(cfg.grid_low, cfg.grid_high, cfg.grid_points)
    a, b = np.meshgrid(side, side, indexing="ij")
    return np.column_stack([a.ravel(), b.ravel()])


def mult_neuron_predict(w: np.ndarray, b: float, k: np.ndarray, x: np.ndarray) -> np.ndarray:
    """prod_i |w_i x_i|**k_i + b on positive inputs, batched over rows."""
    return np.prod(np.abs(w * x) ** k, axis=1) + b


def train_multiplicative(
    x: np.ndarray,
    y: np.ndarray,
    k: np.ndarray,
    q: np.ndarray,
    w0: np.ndarray,
    b0: float,
    lr: float,
    iters: int,
):
    """Full-batch GD on mean squared error with grade-scaled rates.

    Returns (w, b, losses, grad_norms), or None if the run left the finite
    range.  Rates follow the usual convention: lr/q_i for the weight tied to
    coordinate i, lr for the bias (scalar output, grade 1).
    """
    w = np.array(w0, dtype=float)
    b = float(b0)
    n = len(y)
    rate_w = lr / q
    losses: List[float] = []
    grad_norms: List[float] = []
    for _ in range(iters + 1):
        pred = mult_neuron_predict(w, b, k, x)
        diff = pred - y
        loss = float(np.mean(diff * diff))
        if not np.isfinite(loss):
            return None
        core = pred - b
        g = 2.0 * diff / n
        # d(core)/dw_i = k_i core sgn(w_i)/|w_i| away from w_i = 0
        safe = np.where(np.abs(w) < 1e-12, np.inf, np.abs(w))
        dw = (g[:, None] * core[:, None] * (k * np.sign(w) / safe)).sum(axis=0)
        db = float(g.sum())
        losses.append(loss)
        grad_norms.append(float(np.sqrt(np.sum(dw * dw) + db * db)))
        if len(losses) == iters + 1:
            break
        w = w - rate_w * dw
        b = b - lr * db
    if not np.all(np.isfinite(w)):
        return None
    return w, b, losses, grad_norms


def _pad_classical(weights, biases, m: int):
    """Embed a smaller hidden layer into width m with dead (zero) units."""
    w1, w2 = weights
    b1, b2 = biases
    m_prev = w1.shape[0]
    w1p = np.zeros((m, w1.shape[1]))
    w1p[:m_prev] = w1
    b1p = np.zeros(m)
    b1p[:m_prev] = b1
    w2p = np.zeros((w2.shape[0], m))
    w2p[:, :m_prev] = w2
    return [w1p, w2p], [b1p, b2.copy()]


def _graded_cell(cfg: BenchConfig, x_train, y_train, grid, y_grid) -> BenchRow:
    q = cfg.grading.floats
    k = q.copy()  # the target's own exponents: exact representation exists
    rng = _cell_rng(cfg.seed, "graded-1")
    candidates = [(np.ones(2), 0.0)]  # analytic solution w=1, b=0
    for _ in range(cfg.restarts):
        w0 = rng.uniform(0.2, 0.9, size=2)
        fit = train_multiplicative(
            x_train, y_train, k, q, w0, 0.0,
            cfg.graded_learning_rate, cfg.graded_iters)
        if fit is not None:
            candidates.append((fit[0], fit[1]))
    best: Optional[Tuple[float, float]] = None
    for w, b in candidates:
        pred_grid = mult_neuron_predict(w, b, k, grid)
        err = float(np.max(np.abs(pred_grid - y_grid)))
        pred_train = mult_neuron_predict(w, b, k, x_train)
        mse = float(np.mean((pred_train - y_train) ** 2))
        if best is None or err < best[0]:
            best = (err, mse)
    return BenchRow("graded", 1, best[0], best[1])


def _classical_cell(
    cfg: BenchConfig, m: int, x_train, y_train, grid, y_grid, carry
) -> Tuple[BenchRow, Optional[tuple]]:
    rng = _cell_rng(cfg.seed, "classical-%d" % m)
    widths = [2, m, 1]
    acts = ["relu", "identity"]
    y_col = y_train[:, None]
    candidates = []
    if carry is not None:
        candidates.append(_pad_classical(*carry, m=m))
    for _ in range(cfg.restarts):
        weights, biases = mlp_init(widths, rng)
        weights, biases, _ = mlp_train(
            widths, weights, biases, x_train, y_col, acts,
            cfg.classical_learning_rate, cfg.classical_iters,
            momentum=cfg.classical_momentum)
        if all(np.all(np.isfinite(w)) for w in weights):
            candidates.append((weights, biases))
    if not candidates:
        return BenchRow("classical", m, float("inf"), float("inf"), "diverged"), carry
    best = None
    for weights, biases in candidates:
        pred_grid = mlp_batch_forward(weights, biases, grid, acts)[:, 0]
        err = float(np.max(np.abs(pred_grid - y_grid)))
        pred_train = mlp_batch_forward(weights, biases, x_train, acts)[:, 0]
        mse = float(np.mean((pred_train - y_train) ** 2))
        if best is None or err < best[0]:
            best = (err, mse, (weights, biases))
    row = BenchRow("classical", m, best[0], best[1])
    return row, best[2]


def approx_bench(cfg: BenchConfig) -> List[BenchRow]:
    data_rng = np.random.default_rng([cfg.seed, zlib.crc32(b"data")])
    x_train = data_rng.uniform(
        cfg.sample_low, cfg.sample_high, size=(cfg.train_count, 2))
    y_train = _target(cfg.grading, x_train)
    grid = _grid(cfg)
    y_grid = _target(cfg.grading, grid)

    rows = [_graded_cell(cfg, x_train, y_train, grid, y_grid)]
    carry = None
    for m in cfg.hidden_sizes:
        row, carry = _classical_cell(cfg, m, x_train, y_train, grid, y_grid, carry)
        rows.append(row)
    return rows


def write_bench_csv(rows: List[BenchRow], path) -> None:
    with open(path, "w") as fh:
        fh.write("model,hidden_units,max_abs_error,train_mse,status\n")
        for r in rows:
            fh.write("%s,%d,%s,%s,%s\n" % (
                r.model, r.hidden_units, fmt17(r.max_abs_error),
                fmt17(r.train_mse), r.status))
