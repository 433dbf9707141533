"""Experiment configuration: JSON in, validated dataclasses out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from .losses import LossKind, parse_loss
from .network import ActivationKind, parse_activation
from .optimizer import OptimizerConfig
from .spaces import GradedError, GradingVector, parse_grading


class ConfigError(ValueError):
    """A configuration file is missing something or contradicts itself."""


@dataclass
class ModelSpec:
    kind: str  # "feedforward" | "multiplicative"
    layers: List[Tuple[GradingVector, ActivationKind]] = field(default_factory=list)
    exponents: Optional[str] = None  # multiplicative only, rational literals


@dataclass
class DatasetSpec:
    source: str  # "csv" | "monomial" | "linear_map" | "invariant_proxy"
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    grading: GradingVector
    model: ModelSpec
    loss: LossKind
    optimizer: OptimizerConfig
    dataset: DatasetSpec
    out_dir: Path
    seed: int = 0


def _need(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError("missing %r in %s" % (key, where))
    return doc[key]


def experiment_config_from_dict(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    try:
        grading = parse_grading(_need(doc, "grading", "config"))
    except (ValueError, GradedError) as exc:
        raise ConfigError("bad grading: %s" % exc) from None

    mdoc = _need(doc, "model", "config")
    kind = _need(mdoc, "type", "model")
    if kind == "feedforward":
        layers = []
        for i, ldoc in enumerate(_need(mdoc, "layers", "model")):
            try:
                g = parse_grading(_need(ldoc, "grading", "model.layers[%d]" % i))
                act = parse_activation(_need(ldoc, "activation", "model.layers[%d]" % i))
            except (ValueError, GradedError) as exc:
                raise ConfigError("model.layers[%d]: %s" % (i, exc)) from None
            layers.append((g, act))
        if not layers:
            raise ConfigError("feedforward model needs at least one layer")
        model = ModelSpec(kind="feedforward", layers=layers)
    elif kind == "multiplicative":
        model = ModelSpec(
            kind="multiplicative", exponents=str(_need(mdoc, "exponents", "model"))
        )
    else:
        raise ConfigError("unknown model type %r" % kind)

    try:
        loss = parse_loss(_need(doc, "loss", "config"))
    except ValueError as exc:
        raise ConfigError("bad loss: %s" % exc) from None

    odoc = _need(doc, "optimizer", "config")
    try:
        optimizer = OptimizerConfig(
            learning_rate=float(_need(odoc, "learning_rate", "optimizer")),
            momentum=float(odoc.get("momentum", 0.0)),
            max_iters=int(_need(odoc, "max_iters", "optimizer")),
            stop_threshold=float(odoc.get("stop_threshold", 0.0)),
            stop_window=int(odoc.get("stop_window", 10)),
            seed=int(odoc.get("seed", doc.get("seed", 0))),
        )
    except ValueError as exc:
        raise ConfigError("bad optimizer settings: %s" % exc) from None

    ddoc = _need(doc, "dataset", "config")
    source = _need(ddoc, "source", "dataset")
    if source not in ("csv", "monomial", "linear_map", "invariant_proxy"):
        raise ConfigError("unknown dataset source %r" % source)
    params = {k: v for k, v in ddoc.items() if k != "source"}
    if source == "csv":
        if "path" not in params:
            raise ConfigError("csv dataset needs a path")
        params["path"] = str((base_dir / params["path"]))

    out_dir = Path(doc.get("out_dir", "."))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    return ExperimentConfig(
        grading=grading,
        model=model,
        loss=loss,
        optimizer=optimizer,
        dataset=DatasetSpec(source=source, params=params),
        out_dir=out_dir,
        seed=int(doc.get("seed", 0)),
    )


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from None
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return experiment_config_from_dict(doc, base_dir=path.parent)
