"""Supervised binary classifiers over pair features.

Two learners, both deterministic given config and data:

* logistic regression trained by full-batch gradient descent on the
  L2-regularized log loss over z-score standardized features, with the step
  size halved whenever a step would increase the loss;
* gradient-boosted regression trees on the logistic loss: prior log-odds
  start, each tree fit to the current residuals by exact greedy squared-error
  splits over sorted feature values, Newton-step leaf values, shrunk by the
  learning rate. Split-gain ties go to the lower feature index, then the
  lower threshold.

Models serialize to self-describing JSON; floats survive the round trip
bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import (
    DegenerateSplit,
    SingleClassTraining,
    ValidationError,
    WidthMismatch,
)
from .pairs import PairFeatureTable


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.iterations <= 0 or self.l2 <= 0:
            raise ValidationError("logistic regression hyperparameters must be positive")


@dataclass(frozen=True)
class GbmConfig:
    learning_rate: float = 0.01
    n_estimators: int = 100
    max_depth: int = 3
    min_samples_leaf: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.n_estimators < 1:
            raise ValidationError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.max_depth < 1:
            raise ValidationError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_leaf < 1:
            raise ValidationError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")


def train_test_split(
    table: PairFeatureTable, cfg: SplitConfig
) -> tuple[PairFeatureTable, PairFeatureTable]:
    """Seeded uniform shuffle into ceil(f*N) training rows and the rest."""
    n = len(table)
    if n == 0:
        raise DegenerateSplit("empty feature table")
    n_train = math.ceil(cfg.train_fraction * n)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"split {n_train}/{n - n_train} leaves one side empty")
    permutation = np.random.default_rng(cfg.seed).permutation(n)
    train = table.subset(permutation[:n_train])
    test = table.subset(permutation[n_train:])
    if np.unique(train.labels).size < 2:
        raise DegenerateSplit("training side contains a single class")
    return train, test


def logreg_loss_and_grad(
    weights: np.ndarray,
    bias: float,
    features: np.ndarray,
    labels: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, float]:
    """Regularized mean log loss and its analytic gradient.

    The L2 penalty applies to the weights only, never the bias.
    """
    margins = features @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, margins) - labels * margins))
    loss += 0.5 * l2 * float(np.dot(weights, weights))
    residual = expit(margins) - labels
    grad_w = features.T @ residual / labels.size + l2 * weights
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


class LogRegModel:
    """Affine scorer on standardized features, squashed through a sigmoid."""

    kind = "logreg"

    def __init__(
        self,
        weights: np.ndarray,
        bias: float,
        feature_mean: np.ndarray,
        feature_scale: np.ndarray,
        config: LogRegConfig,
        loss_trace: np.ndarray | None = None,
    ):
        self.weights = weights
        self.bias = bias
        self.feature_mean = feature_mean
        self.feature_scale = feature_scale
        self.config = config
        self.loss_trace = loss_trace

    @property
    def n_features(self) -> int:
        return self.weights.size

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        features = _check_width(features, self.n_features)
        standardized = (features - self.feature_mean) / self.feature_scale
        return expit(standardized @ self.weights + self.bias)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": asdict(self.config),
            "params": {
                "weights": self.weights.tolist(),
                "bias": self.bias,
                "feature_mean": self.feature_mean.tolist(),
                "feature_scale": self.feature_scale.tolist(),
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogRegModel":
        params = payload["params"]
        return cls(
            np.array(params["weights"], dtype=np.float64),
            float(params["bias"]),
            np.array(params["feature_mean"], dtype=np.float64),
            np.array(params["feature_scale"], dtype=np.float64),
            LogRegConfig(**payload["config"]),
        )


def _check_width(features: np.ndarray, expected: int) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[None, :]
    if features.shape[1] != expected:
        raise WidthMismatch(f"model expects {expected} features, got {features.shape[1]}")
    return features


def _class_check(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels).astype(np.float64)
    if np.unique(labels).size < 2:
        raise SingleClassTraining("training data contains a single class")
    return labels


def fit_logreg(table: PairFeatureTable, cfg: LogRegConfig) -> LogRegModel:
    features = np.asarray(table.features, dtype=np.float64)
    labels = _class_check(table.labels)
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    standardized = (features - mean) / scale

    weights = np.zeros(features.shape[1])
    bias = 0.0
    loss, grad_w, grad_b = logreg_loss_and_grad(weights, bias, standardized, labels, cfg.l2)
    trace = [loss]
    step = cfg.learning_rate
    for _ in range(cfg.iterations):
        while True:
            cand_w = weights - step * grad_w
            cand_b = bias - step * grad_b
            new_loss, new_gw, new_gb = logreg_loss_and_grad(cand_w, cand_b, standardized, labels, cfg.l2)
            if new_loss <= loss or step < 1e-18:
                break
            step *= 0.5
        if new_loss > loss:
            break
        weights, bias = cand_w, cand_b
        loss, grad_w, grad_b = new_loss, new_gw, new_gb
        trace.append(loss)
    return LogRegModel(weights, bias, mean, scale, cfg, np.array(trace))


# ---------------------------------------------------------------------------
# gradient boosting


def _best_split(
    features: np.ndarray, residuals: np.ndarray, min_leaf: int
) -> tuple[int, float] | None:
    """Exact greedy squared-error split; None when nothing valid improves.

    Gains for every (position, feature) cell are computed at once; the argmax
    scan runs feature-major over ascending thresholds, so exact gain ties
    resolve to the lower feature index, then the lower threshold.
    """
    n, n_features = features.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(features, axis=0, kind="stable")
    sorted_values = np.take_along_axis(features, order, axis=0)
    left_sum = np.cumsum(residuals[order], axis=0)[:-1]
    total = residuals.sum()
    left_count = np.arange(1, n, dtype=np.float64)[:, None]
    right_count = n - left_count
    gain = (
        left_sum**2 / left_count
        + (total - left_sum) ** 2 / right_count
        - total**2 / n
    )
    valid = (
        (left_count >= min_leaf)
        & (right_count >= min_leaf)
        & (sorted_values[:-1] < sorted_values[1:])
    )
    gain = np.where(valid, gain, -np.inf)
    flat = np.argmax(gain.T)
    feature, position = divmod(int(flat), n - 1)
    best = gain[position, feature]
    if not np.isfinite(best) or best <= 0.0:
        return None
    low = sorted_values[position, feature]
    high = sorted_values[position + 1, feature]
    threshold = (low + high) / 2.0
    if not (low <= threshold < high):
        threshold = low
    return feature, float(threshold)


def _build_tree(
    features: np.ndarray,
    residuals: np.ndarray,
    hessians: np.ndarray,
    rows: np.ndarray,
    depth: int,
    cfg: GbmConfig,
) -> dict:
    if depth < cfg.max_depth:
        split = _best_split(features[rows], residuals[rows], cfg.min_samples_leaf)
        if split is not None:
            feature, threshold = split
            goes_left = features[rows, feature] <= threshold
            return {
                "feature": feature,
                "threshold": threshold,
                "left": _build_tree(features, residuals, hessians, rows[goes_left], depth + 1, cfg),
                "right": _build_tree(features, residuals, hessians, rows[~goes_left], depth + 1, cfg),
            }
    value = residuals[rows].sum() / max(hessians[rows].sum(), 1e-12)
    return {"value": float(value)}


def _eval_tree(tree: dict, features: np.ndarray) -> np.ndarray:
    out = np.empty(features.shape[0], dtype=np.float64)
    stack = [(tree, np.arange(features.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if "value" in node:
            out[rows] = node["value"]
            continue
        goes_left = features[rows, node["feature"]] <= node["threshold"]
        stack.append((node["left"], rows[goes_left]))
        stack.append((node["right"], rows[~goes_left]))
    return out


class GbmModel:
    """Sum of shrunk regression trees on top of the prior log-odds."""

    kind = "gbm"

    def __init__(self, trees: list[dict], init_logodds: float, n_features: int, config: GbmConfig):
        self.trees = trees
        self.init_logodds = init_logodds
        self.n_features = n_features
        self.config = config

    def decision_function(self, features: np.ndarray, n_trees: int | None = None) -> np.ndarray:
        """Raw log-odds margin, optionally truncated to the first few trees."""
        features = _check_width(features, self.n_features)
        margin = np.full(features.shape[0], self.init_logodds)
        used = self.trees if n_trees is None else self.trees[:n_trees]
        for tree in used:
            margin += self.config.learning_rate * _eval_tree(tree, features)
        return margin

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(features))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": asdict(self.config),
            "params": {
                "init_logodds": self.init_logodds,
                "n_features": self.n_features,
                "trees": self.trees,
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GbmModel":
        params = payload["params"]
        return cls(
            params["trees"],
            float(params["init_logodds"]),
            int(params["n_features"]),
            GbmConfig(**payload["config"]),
        )


def fit_gbm(table: PairFeatureTable, cfg: GbmConfig) -> GbmModel:
    features = np.asarray(table.features, dtype=np.float64)
    labels = _class_check(table.labels)
    positive_rate = labels.mean()
    init = float(np.log(positive_rate / (1.0 - positive_rate)))
    margin = np.full(labels.size, init)
    rows = np.arange(labels.size)
    trees: list[dict] = []
    for _ in range(cfg.n_estimators):
        probability = expit(margin)
        residuals = labels - probability
        hessians = probability * (1.0 - probability)
        tree = _build_tree(features, residuals, hessians, rows, 0, cfg)
        trees.append(tree)
        margin += cfg.learning_rate * _eval_tree(tree, features)
    return GbmModel(trees, init, features.shape[1], cfg)


def predict_proba(model, features: np.ndarray) -> np.ndarray:
    """Probability per feature row, for either model kind."""
    return model.predict_proba(features)


def save_model(model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model.to_dict(), handle, sort_keys=True, indent=2)
        handle.write("\n")


def load_model(path: str):
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    kind = payload.get("kind")
    if kind == LogRegModel.kind:
        return LogRegModel.from_dict(payload)
    if kind == GbmModel.kind:
        return GbmModel.from_dict(payload)
    raise ValidationError(f"unknown model kind {kind!r} in {path!r}")
