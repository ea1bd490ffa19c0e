"""Ranking and threshold metrics for binary classifiers.

AUROC is the Mann-Whitney statistic normalized by the number of
positive/negative pairs, with ties counting one half. AUPR sweeps the scores
in descending order, processing tied scores as one block, and sums precision
times the recall increment (no interpolation). F1 uses a fixed decision
threshold.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import NoPositives, SingleClass, ValidationError


@dataclass(frozen=True)
class MetricsReport:
    auroc: float
    aupr: float
    f1: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    n_pos: int
    n_neg: int

    def to_dict(self) -> dict:
        return asdict(self)


def _validated(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValidationError(f"scores and labels differ in length: {s.size} vs {y.size}")
    if s.size == 0:
        raise ValidationError("empty score vector")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValidationError("labels must be 0 or 1")
    return s, y


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties averaged within their group."""
    order = np.argsort(values, kind="mergesort")
    ordered = values[order]
    n = values.size
    starts = np.r_[0, np.flatnonzero(ordered[1:] != ordered[:-1]) + 1]
    ends = np.r_[starts[1:], n]
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def auroc(scores, labels) -> float:
    s, y = _validated(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUROC needs both classes present")
    ranks = _average_ranks(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def aupr(scores, labels) -> float:
    s, y = _validated(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise NoPositives("AUPR needs at least one positive")
    order = np.argsort(-s, kind="mergesort")
    ordered_scores = s[order]
    ordered_labels = y[order]
    # last position of each tied-score block
    block_ends = np.r_[np.flatnonzero(ordered_scores[1:] != ordered_scores[:-1]), y.size - 1]
    tp = np.cumsum(ordered_labels)[block_ends].astype(np.float64)
    predicted = block_ends + 1.0
    precision = tp / predicted
    recall = tp / n_pos
    recall_prev = np.r_[0.0, recall[:-1]]
    return float(np.sum((recall - recall_prev) * precision))


def f1(scores, labels, threshold: float = 0.5) -> float:
    s, y = _validated(scores, labels)
    predicted = s >= threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return float(2.0 * precision * recall / (precision + recall))


def evaluate_scores(scores, labels, threshold: float = 0.5) -> MetricsReport:
    """Full report: AUROC, AUPR, F1 and the confusion counts at ``threshold``."""
    s, y = _validated(scores, labels)
    predicted = s >= threshold
    tp = int(np.sum(predicted & (y == 1)))
    fp = int(np.sum(predicted & (y == 0)))
    tn = int(np.sum(~predicted & (y == 0)))
    fn = int(np.sum(~predicted & (y == 1)))
    return MetricsReport(
        auroc=auroc(s, y),
        aupr=aupr(s, y),
        f1=f1(s, y, threshold),
        threshold=float(threshold),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        n_pos=int(y.sum()),
        n_neg=int(y.size - y.sum()),
    )
