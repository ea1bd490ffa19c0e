"""Drug-pair feature vectors from per-drug embedding rows.

Componentwise operators on the two drug vectors: absolute/squared difference,
plain difference, Hadamard product, or concatenation (which doubles the
width). Features are computed in the pair file's given orientation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyTargets, UnknownDrug, ValidationError
from .embedding import Embedding
from .graph import PairTable


class PairOperator(str, Enum):
    ABSOLUTE = "absolute"
    SQUARED = "squared"
    DIFFERENCE = "difference"
    HADAMARD = "hadamard"
    CONCATENATE = "concatenate"


def apply_operator(op: PairOperator, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Combine row-aligned vector blocks ``a`` and ``b``."""
    if a.shape != b.shape:
        raise ValidationError(f"operand shapes differ: {a.shape} vs {b.shape}")
    if op is PairOperator.ABSOLUTE:
        return np.abs(a - b)
    if op is PairOperator.SQUARED:
        return (a - b) ** 2
    if op is PairOperator.DIFFERENCE:
        return a - b
    if op is PairOperator.HADAMARD:
        return a * b
    if op is PairOperator.CONCATENATE:
        return np.concatenate([a, b], axis=-1)
    raise ValidationError(f"unknown operator {op!r}")


@dataclass
class PairFeatureTable:
    """Per-pair feature rows, aligned with the validated target order."""

    drug_1: list[str]
    drug_2: list[str]
    labels: np.ndarray
    features: np.ndarray
    operator: PairOperator | None = None

    def __len__(self) -> int:
        return len(self.drug_1)

    @property
    def width(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "PairFeatureTable":
        indices = np.asarray(indices)
        return PairFeatureTable(
            [self.drug_1[i] for i in indices],
            [self.drug_2[i] for i in indices],
            self.labels[indices],
            self.features[indices],
            self.operator,
        )


def pair_features(
    embedding: Embedding, targets: PairTable, op: PairOperator
) -> PairFeatureTable:
    """Feature vector per target pair, rows in target order."""
    if len(targets) == 0:
        raise EmptyTargets("no target pairs")
    position = {drug_id: i for i, drug_id in enumerate(embedding.drug_ids)}
    try:
        left = np.array([position[d] for d in targets.drug_1])
        right = np.array([position[d] for d in targets.drug_2])
    except KeyError as exc:
        raise UnknownDrug(f"pair references drug {exc.args[0]!r} absent from the embedding") from exc
    features = apply_operator(op, embedding.h[left], embedding.h[right])
    return PairFeatureTable(
        list(targets.drug_1),
        list(targets.drug_2),
        targets.labels.copy(),
        features,
        op,
    )


def write_feature_csv(table: PairFeatureTable, path: str) -> None:
    """Header ``drug_1,drug_2,label,f_0,...,f_{w-1}``."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["drug_1", "drug_2", "label"] + [f"f_{j}" for j in range(table.width)])
        for i in range(len(table)):
            writer.writerow(
                [table.drug_1[i], table.drug_2[i], int(table.labels[i])]
                + [format(v, ".17g") for v in table.features[i]]
            )


def read_feature_csv(path: str) -> PairFeatureTable:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read features file {path!r}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[:3] != ["drug_1", "drug_2", "label"]:
            raise ValidationError(f"features file {path!r} must start with drug_1,drug_2,label")
        drug_1: list[str] = []
        drug_2: list[str] = []
        labels: list[int] = []
        rows: list[list[float]] = []
        for row in reader:
            if len(row) != len(header):
                raise ValidationError(f"feature row width mismatch in {path!r}")
            drug_1.append(row[0])
            drug_2.append(row[1])
            if row[2] not in ("0", "1"):
                raise ValidationError(f"label must be 0 or 1, got {row[2]!r}")
            labels.append(int(row[2]))
            rows.append([float(v) for v in row[3:]])
    if not rows:
        raise EmptyTargets(f"features file {path!r} has no rows")
    return PairFeatureTable(
        drug_1, drug_2, np.array(labels, dtype=np.int64), np.array(rows, dtype=np.float64)
    )
