"""Non-negative factorization of the pruned profile matrix into drug embeddings.

Multiplicative updates on the Frobenius objective ``||X - H W||_F`` with
``H`` (drugs x dims) and ``W`` (dims x entities) kept entrywise non-negative:

    H <- H * (X W^T) / (H W W^T + eps)
    W <- W * (H^T X) / (H^T H W + eps)

Both factors start from seeded uniform [0, 1) samples scaled by
``sqrt(mean(X) / dims)`` (H drawn first, then W, from one generator), so a
fixed seed gives bit-identical factors.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import EmptyMatrix, ValidationError
from .ppr import PrunedPprMatrix


class DimensionTooLargeWarning(UserWarning):
    """More embedding dimensions than drug rows."""


@dataclass(frozen=True)
class NmfConfig:
    dimensions: int = 32
    max_iter: int = 100
    seed: int = 42
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.dimensions < 1:
            raise ValidationError(f"dimensions must be >= 1, got {self.dimensions}")
        if self.max_iter < 0:
            raise ValidationError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.epsilon <= 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass
class Embedding:
    """Factor pair plus the residual trace; loaded embeddings carry ``h`` only."""

    h: np.ndarray
    drug_ids: list[str]
    w: np.ndarray | None = None
    node_ids: list[str] | None = None
    objective_trace: np.ndarray | None = None

    @property
    def dimensions(self) -> int:
        return self.h.shape[1]


def _frobenius_residual(matrix: sp.csr_matrix, h: np.ndarray, w: np.ndarray) -> float:
    """Exact ||X - H W||_F via fixed-size row blocks (order never varies)."""
    n = w.shape[1]
    rows_per_block = max(1, (1 << 22) // max(n, 1))
    total = 0.0
    for lo in range(0, h.shape[0], rows_per_block):
        hi = min(lo + rows_per_block, h.shape[0])
        block = h[lo:hi] @ w
        block -= matrix[lo:hi].toarray()
        flat = block.ravel()
        total += float(np.dot(flat, flat))
    return float(np.sqrt(total))


def fit_nmf(matrix: PrunedPprMatrix, cfg: NmfConfig) -> Embedding:
    """Factorize the pruned profile matrix into non-negative ``h`` and ``w``."""
    x = matrix.to_csr().astype(np.float64)
    m, n = x.shape
    if m == 0 or x.nnz == 0:
        raise EmptyMatrix("input matrix has no nonzero entries")
    d = cfg.dimensions
    if d > m:
        warnings.warn(
            f"{d} embedding dimensions for only {m} drugs",
            DimensionTooLargeWarning,
            stacklevel=2,
        )
    mean = x.sum() / (m * n)
    scale = np.sqrt(mean / d)
    rng = np.random.default_rng(cfg.seed)
    h = rng.random((m, d)) * scale
    w = rng.random((d, n)) * scale

    trace = [_frobenius_residual(x, h, w)]
    eps = cfg.epsilon
    for _ in range(cfg.max_iter):
        h *= (x @ w.T) / (h @ (w @ w.T) + eps)
        w *= (x.T @ h).T / ((h.T @ h) @ w + eps)
        trace.append(_frobenius_residual(x, h, w))
    return Embedding(
        h=h,
        drug_ids=list(matrix.drug_ids),
        w=w,
        node_ids=list(matrix.node_ids),
        objective_trace=np.array(trace),
    )


def drug_vectors(embedding: Embedding) -> list[tuple[str, np.ndarray]]:
    """Per-drug embedding rows in drug-index order."""
    return [(drug_id, embedding.h[i].copy()) for i, drug_id in enumerate(embedding.drug_ids)]


def write_embedding_csv(embedding: Embedding, path: str) -> None:
    """Header ``node_id,x_0,...,x_{d-1}``; floats carry 17 significant digits."""
    d = embedding.dimensions
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["node_id"] + [f"x_{j}" for j in range(d)])
        for drug_id, row in drug_vectors(embedding):
            writer.writerow([drug_id] + [format(v, ".17g") for v in row])


def read_embedding_csv(path: str) -> Embedding:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read embedding file {path!r}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if not header or header[0] != "node_id" or len(header) < 2:
            raise ValidationError(f"embedding file {path!r} must start with node_id,x_0,...")
        drug_ids: list[str] = []
        rows: list[list[float]] = []
        for row in reader:
            if len(row) != len(header):
                raise ValidationError(f"embedding row width mismatch in {path!r}")
            drug_ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ValidationError(f"embedding file {path!r} has no rows")
    return Embedding(h=np.array(rows, dtype=np.float64), drug_ids=drug_ids)
