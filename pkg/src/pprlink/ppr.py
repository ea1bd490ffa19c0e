"""Truncated personalized PageRank profiles for drug nodes, plus top-k pruning.

For each drug the profile is the weighted power series

    sum_{r=0}^{t-1} alpha (1-alpha)^r  A^r e_d  +  (1-alpha)^t A^t e_d

evaluated with t applications of the column-stochastic operator and a dense
accumulator per drug. The weights telescope to 1, so every profile is a
probability vector. Pruning keeps each drug's k largest scores (ties at the
cut broken toward the smaller node index) without renormalizing.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import UnknownDrug, ValidationError
from .graph import NodeKind, NormalizedAdjacency

SCORE_COLUMNS = ("node_1", "node_2", "score")


@dataclass(frozen=True)
class PprConfig:
    alpha: float = 0.7
    iterations: int = 25
    top_k: int = 50

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.iterations < 1:
            raise ValidationError(f"iterations must be >= 1, got {self.iterations}")
        if self.top_k < 1:
            raise ValidationError(f"top_k must be >= 1, got {self.top_k}")


class PprMatrix:
    """Dense per-drug score columns: shape ``(n, m)``, column j belongs to drug j."""

    def __init__(self, scores: np.ndarray, drug_ids: list[str], node_ids: list[str]):
        self.scores = scores
        self.drug_ids = drug_ids
        self.node_ids = node_ids

    @property
    def node_count(self) -> int:
        return self.scores.shape[0]

    @property
    def drug_count(self) -> int:
        return self.scores.shape[1]

    def column(self, drug_index: int) -> np.ndarray:
        return self.scores[:, drug_index]


class PrunedPprMatrix:
    """Row-sparse top-k profiles: row d holds drug d's kept (index, score) pairs.

    Rows are stored CSR-style with per-row indices sorted ascending; kept
    scores are the untouched profile values.
    """

    def __init__(
        self,
        indptr: np.ndarray,
        indices: np.ndarray,
        values: np.ndarray,
        drug_ids: list[str],
        node_ids: list[str],
    ):
        self.indptr = indptr
        self.indices = indices
        self.values = values
        self.drug_ids = drug_ids
        self.node_ids = node_ids

    @property
    def drug_count(self) -> int:
        return len(self.drug_ids)

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def row(self, drug_index: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[drug_index], self.indptr[drug_index + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.indices, self.indptr),
            shape=(self.drug_count, self.node_count),
        )

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()

    @classmethod
    def from_dense(
        cls,
        matrix: np.ndarray,
        drug_ids: list[str] | None = None,
        node_ids: list[str] | None = None,
    ) -> "PrunedPprMatrix":
        """Wrap a dense non-negative matrix (rows = drugs) without pruning."""
        matrix = np.asarray(matrix, dtype=np.float64)
        m, n = matrix.shape
        csr = sp.csr_matrix(matrix)
        csr.sort_indices()
        return cls(
            csr.indptr.astype(np.int64),
            csr.indices.astype(np.int64),
            csr.data.astype(np.float64),
            drug_ids if drug_ids is not None else [f"d{i}" for i in range(m)],
            node_ids if node_ids is not None else [f"e{j}" for j in range(n)],
        )


def _propagate_block(adjacency: NormalizedAdjacency, cfg: PprConfig, lo: int, hi: int) -> np.ndarray:
    """Profiles for drugs lo..hi-1 (drug j seeds basis column j - lo)."""
    n = adjacency.n
    width = hi - lo
    current = np.zeros((n, width), dtype=np.float64)
    current[np.arange(lo, hi), np.arange(width)] = 1.0
    accumulator = np.zeros_like(current)
    alpha = cfg.alpha
    for step in range(cfg.iterations):
        accumulator += (alpha * (1.0 - alpha) ** step) * current
        remaining = (1.0 - alpha) ** (step + 1)
        if remaining == 0.0:
            return accumulator
        current = adjacency.multiply_block(current)
    accumulator += (1.0 - alpha) ** cfg.iterations * current
    return accumulator


def compute_ppr(
    adjacency: NormalizedAdjacency, cfg: PprConfig, workers: int = 1
) -> PprMatrix:
    """Profiles for every drug. Per-drug columns are independent, so the work
    may be chunked across threads; results are bit-identical for any chunking."""
    graph = adjacency.graph
    m = graph.drug_count
    if m < 1:
        raise ValidationError("graph has no drug nodes")
    n = graph.node_count
    scores = np.zeros((n, m), dtype=np.float64, order="F")

    chunk = max(1, min(-(-m // max(workers, 1)), 128))
    blocks = [(lo, min(lo + chunk, m)) for lo in range(0, m, chunk)]

    def fill(block: tuple[int, int]) -> None:
        lo, hi = block
        scores[:, lo:hi] = _propagate_block(adjacency, cfg, lo, hi)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, blocks))
    else:
        for block in blocks:
            fill(block)
    return PprMatrix(scores, graph.drug_ids, graph.node_ids)


def _top_k(column: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices (sorted ascending) and scores of the k largest nonzero entries.

    Ties at the k-th score keep the smaller index.
    """
    nonzero = np.flatnonzero(column)
    if nonzero.size > k:
        order = np.lexsort((nonzero, -column[nonzero]))[:k]
        keep = np.sort(nonzero[order])
    else:
        keep = nonzero
    return keep, column[keep]


def prune(matrix: PprMatrix, k: int) -> PrunedPprMatrix:
    """Keep each drug's k largest profile entries; exact zeros are never stored."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    m = matrix.drug_count
    indptr = np.zeros(m + 1, dtype=np.int64)
    index_rows: list[np.ndarray] = []
    value_rows: list[np.ndarray] = []
    for j in range(m):
        keep, values = _top_k(matrix.scores[:, j], k)
        index_rows.append(keep)
        value_rows.append(values)
        indptr[j + 1] = indptr[j] + keep.size
    indices = np.concatenate(index_rows) if index_rows else np.empty(0, dtype=np.int64)
    values = np.concatenate(value_rows) if value_rows else np.empty(0, dtype=np.float64)
    return PrunedPprMatrix(indptr, indices.astype(np.int64), values, matrix.drug_ids, matrix.node_ids)


def ppr_row_query(
    adjacency: NormalizedAdjacency, cfg: PprConfig, drug_id: str
) -> list[tuple[str, float]]:
    """Pruned profile for a single drug, as ``(node_id, score)`` pairs."""
    node = adjacency.graph.get(drug_id)
    if node is None or node.kind is not NodeKind.DRUG:
        raise UnknownDrug(f"{drug_id!r} is not a drug node")
    column = _propagate_block(adjacency, cfg, node.index, node.index + 1)[:, 0]
    keep, values = _top_k(column, cfg.top_k)
    node_ids = adjacency.graph.node_ids
    return [(node_ids[i], float(v)) for i, v in zip(keep, values)]


def write_scores_csv(pruned: PrunedPprMatrix, path: str) -> None:
    """One ``node_1,node_2,score`` row per kept entry (node_1 is the drug)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCORE_COLUMNS)
        for j, drug_id in enumerate(pruned.drug_ids):
            indices, values = pruned.row(j)
            for i, v in zip(indices, values):
                writer.writerow((drug_id, pruned.node_ids[i], format(v, ".17g")))


def read_scores_csv(path: str) -> PrunedPprMatrix:
    """Rebuild a sparse profile matrix from a score CSV.

    Row order follows the drugs' first appearance; the entity universe is the
    set of ids seen in the file, indexed by first appearance.
    """
    drug_order: list[str] = []
    node_order: list[str] = []
    drug_pos: dict[str, int] = {}
    node_pos: dict[str, int] = {}
    entries: list[list[tuple[int, float]]] = []
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scores file {path!r}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in SCORE_COLUMNS):
            raise ValidationError(f"scores file {path!r} must have columns {SCORE_COLUMNS}")
        for row in reader:
            drug, node, score = row["node_1"], row["node_2"], float(row["score"])
            if drug not in drug_pos:
                drug_pos[drug] = len(drug_order)
                drug_order.append(drug)
                entries.append([])
            if node not in node_pos:
                node_pos[node] = len(node_order)
                node_order.append(node)
            entries[drug_pos[drug]].append((node_pos[node], score))
    if not drug_order:
        raise ValidationError(f"scores file {path!r} has no rows")
    indptr = np.zeros(len(drug_order) + 1, dtype=np.int64)
    indices: list[int] = []
    values: list[float] = []
    for j, row_entries in enumerate(entries):
        row_entries.sort(key=lambda pair: pair[0])
        indices.extend(i for i, _ in row_entries)
        values.extend(v for _, v in row_entries)
        indptr[j + 1] = len(indices)
    return PrunedPprMatrix(
        indptr,
        np.array(indices, dtype=np.int64),
        np.array(values, dtype=np.float64),
        drug_order,
        node_order,
    )
