"""Typed drug/gene graph: ingestion, target validation, normalized adjacency.

Node identifiers are opaque strings. Drug nodes are packed into indices
``0..m-1`` in first-appearance order (genes follow), so the drug indicator
basis used by the score propagation is simply the leading columns of the
identity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ConflictingDuplicateLabel,
    ConflictingNodeType,
    DimensionMismatch,
    DrugDrugEdge,
    EmptyInput,
    NonDrugNodeInPair,
    SelfLoop,
    UnknownDrug,
    UnknownNodeType,
    ValidationError,
)

EDGE_COLUMNS = ("node_1", "type_1", "node_2", "type_2")
TARGET_COLUMNS = ("drug_1", "drug_2", "label")


class NodeKind(str, Enum):
    DRUG = "drug"
    GENE = "gene"


@dataclass(frozen=True)
class NodeRef:
    """A node with its dense index assigned at ingestion."""

    id: str
    kind: NodeKind
    index: int


class HeteroGraph:
    """Immutable undirected graph over drug and gene nodes.

    Edges are deduplicated and stored symmetrically in a CSR adjacency.
    Self-loops and drug-drug edges are rejected at construction.
    """

    def __init__(self, nodes: list[NodeRef], edge_index: np.ndarray):
        self._nodes = nodes
        self._by_id = {node.id: node for node in nodes}
        n = len(nodes)
        m = sum(1 for node in nodes if node.kind is NodeKind.DRUG)
        for i, node in enumerate(nodes):
            if node.index != i or (node.kind is NodeKind.DRUG) != (i < m):
                raise ValidationError("drug nodes must occupy indices 0..m-1")
        self._edge_index = edge_index
        if edge_index.size:
            rows = np.concatenate([edge_index[:, 0], edge_index[:, 1]])
            cols = np.concatenate([edge_index[:, 1], edge_index[:, 0]])
            data = np.ones(rows.size, dtype=np.float64)
            adjacency = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
        else:
            adjacency = sp.csr_matrix((n, n), dtype=np.float64)
        self._adjacency = adjacency
        self._degree = np.asarray(adjacency.sum(axis=1)).ravel().astype(np.int64)
        self._drug_count = m

    @classmethod
    def from_parts(
        cls,
        typed_nodes: Sequence[tuple[str, str]],
        edges: Sequence[tuple[str, str]],
    ) -> "HeteroGraph":
        """Build a graph from ``(id, kind)`` pairs and id-based edges.

        ``typed_nodes`` order fixes the first-appearance order used for index
        assignment; nodes listed without any incident edge stay isolated.
        """
        kinds: dict[str, NodeKind] = {}
        order: list[str] = []
        for node_id, kind_str in typed_nodes:
            try:
                kind = NodeKind(kind_str)
            except ValueError:
                raise UnknownNodeType(f"node type must be 'drug' or 'gene', got {kind_str!r}")
            seen = kinds.get(node_id)
            if seen is None:
                kinds[node_id] = kind
                order.append(node_id)
            elif seen is not kind:
                raise ConflictingNodeType(f"node {node_id!r} appears as both {seen.value} and {kind.value}")
        drugs = [node_id for node_id in order if kinds[node_id] is NodeKind.DRUG]
        genes = [node_id for node_id in order if kinds[node_id] is NodeKind.GENE]
        index = {node_id: i for i, node_id in enumerate(drugs + genes)}
        nodes = [NodeRef(node_id, kinds[node_id], index[node_id]) for node_id in drugs + genes]

        dedup: set[tuple[int, int]] = set()
        for a, b in edges:
            if a not in index or b not in index:
                raise ValidationError(f"edge references unknown node: {a!r} -- {b!r}")
            if a == b:
                raise SelfLoop(f"self-loop on node {a!r}")
            if kinds[a] is NodeKind.DRUG and kinds[b] is NodeKind.DRUG:
                raise DrugDrugEdge(f"drug-drug edge {a!r} -- {b!r} is not allowed")
            u, v = index[a], index[b]
            dedup.add((u, v) if u < v else (v, u))
        if dedup:
            edge_index = np.array(sorted(dedup), dtype=np.int64)
        else:
            edge_index = np.empty((0, 2), dtype=np.int64)
        return cls(nodes, edge_index)

    @property
    def nodes(self) -> list[NodeRef]:
        return list(self._nodes)

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def drug_count(self) -> int:
        return self._drug_count

    @property
    def edge_count(self) -> int:
        return int(self._edge_index.shape[0])

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    @property
    def adjacency(self) -> sp.csr_matrix:
        return self._adjacency

    @property
    def node_ids(self) -> list[str]:
        return [node.id for node in self._nodes]

    @property
    def drug_ids(self) -> list[str]:
        return [node.id for node in self._nodes[: self._drug_count]]

    def node(self, node_id: str) -> NodeRef:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise UnknownDrug(f"unknown node id {node_id!r}")

    def get(self, node_id: str) -> NodeRef | None:
        return self._by_id.get(node_id)

    def normalized(self) -> "NormalizedAdjacency":
        return NormalizedAdjacency(self)


def ingest_edges(rows: Iterable[Sequence[str]]) -> HeteroGraph:
    """Build a :class:`HeteroGraph` from ``(node_1, type_1, node_2, type_2)`` rows.

    Duplicate edges collapse silently; node indices follow first appearance
    with drugs re-packed ahead of genes.
    """
    typed_nodes: list[tuple[str, str]] = []
    edges: list[tuple[str, str]] = []
    kinds: dict[str, str] = {}
    for row in rows:
        try:
            node_1, type_1, node_2, type_2 = row
        except ValueError:
            raise ValidationError(f"edge row must have 4 fields, got {row!r}")
        for type_value in (type_1, type_2):
            if type_value not in (NodeKind.DRUG.value, NodeKind.GENE.value):
                raise UnknownNodeType(f"node type must be 'drug' or 'gene', got {type_value!r}")
        if node_1 == node_2:
            raise SelfLoop(f"self-loop on node {node_1!r}")
        if type_1 == NodeKind.DRUG.value and type_2 == NodeKind.DRUG.value:
            raise DrugDrugEdge(f"drug-drug edge {node_1!r} -- {node_2!r} is not allowed")
        for node_id, type_value in ((node_1, type_1), (node_2, type_2)):
            seen = kinds.get(node_id)
            if seen is None:
                kinds[node_id] = type_value
                typed_nodes.append((node_id, type_value))
            elif seen != type_value:
                raise ConflictingNodeType(f"node {node_id!r} appears as both {seen} and {type_value}")
        edges.append((node_1, node_2))
    if not edges:
        raise EmptyInput("no edge rows")
    return HeteroGraph.from_parts(typed_nodes, edges)


class NormalizedAdjacency:
    """Column-stochastic view ``y = A D^-1 x`` over a graph.

    Each column distributes the node's mass uniformly over its neighbours;
    degree-0 columns act as identity so total mass is always conserved.
    """

    def __init__(self, graph: HeteroGraph):
        self.graph = graph
        degree = graph.degree.astype(np.float64)
        self._inv_degree = np.where(degree > 0, 1.0 / np.maximum(degree, 1.0), 0.0)
        self._isolated = np.flatnonzero(degree == 0)
        self._adjacency = graph.adjacency

    @property
    def n(self) -> int:
        return self.graph.node_count

    def multiply(self, x: np.ndarray) -> np.ndarray:
        """Apply the operator to one length-n vector."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionMismatch(f"expected vector of length {self.n}, got shape {x.shape}")
        out = self._adjacency @ (x * self._inv_degree)
        if self._isolated.size:
            out[self._isolated] += x[self._isolated]
        return out

    def multiply_block(self, block: np.ndarray) -> np.ndarray:
        """Apply the operator to an ``n x b`` block of column vectors."""
        if block.ndim != 2 or block.shape[0] != self.n:
            raise DimensionMismatch(f"expected ({self.n}, b) block, got shape {block.shape}")
        out = self._adjacency @ (block * self._inv_degree[:, None])
        if self._isolated.size:
            out[self._isolated, :] += block[self._isolated, :]
        return out


@dataclass
class PairTable:
    """Validated drug pairs with binary labels, in input order."""

    drug_1: list[str]
    drug_2: list[str]
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.drug_1)

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())


def validate_targets(
    graph: HeteroGraph, pairs: Iterable[tuple[str, str, int]]
) -> PairTable:
    """Resolve and deduplicate labelled drug pairs against a graph.

    Unordered duplicates with the same label collapse silently; the same pair
    with both labels is an error.
    """
    drug_1: list[str] = []
    drug_2: list[str] = []
    labels: list[int] = []
    seen: dict[tuple[int, int], int] = {}
    for a, b, label in pairs:
        node_a = graph.get(a)
        node_b = graph.get(b)
        if node_a is None:
            raise UnknownDrug(f"pair references unknown drug {a!r}")
        if node_b is None:
            raise UnknownDrug(f"pair references unknown drug {b!r}")
        for node in (node_a, node_b):
            if node.kind is not NodeKind.DRUG:
                raise NonDrugNodeInPair(f"node {node.id!r} in pair is a {node.kind.value}, not a drug")
        label = int(label)
        if label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {label!r}")
        key = (min(node_a.index, node_b.index), max(node_a.index, node_b.index))
        if key in seen:
            if seen[key] != label:
                raise ConflictingDuplicateLabel(f"pair ({a!r}, {b!r}) listed with both labels")
            continue
        seen[key] = label
        drug_1.append(a)
        drug_2.append(b)
        labels.append(label)
    return PairTable(drug_1, drug_2, np.array(labels, dtype=np.int64))


def _open_rows(path: str, required: Sequence[str], what: str):
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {what} file {path!r}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValidationError(f"{what} file {path!r} is empty")
        missing = [column for column in required if column not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{what} file {path!r} is missing columns {missing}")
        yield from reader


def read_edge_csv(path: str) -> list[tuple[str, str, str, str]]:
    """Read ``node_1,type_1,node_2,type_2`` rows from a CSV file."""
    return [
        (row["node_1"], row["type_1"], row["node_2"], row["type_2"])
        for row in _open_rows(path, EDGE_COLUMNS, "edges")
    ]


def read_target_csv(path: str) -> list[tuple[str, str, int]]:
    """Read ``drug_1,drug_2,label`` rows from a CSV file."""
    out = []
    for row in _open_rows(path, TARGET_COLUMNS, "targets"):
        raw = row["label"].strip()
        if raw not in ("0", "1"):
            raise ValidationError(f"label must be 0 or 1, got {raw!r}")
        out.append((row["drug_1"], row["drug_2"], int(raw)))
    return out


def write_edge_csv(rows: Iterable[Sequence[str]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(EDGE_COLUMNS)
        writer.writerows(rows)


def write_target_csv(rows: Iterable[tuple[str, str, int]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(TARGET_COLUMNS)
        writer.writerows(rows)
