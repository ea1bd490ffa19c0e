"""Independent reference implementations used to check the fast paths.

Everything here is deliberately naive: dense matrix powers, quadratic-time
pair counting, exhaustive threshold enumeration. None of it shares code with
the library.
"""

from __future__ import annotations

import numpy as np

from pprlink import HeteroGraph


def dense_normalized_adjacency(graph: HeteroGraph) -> np.ndarray:
    """Materialized column-stochastic matrix with identity isolated columns."""
    n = graph.node_count
    dense = graph.adjacency.toarray()
    out = np.zeros((n, n))
    degree = dense.sum(axis=0)
    for col in range(n):
        if degree[col] > 0:
            out[:, col] = dense[:, col] / degree[col]
        else:
            out[col, col] = 1.0
    return out


def dense_ppr_oracle(graph: HeteroGraph, alpha: float, iterations: int) -> np.ndarray:
    """Term-by-term power series with explicit dense matrix powers: (n, m)."""
    n, m = graph.node_count, graph.drug_count
    a = dense_normalized_adjacency(graph)
    basis = np.zeros((n, m))
    basis[np.arange(m), np.arange(m)] = 1.0
    total = np.zeros((n, m))
    power = basis.copy()  # A^0 S
    for r in range(iterations):
        total = total + alpha * (1.0 - alpha) ** r * power
        power = a @ power
    total = total + (1.0 - alpha) ** iterations * power
    return total


def topk_by_sort(column: np.ndarray, k: int) -> list[tuple[int, float]]:
    """Full sort then take k: score descending, index ascending on ties."""
    entries = [(i, float(v)) for i, v in enumerate(column) if v != 0.0]
    entries.sort(key=lambda pair: (-pair[1], pair[0]))
    kept = entries[:k]
    kept.sort(key=lambda pair: pair[0])
    return kept


def brute_force_auroc(scores, labels) -> float:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    positives = scores[labels == 1]
    negatives = scores[labels == 0]
    wins = 0.0
    for p in positives:
        for q in negatives:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (positives.size * negatives.size)


def threshold_enum_aupr(scores, labels) -> float:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int(labels.sum())
    points = []
    for threshold in sorted(set(scores.tolist()), reverse=True):
        predicted = scores >= threshold
        tp = int(np.sum(predicted & (labels == 1)))
        fp = int(np.sum(predicted & (labels == 0)))
        points.append((tp / n_pos, tp / (tp + fp)))
    area = 0.0
    previous_recall = 0.0
    for recall, precision in points:
        area += (recall - previous_recall) * precision
        previous_recall = recall
    return area


def random_graph_parts(rng: np.random.Generator, max_nodes: int = 50):
    """Random typed node list and edges: no drug-drug edges, no self-loops.

    Nodes may end up isolated; there is always at least one drug and one gene.
    """
    n = int(rng.integers(2, max_nodes + 1))
    n_drugs = int(rng.integers(1, n))
    kinds = ["drug"] * n_drugs + ["gene"] * (n - n_drugs)
    names = [f"{kind}{i}" for i, kind in enumerate(kinds)]
    typed_nodes = list(zip(names, kinds))
    edge_p = rng.uniform(0.02, 0.25)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if kinds[i] == "drug" and kinds[j] == "drug":
                continue
            if rng.random() < edge_p:
                edges.append((names[i], names[j]))
    return typed_nodes, edges
