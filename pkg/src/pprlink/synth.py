"""Planted-community synthetic datasets for desk-scale benchmarking.

Each community gets a random gene-gene backbone and drugs wired to its own
genes; a drug pair is labelled 1 iff the drugs share a community. The noise
probability rewires each edge's second endpoint to a uniformly random gene
anywhere in the graph, so at noise 1.0 the wiring carries no community
signal and the labels become structurally meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import write_edge_csv, write_target_csv


@dataclass(frozen=True)
class SynthConfig:
    communities: int = 2
    drugs_per_community: int = 20
    genes_per_community: int = 100
    drug_gene_p: float = 0.1
    gene_gene_p: float = 0.05
    noise_p: float = 0.05
    pair_count: int | None = 2000
    seed: int = 0

    def __post_init__(self):
        if self.communities < 2:
            raise ValidationError(f"need at least 2 communities, got {self.communities}")
        if self.drugs_per_community < 1 or self.genes_per_community < 1:
            raise ValidationError("each community needs at least one drug and one gene")
        for name in ("drug_gene_p", "gene_gene_p", "noise_p"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}")
        if self.pair_count is not None and self.pair_count < 1:
            raise ValidationError(f"pair_count must be >= 1, got {self.pair_count}")


def generate_synthetic(
    cfg: SynthConfig,
) -> tuple[list[tuple[str, str, str, str]], list[tuple[str, str, int]]]:
    """Edge rows and labelled pair rows; identical output for identical seed."""
    rng = np.random.default_rng(cfg.seed)
    drug_ids = [
        f"d{c}_{i}" for c in range(cfg.communities) for i in range(cfg.drugs_per_community)
    ]
    gene_ids = [
        f"g{c}_{j}" for c in range(cfg.communities) for j in range(cfg.genes_per_community)
    ]
    total_genes = len(gene_ids)

    def community_genes(community: int) -> range:
        start = community * cfg.genes_per_community
        return range(start, start + cfg.genes_per_community)

    # candidate edges as (endpoint id, kind flag, gene index); second endpoint
    # is always a gene and is the one the noise rewiring may replace
    edges: set[tuple[str, str]] = set()
    drug_degree = np.zeros(len(drug_ids), dtype=np.int64)

    def rewire(gene_index: int, avoid_gene: int | None) -> int:
        if cfg.noise_p > 0.0 and rng.random() < cfg.noise_p:
            gene_index = int(rng.integers(total_genes))
        if avoid_gene is not None and gene_index == avoid_gene:
            gene_index = (gene_index + 1) % total_genes
        return gene_index

    for c in range(cfg.communities):
        genes = list(community_genes(c))
        # gene-gene backbone within the community
        for a_pos, a in enumerate(genes):
            for b in genes[a_pos + 1 :]:
                if rng.random() < cfg.gene_gene_p:
                    target = rewire(b, avoid_gene=a)
                    edges.add((gene_ids[a], gene_ids[target]))
        # drugs wired to the community's genes
        for i in range(cfg.drugs_per_community):
            drug_pos = c * cfg.drugs_per_community + i
            for g in genes:
                if rng.random() < cfg.drug_gene_p:
                    target = rewire(g, avoid_gene=None)
                    edges.add((drug_ids[drug_pos], gene_ids[target]))
                    drug_degree[drug_pos] += 1

    # keep every drug attached so its profile is more than self-mass
    for drug_pos in np.flatnonzero(drug_degree == 0):
        community = int(drug_pos) // cfg.drugs_per_community
        g = int(rng.integers(cfg.genes_per_community)) + community * cfg.genes_per_community
        edges.add((drug_ids[drug_pos], gene_ids[g]))

    edge_rows = []
    for a, b in sorted(edges):
        kind_a = "drug" if a.startswith("d") else "gene"
        edge_rows.append((a, kind_a, b, "gene"))

    pairs: list[tuple[str, str, int]] = []
    n_drugs = len(drug_ids)
    for i in range(n_drugs):
        for j in range(i + 1, n_drugs):
            same = i // cfg.drugs_per_community == j // cfg.drugs_per_community
            pairs.append((drug_ids[i], drug_ids[j], int(same)))
    if cfg.pair_count is not None and cfg.pair_count < len(pairs):
        chosen = np.sort(rng.permutation(len(pairs))[: cfg.pair_count])
        pairs = [pairs[i] for i in chosen]
    return edge_rows, pairs


def write_synthetic(cfg: SynthConfig, edges_path: str, targets_path: str) -> None:
    edge_rows, pairs = generate_synthetic(cfg)
    write_edge_csv(edge_rows, edges_path)
    write_target_csv(pairs, targets_path)
