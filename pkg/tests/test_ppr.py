import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pprlink import (
    HeteroGraph,
    PprConfig,
    PprMatrix,
    compute_ppr,
    ingest_edges,
    ppr_row_query,
    prune,
    read_scores_csv,
    write_scores_csv,
)
from pprlink.errors import UnknownDrug, ValidationError

from oracles import dense_ppr_oracle, random_graph_parts, topk_by_sort


def test_config_validation():
    with pytest.raises(ValidationError):
        PprConfig(alpha=1.5)
    with pytest.raises(ValidationError):
        PprConfig(iterations=0)
    with pytest.raises(ValidationError):
        PprConfig(top_k=0)


def test_two_node_single_step(two_node_graph):
    # frozen from the dense oracle: alpha + (1-alpha) * A e_d = (0.7, 0.3)
    x = compute_ppr(two_node_graph.normalized(), PprConfig(alpha=0.7, iterations=1))
    d = two_node_graph.node("d1").index
    g = two_node_graph.node("g1").index
    column = x.column(0)
    assert column[d] == pytest.approx(0.7, abs=1e-15)
    assert column[g] == pytest.approx(0.3, abs=1e-15)
    oracle = dense_ppr_oracle(two_node_graph, 0.7, 1)
    assert np.max(np.abs(x.scores - oracle)) <= 1e-15


def test_alpha_one_keeps_all_mass_home():
    rng = np.random.default_rng(11)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    x = compute_ppr(g.normalized(), PprConfig(alpha=1.0, iterations=7))
    expected = np.zeros((g.node_count, g.drug_count))
    expected[np.arange(g.drug_count), np.arange(g.drug_count)] = 1.0
    assert np.array_equal(x.scores, expected)


def test_isolated_drug_is_identity_column():
    g = HeteroGraph.from_parts(
        [("d1", "drug"), ("d2", "drug"), ("g1", "gene")], [("d2", "g1")]
    )
    x = compute_ppr(g.normalized(), PprConfig(alpha=0.3, iterations=5))
    d1 = g.node("d1").index
    assert x.column(d1)[d1] == 1.0
    assert x.column(d1).sum() == 1.0


@settings(max_examples=30, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.sampled_from([0.0, 0.15, 0.7, 1.0]),
    st.sampled_from([1, 5, 25]),
)
def test_oracle_equivalence(seed, alpha, iterations):
    rng = np.random.default_rng(seed)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    x = compute_ppr(g.normalized(), PprConfig(alpha=alpha, iterations=iterations))
    oracle = dense_ppr_oracle(g, alpha, iterations)
    assert np.max(np.abs(x.scores - oracle)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_columns_sum_to_one(seed, alpha):
    rng = np.random.default_rng(seed)
    g = HeteroGraph.from_parts(*random_graph_parts(rng, max_nodes=30))
    x = compute_ppr(g.normalized(), PprConfig(alpha=alpha, iterations=5))
    sums = x.scores.sum(axis=0)
    assert np.max(np.abs(sums - 1.0)) <= 1e-9


def test_monotone_refinement_bound():
    # geometric tail: increasing t moves each column by at most 2 (1-alpha)^t_small
    rng = np.random.default_rng(3)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    alpha = 0.5
    for t_small, t_big in ((2, 8), (5, 25)):
        a = compute_ppr(g.normalized(), PprConfig(alpha=alpha, iterations=t_small))
        b = compute_ppr(g.normalized(), PprConfig(alpha=alpha, iterations=t_big))
        l1 = np.abs(a.scores - b.scores).sum(axis=0).max()
        assert l1 <= 2 * (1 - alpha) ** t_small + 1e-12


def test_self_mass_at_least_alpha():
    rng = np.random.default_rng(5)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    alpha = 0.4
    x = compute_ppr(g.normalized(), PprConfig(alpha=alpha, iterations=10))
    for d in range(g.drug_count):
        assert x.column(d)[d] >= alpha - 1e-15
    pruned = prune(x, 1)
    for d in range(g.drug_count):
        indices, _ = pruned.row(d)
        assert d in indices


def test_workers_do_not_change_result():
    rng = np.random.default_rng(13)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    cfg = PprConfig(alpha=0.7, iterations=25)
    lone = compute_ppr(g.normalized(), cfg, workers=1)
    pooled = compute_ppr(g.normalized(), cfg, workers=4)
    assert np.array_equal(lone.scores, pooled.scores)


def test_ingestion_order_insensitive():
    rows = [
        ("d1", "drug", "g1", "gene"),
        ("g1", "gene", "g2", "gene"),
        ("d2", "drug", "g2", "gene"),
        ("g2", "gene", "g3", "gene"),
    ]
    cfg = PprConfig(alpha=0.7, iterations=10)
    a = compute_ppr(ingest_edges(rows).normalized(), cfg)
    b = compute_ppr(ingest_edges(rows[::-1]).normalized(), cfg)

    def by_id(x: PprMatrix):
        return {
            drug: dict(zip(x.node_ids, x.scores[:, j]))
            for j, drug in enumerate(x.drug_ids)
        }

    scores_a, scores_b = by_id(a), by_id(b)
    assert scores_a.keys() == scores_b.keys()
    for drug in scores_a:
        for node in scores_a[drug]:
            assert scores_a[drug][node] == pytest.approx(scores_b[drug][node], abs=1e-12)


class TestPrune:
    def _matrix(self, rows):
        scores = np.array(rows, dtype=np.float64).T.copy(order="F")
        m = scores.shape[1]
        n = scores.shape[0]
        return PprMatrix(scores, [f"d{i}" for i in range(m)], [f"e{j}" for j in range(n)])

    def test_keeps_top_two(self):
        pruned = prune(self._matrix([[0.5, 0.3, 0.2]]), 2)
        indices, values = pruned.row(0)
        assert indices.tolist() == [0, 1]
        assert values.tolist() == [0.5, 0.3]

    def test_k_at_least_n_keeps_all_nonzero(self):
        pruned = prune(self._matrix([[0.5, 0.0, 0.2]]), 10)
        indices, values = pruned.row(0)
        assert indices.tolist() == [0, 2]
        assert values.tolist() == [0.5, 0.2]

    def test_tie_break_prefers_smaller_index(self):
        pruned = prune(self._matrix([[0.4, 0.3, 0.3]]), 2)
        indices, _ = pruned.row(0)
        assert indices.tolist() == [0, 1]

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = self._matrix(rng.random((6, 20)))
        once = prune(x, 5)
        again = prune(
            PprMatrix(once.to_dense().T.copy(order="F"), once.drug_ids, once.node_ids), 5
        )
        assert np.array_equal(once.indptr, again.indptr)
        assert np.array_equal(once.indices, again.indices)
        assert np.array_equal(once.values, again.values)

    def test_invalid_k(self):
        with pytest.raises(ValidationError):
            prune(self._matrix([[1.0]]), 0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 12))
    def test_matches_sort_oracle(self, seed, k):
        rng = np.random.default_rng(seed)
        row = np.round(rng.random(15), 1)  # coarse values force ties
        pruned = prune(self._matrix([row]), k)
        indices, values = pruned.row(0)
        assert list(zip(indices.tolist(), values.tolist())) == topk_by_sort(row, k)

    def test_kept_scores_dominate_dropped(self):
        rng = np.random.default_rng(21)
        row = rng.random(30)
        pruned = prune(self._matrix([row]), 7)
        indices, values = pruned.row(0)
        dropped = np.delete(row, indices)
        assert values.min() >= dropped.max()


class TestRowQuery:
    def test_matches_full_computation(self):
        rng = np.random.default_rng(17)
        g = HeteroGraph.from_parts(*random_graph_parts(rng))
        cfg = PprConfig(alpha=0.7, iterations=10, top_k=5)
        pruned = prune(compute_ppr(g.normalized(), cfg), cfg.top_k)
        for j, drug_id in enumerate(g.drug_ids):
            fast = ppr_row_query(g.normalized(), cfg, drug_id)
            indices, values = pruned.row(j)
            expected = [(g.node_ids[i], v) for i, v in zip(indices, values)]
            assert fast == expected

    def test_two_node_example(self, two_node_graph):
        result = ppr_row_query(
            two_node_graph.normalized(), PprConfig(alpha=0.7, iterations=1, top_k=1), "d1"
        )
        assert result == [("d1", pytest.approx(0.7, abs=1e-15))]

    def test_k_beyond_support(self, two_node_graph):
        result = ppr_row_query(
            two_node_graph.normalized(), PprConfig(alpha=0.7, iterations=1, top_k=99), "d1"
        )
        assert len(result) == 2

    def test_gene_id_rejected(self, two_node_graph):
        with pytest.raises(UnknownDrug):
            ppr_row_query(two_node_graph.normalized(), PprConfig(), "g1")


def test_scores_csv_round_trip(tmp_path):
    rng = np.random.default_rng(23)
    g = HeteroGraph.from_parts(*random_graph_parts(rng))
    pruned = prune(compute_ppr(g.normalized(), PprConfig(alpha=0.7, iterations=5)), 4)
    path = tmp_path / "scores.csv"
    write_scores_csv(pruned, str(path))
    header = path.read_text().splitlines()[0]
    assert header == "node_1,node_2,score"
    loaded = read_scores_csv(str(path))
    assert loaded.drug_ids == pruned.drug_ids
    dense = pruned.to_dense()
    reloaded = loaded.to_dense()
    for j in range(pruned.drug_count):
        original = {pruned.node_ids[i]: v for i, v in zip(*pruned.row(j))}
        back = {loaded.node_ids[i]: v for i, v in zip(*loaded.row(j))}
        assert original == back
    assert dense.sum() == pytest.approx(reloaded.sum())
