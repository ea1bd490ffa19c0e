import numpy as np
import pytest

from pprlink import PairFeatureTable


@pytest.fixture
def two_node_graph():
    from pprlink import ingest_edges

    return ingest_edges([("d1", "drug", "g1", "gene")])


@pytest.fixture
def star_graph():
    # gene g0 adjacent to g1, g2 and d0
    from pprlink import ingest_edges

    return ingest_edges(
        [
            ("g0", "gene", "g1", "gene"),
            ("g0", "gene", "g2", "gene"),
            ("d0", "drug", "g0", "gene"),
        ]
    )


def make_table(features, labels) -> PairFeatureTable:
    """Wrap plain arrays as a pair feature table for the learners."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    return PairFeatureTable(
        [f"a{i}" for i in range(n)],
        [f"b{i}" for i in range(n)],
        labels,
        features,
    )
