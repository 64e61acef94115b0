"""Shared fixtures: toy graphs, synthetic datasets, TU fixture writer."""

import os
from pathlib import Path

import numpy as np
import pytest

from wwlkit import Dataset, Graph, erdos_renyi


@pytest.fixture
def triangle():
    return Graph(3, [(0, 1), (1, 2), (0, 2)], node_labels=[1, 1, 2])


@pytest.fixture
def labeled_path():
    return Graph(3, [(0, 1), (1, 2)], node_labels=[1, 2, 1])


def random_labeled_graph(rng, n_range=(4, 12), p_range=(0.2, 0.6), alphabet=4):
    n = int(rng.integers(*n_range))
    p = float(rng.uniform(*p_range))
    g = erdos_renyi(n, p, int(rng.integers(2**31)))
    return Graph(n, g.edges, node_labels=rng.integers(0, alphabet, n))


def random_attributed_graph(rng, n_range=(4, 12), p_range=(0.2, 0.6), dim=3):
    n = int(rng.integers(*n_range))
    p = float(rng.uniform(*p_range))
    g = erdos_renyi(n, p, int(rng.integers(2**31)))
    return Graph(n, g.edges, node_attributes=rng.normal(size=(n, dim)))


def random_labeled_dataset(rng, n_graphs=20, **kwargs):
    graphs = [random_labeled_graph(rng, **kwargs) for _ in range(n_graphs)]
    return Dataset(graphs, [int(rng.integers(2)) for _ in graphs], "synthetic-labeled")


def random_attributed_dataset(rng, n_graphs=20, **kwargs):
    graphs = [random_attributed_graph(rng, **kwargs) for _ in range(n_graphs)]
    return Dataset(graphs, [int(rng.integers(2)) for _ in graphs], "synthetic-attributed")


def write_tu_fixture(root: Path, name="TOY", node_labels=True, node_attributes=False,
                     edge_attributes=False):
    """Two graphs: a labeled triangle and a 2-node path, TU layout on disk.

    Edge rows are listed in both directions like the published collection.
    """
    d = root / name
    d.mkdir(parents=True, exist_ok=True)
    # graph 1: nodes 1,2,3 triangle; graph 2: nodes 4,5 single edge
    rows = [(1, 2), (2, 1), (2, 3), (3, 2), (1, 3), (3, 1), (4, 5), (5, 4)]
    (d / f"{name}_A.txt").write_text("".join(f"{a}, {b}\n" for a, b in rows))
    (d / f"{name}_graph_indicator.txt").write_text("1\n1\n1\n2\n2\n")
    (d / f"{name}_graph_labels.txt").write_text("1\n-1\n")
    if node_labels:
        (d / f"{name}_node_labels.txt").write_text("1\n1\n2\n1\n2\n")
    if node_attributes:
        (d / f"{name}_node_attributes.txt").write_text(
            "0.5, 1.0\n0.0, 2.0\n-1.5, 0.25\n3.0, 1.0\n1.0, -2.0\n")
    if edge_attributes:
        (d / f"{name}_edge_attributes.txt").write_text(
            "1.5\n1.5\n2.0\n2.0\n0.5\n0.5\n4.0\n4.0\n")
    return d


def data_root() -> Path | None:
    env = os.environ.get("WWL_DATA_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(Path(__file__).resolve().parent.parent / "data")
    for c in candidates:
        if c.is_dir():
            return c
    return None


def require_tu(name: str) -> Path:
    root = data_root()
    if root is None or not (root / name / f"{name}_A.txt").exists():
        pytest.skip(
            f"TU dataset {name} not available (expected under $WWL_DATA_DIR or ./data; "
            f"run scripts/fetch_datasets.py in a networked environment)"
        )
    return root / name
