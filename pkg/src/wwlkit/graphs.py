"""Core graph data model and graph-manipulation utilities.

Graphs are undirected, immutable after construction, and may carry
categorical node labels, real-valued node attribute vectors, and edge
weights. All randomized operations take an explicit seed and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphValidationError(ValueError):
    """A graph or dataset violates a structural invariant."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph with optional node labels/attributes and edge weights.

    Edges are stored canonically: each unordered pair once, endpoints
    ordered u <= v. Self-loops are allowed and stored once; parallel
    edges are rejected by :func:`validate`.
    """

    node_count: int
    edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    weights: np.ndarray | None = None
    node_labels: np.ndarray | None = None
    node_attributes: np.ndarray | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.weights is None:
            weights = np.ones(len(edges), dtype=np.float64)
        else:
            weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        # canonical storage: u <= v
        u = np.minimum(edges[:, 0], edges[:, 1])
        v = np.maximum(edges[:, 0], edges[:, 1])
        edges = np.column_stack([u, v]) if len(edges) else edges
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.node_labels is not None:
            object.__setattr__(
                self, "node_labels", np.asarray(self.node_labels, dtype=np.int64)
            )
        if self.node_attributes is not None:
            attrs = np.asarray(self.node_attributes, dtype=np.float64)
            if attrs.ndim == 1:
                attrs = attrs.reshape(-1, 1)
            object.__setattr__(self, "node_attributes", attrs)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbor_lists(self) -> list[list[int]]:
        """Adjacency lists; a self-loop contributes its node once."""
        neigh: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            if u == v:
                neigh[u].append(u)
            else:
                neigh[u].append(v)
                neigh[v].append(u)
        return neigh

    def degrees(self) -> np.ndarray:
        """Neighbor counts (weights ignored, self-loop counted once)."""
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            if u != v:
                deg[v] += 1
        return deg


@dataclass(frozen=True)
class Dataset:
    """A named list of graphs with one class label per graph."""

    graphs: list[Graph]
    graph_labels: list[int]
    name: str = ""

    def __post_init__(self):
        if not self.graphs:
            raise GraphValidationError(f"dataset {self.name!r} is empty")
        if len(self.graphs) != len(self.graph_labels):
            raise GraphValidationError(
                f"dataset {self.name!r}: {len(self.graphs)} graphs but "
                f"{len(self.graph_labels)} graph labels"
            )

    def __len__(self) -> int:
        return len(self.graphs)


def validate(graph: Graph) -> None:
    """Check all Graph invariants; raise GraphValidationError naming the offender."""
    n = graph.node_count
    if n < 0:
        raise GraphValidationError(f"node_count is negative: {n}")
    edges = graph.edges
    if len(edges):
        bad = np.where((edges < 0) | (edges >= n))[0]
        if len(bad):
            i = int(bad[0])
            raise GraphValidationError(
                f"edge {i} endpoint out of range: ({edges[i, 0]}, {edges[i, 1]}) "
                f"with node_count={n}"
            )
        seen = set()
        for i, (u, v) in enumerate(edges):
            key = (int(u), int(v))
            if key in seen:
                raise GraphValidationError(f"edge {i} is a parallel edge: {key}")
            seen.add(key)
    if len(graph.weights) != len(edges):
        raise GraphValidationError(
            f"weights length mismatch: {len(graph.weights)} weights for {len(edges)} edges"
        )
    if not np.all(np.isfinite(graph.weights)):
        i = int(np.where(~np.isfinite(graph.weights))[0][0])
        raise GraphValidationError(f"weight {i} is non-finite: {graph.weights[i]}")
    if graph.node_labels is not None:
        if len(graph.node_labels) != n:
            raise GraphValidationError(
                f"node_labels length mismatch: {len(graph.node_labels)} labels "
                f"for {n} nodes"
            )
        if len(graph.node_labels) and graph.node_labels.min() < 0:
            i = int(np.argmin(graph.node_labels))
            raise GraphValidationError(f"node label {i} is negative: {graph.node_labels[i]}")
    if graph.node_attributes is not None:
        if graph.node_attributes.shape[0] != n:
            raise GraphValidationError(
                f"node_attributes length mismatch: {graph.node_attributes.shape[0]} rows "
                f"for {n} nodes"
            )
        if graph.node_attributes.size and not np.all(np.isfinite(graph.node_attributes)):
            i, j = (int(x[0]) for x in np.where(~np.isfinite(graph.node_attributes)))
            raise GraphValidationError(f"node attribute ({i}, {j}) is non-finite")


def permute(graph: Graph, perm) -> Graph:
    """Relabel node indices by a permutation: node i becomes perm[i]."""
    perm = np.asarray(perm, dtype=np.int64)
    n = graph.node_count
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise GraphValidationError(
            f"perm is not a bijection on [0, {n}): got {perm.tolist()}"
        )
    edges = perm[graph.edges] if len(graph.edges) else graph.edges
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    labels = graph.node_labels[inv] if graph.node_labels is not None else None
    attrs = graph.node_attributes[inv] if graph.node_attributes is not None else None
    return Graph(n, edges, graph.weights.copy(), labels, attrs)


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) random graph; each unordered pair is an edge with probability p."""
    if n < 1:
        raise GraphValidationError(f"n must be >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise GraphValidationError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    edges = np.column_stack([iu[mask], ju[mask]])
    return Graph(n, edges)


def perturb_edges(graph: Graph, noise: float, seed: int) -> Graph:
    """Remove round(noise * |E|) uniformly chosen edges (round half up)."""
    if not 0.0 <= noise <= 1.0:
        raise GraphValidationError(f"noise must be in [0, 1], got {noise}")
    m = graph.edge_count
    n_remove = int(np.floor(noise * m + 0.5))
    rng = np.random.default_rng(seed)
    remove = rng.choice(m, size=n_remove, replace=False) if n_remove else np.array([], dtype=np.int64)
    keep = np.setdiff1d(np.arange(m), remove)
    return Graph(
        graph.node_count,
        graph.edges[keep],
        graph.weights[keep],
        graph.node_labels,
        graph.node_attributes,
    )


def degree_as_attribute(graph: Graph) -> Graph:
    """Attach the n x 1 matrix of node degrees as node_attributes."""
    deg = graph.degrees().astype(np.float64).reshape(-1, 1)
    return Graph(graph.node_count, graph.edges, graph.weights, graph.node_labels, deg)


def degree_as_label(graph: Graph) -> Graph:
    """Attach node degrees as categorical node_labels."""
    return Graph(
        graph.node_count, graph.edges, graph.weights, graph.degrees(), graph.node_attributes
    )


def standardize_attributes(dataset: Dataset) -> Dataset:
    """Standardize node attributes with moments pooled over all nodes of all graphs.

    Per attribute dimension, subtracts the pooled mean and divides by the
    pooled standard deviation; zero-variance dimensions map to 0.
    """
    dims = set()
    for i, g in enumerate(dataset.graphs):
        if g.node_attributes is None:
            raise GraphValidationError(f"graph {i} has no node attributes")
        dims.add(g.node_attributes.shape[1])
    if len(dims) != 1:
        raise GraphValidationError(f"attribute dimension mismatch across graphs: {sorted(dims)}")
    pooled = np.vstack([g.node_attributes for g in dataset.graphs])
    mean = pooled.mean(axis=0)
    std = pooled.std(axis=0)
    scale = np.where(std > 0, std, 1.0)
    graphs = []
    for g in dataset.graphs:
        attrs = (g.node_attributes - mean) / scale
        attrs[:, std == 0] = 0.0
        graphs.append(Graph(g.node_count, g.edges, g.weights, g.node_labels, attrs))
    return Dataset(graphs, list(dataset.graph_labels), dataset.name)
